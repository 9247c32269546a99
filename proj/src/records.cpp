#include "contactnet/records.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace contactnet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kHeader = "case_id,source_id,date,longitude,latitude";

std::string join_errors(std::size_t line, const std::vector<FieldError>& errors) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) os << "; ";
        os << errors[i].field << ": " << errors[i].message;
    }
    return os.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

// RFC 4180-style split: double-quoted fields may contain commas and "" escapes.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && trim(cur).empty() && !was_quoted) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\n\r") != std::string_view::npos ||
           (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

std::string csv_field(std::string_view s) {
    if (!needs_quotes(s)) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

template <class Int>
bool take_digits(std::string_view& s, std::size_t count, Int& out) {
    if (s.size() < count) return false;
    out = 0;
    for (std::size_t i = 0; i < count; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        out = static_cast<Int>(out * 10 + (c - '0'));
    }
    s.remove_prefix(count);
    return true;
}

bool take_char(std::string_view& s, char c) {
    if (s.empty() || s.front() != c) return false;
    s.remove_prefix(1);
    return true;
}

void check_coordinates(double lon, double lat, std::vector<FieldError>& errors) {
    if (!(lon >= -180.0 && lon <= 180.0)) errors.push_back({"longitude", "out of range [-180, 180]"});
    if (!(lat >= -90.0 && lat <= 90.0)) errors.push_back({"latitude", "out of range [-90, 90]"});
}

CaseRecord parse_csv(std::string_view line, std::size_t line_no) {
    auto fields = split_csv(line);
    if (!fields) throw ParseError(line_no, {{"line", "unterminated quoted field"}});
    if (fields->size() != 5) {
        throw ParseError(line_no, {{"line", "expected 5 fields, found " + std::to_string(fields->size())}});
    }
    auto& f = *fields;
    std::vector<FieldError> errors;
    CaseRecord rec;
    if (f[0].empty()) errors.push_back({"case_id", "empty"});
    rec.case_id = f[0];
    if (!f[1].empty()) rec.source_id = f[1];
    if (auto ts = parse_timestamp(f[2])) {
        rec.timestamp = *ts;
    } else {
        errors.push_back({"date", "invalid date '" + f[2] + "'"});
    }
    auto lon = parse_double(f[3]);
    auto lat = parse_double(f[4]);
    if (!lon) errors.push_back({"longitude", "not a number '" + f[3] + "'"});
    if (!lat) errors.push_back({"latitude", "not a number '" + f[4] + "'"});
    check_coordinates(lon.value_or(0.0), lat.value_or(0.0), errors);
    if (!errors.empty()) throw ParseError(line_no, std::move(errors));
    rec.location = {*lon, *lat};
    return rec;
}

std::optional<std::string> json_id(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    return std::nullopt;
}

CaseRecord parse_jsonl(std::string_view line, std::size_t line_no) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_no, {{"line", std::string("invalid JSON: ") + e.what()}});
    }
    if (!obj.is_object()) throw ParseError(line_no, {{"line", "expected a JSON object"}});

    std::vector<FieldError> errors;
    CaseRecord rec;

    if (auto it = obj.find("case_id"); it == obj.end()) {
        errors.push_back({"case_id", "missing"});
    } else if (auto id = json_id(*it); !id || id->empty()) {
        errors.push_back({"case_id", "must be a non-empty string or integer"});
    } else {
        rec.case_id = *id;
    }

    if (auto it = obj.find("source_id"); it != obj.end() && !it->is_null()) {
        if (auto id = json_id(*it)) {
            if (!id->empty()) rec.source_id = *id;
        } else {
            errors.push_back({"source_id", "must be a string, integer or null"});
        }
    }

    if (auto it = obj.find("date"); it == obj.end() || !it->is_string()) {
        errors.push_back({"date", "missing or not a string"});
    } else if (auto ts = parse_timestamp(it->get<std::string>())) {
        rec.timestamp = *ts;
    } else {
        errors.push_back({"date", "invalid date '" + it->get<std::string>() + "'"});
    }

    auto coord = [&](const char* key) -> std::optional<double> {
        auto it = obj.find(key);
        if (it == obj.end()) {
            errors.push_back({key, "missing"});
            return std::nullopt;
        }
        if (it->is_number()) return it->get<double>();
        if (it->is_string()) {
            if (auto v = parse_double(it->get<std::string>())) return v;
        }
        errors.push_back({key, "not a number"});
        return std::nullopt;
    };
    auto lon = coord("longitude");
    auto lat = coord("latitude");
    check_coordinates(lon.value_or(0.0), lat.value_or(0.0), errors);

    if (!errors.empty()) throw ParseError(line_no, std::move(errors));
    rec.location = {*lon, *lat};
    return rec;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

bool GeoPoint::valid() const noexcept {
    return longitude >= -180.0 && longitude <= 180.0 && latitude >= -90.0 && latitude <= 90.0;
}

RecordFormat parse_record_format(std::string_view name) {
    if (name == "csv") return RecordFormat::csv;
    if (name == "jsonl") return RecordFormat::jsonl;
    throw std::invalid_argument("unknown record format '" + std::string(name) + "'");
}

std::string_view to_string(RecordFormat format) noexcept {
    return format == RecordFormat::csv ? "csv" : "jsonl";
}

ParseError::ParseError(std::size_t line, std::vector<FieldError> errors)
    : std::runtime_error(join_errors(line, errors)), line_(line), errors_(std::move(errors)) {}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    std::string_view s = trim(text);
    int y = 0;
    unsigned mo = 0, d = 0;
    if (!take_digits(s, 4, y) || !take_char(s, '-') || !take_digits(s, 2, mo) || !take_char(s, '-') ||
        !take_digits(s, 2, d))
        return std::nullopt;
    year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    Timestamp ts = sys_days{ymd};
    if (s.empty()) return ts;

    if (!take_char(s, 'T') && !take_char(s, ' ')) return std::nullopt;
    int hh = 0, mm = 0, ss = 0;
    if (!take_digits(s, 2, hh) || !take_char(s, ':') || !take_digits(s, 2, mm)) return std::nullopt;
    if (take_char(s, ':') && !take_digits(s, 2, ss)) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    // Fractional seconds are truncated to second resolution.
    if (take_char(s, '.')) {
        if (s.empty() || s.front() < '0' || s.front() > '9') return std::nullopt;
        while (!s.empty() && s.front() >= '0' && s.front() <= '9') s.remove_prefix(1);
    }
    ts += hours{hh} + minutes{mm} + seconds{ss};
    if (s.empty()) return ts;
    if (take_char(s, 'Z') || take_char(s, 'z')) return s.empty() ? std::optional(ts) : std::nullopt;
    int sign = 0;
    if (take_char(s, '+')) sign = 1;
    else if (take_char(s, '-')) sign = -1;
    else return std::nullopt;
    int oh = 0, om = 0;
    if (!take_digits(s, 2, oh)) return std::nullopt;
    take_char(s, ':');
    if (!take_digits(s, 2, om) || !s.empty() || oh > 23 || om > 59) return std::nullopt;
    return ts - sign * (hours{oh} + minutes{om});
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    auto days = floor<std::chrono::days>(ts);
    year_month_day ymd{days};
    hh_mm_ss<seconds> tod{ts - days};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

std::string_view csv_header() noexcept { return kHeader; }

CaseRecord parse_record(std::string_view line, RecordFormat format, std::size_t line_no) {
    return format == RecordFormat::csv ? parse_csv(line, line_no) : parse_jsonl(line, line_no);
}

std::string format_record(const CaseRecord& record, RecordFormat format) {
    if (format == RecordFormat::csv) {
        std::string out = csv_field(record.case_id);
        out += ',';
        if (record.source_id) out += csv_field(*record.source_id);
        out += ',';
        out += format_timestamp(record.timestamp);
        out += ',';
        out += shortest(record.location.longitude);
        out += ',';
        out += shortest(record.location.latitude);
        return out;
    }
    ordered_json obj;
    obj["case_id"] = record.case_id;
    obj["source_id"] = record.source_id ? ordered_json(*record.source_id) : ordered_json(nullptr);
    obj["date"] = format_timestamp(record.timestamp);
    obj["longitude"] = record.location.longitude;
    obj["latitude"] = record.location.latitude;
    return obj.dump();
}

std::optional<std::size_t> ValidatedStream::find(std::string_view case_id) const {
    auto it = index_.find(std::string(case_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ValidatedStream validate_stream(std::vector<CaseRecord> records, LinkPolicy policy) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].timestamp < records[b].timestamp; });

    ValidatedStream out;
    out.records_.reserve(records.size());
    for (std::size_t i : order) out.records_.push_back(std::move(records[i]));

    for (std::size_t i = 0; i < out.records_.size(); ++i) {
        const auto& rec = out.records_[i];
        if (!rec.location.valid()) {
            throw ValidationError("case '" + rec.case_id + "': coordinates out of range");
        }
        if (!out.index_.emplace(rec.case_id, i).second) {
            throw ValidationError("duplicate case_id '" + rec.case_id + "'");
        }
    }

    for (auto& rec : out.records_) {
        if (!rec.source_id) continue;
        std::string problem;
        auto it = out.index_.find(*rec.source_id);
        if (*rec.source_id == rec.case_id) {
            problem = "source is the case itself";
        } else if (it == out.index_.end()) {
            problem = "dangling source '" + *rec.source_id + "'";
        } else if (out.records_[it->second].timestamp > rec.timestamp) {
            problem = "source '" + *rec.source_id + "' reported after the case";
        }
        if (problem.empty()) continue;
        if (policy == LinkPolicy::reject) {
            throw ValidationError("case '" + rec.case_id + "': " + problem);
        }
        out.diagnostics_.push_back({0, rec.case_id, problem + "; edge dropped"});
        rec.source_id.reset();
    }
    return out;
}

ValidatedStream validate_stream(const ValidatedStream& stream, LinkPolicy policy) {
    return validate_stream(stream.records(), policy);
}

RecordReader::RecordReader(std::istream& in, RecordFormat format, bool strict)
    : in_(in), format_(format), strict_(strict) {}

std::optional<CaseRecord> RecordReader::next() {
    std::string line;
    while (true) {
        if (!std::getline(in_, line)) {
            if (in_.bad()) throw StreamError("read failure after line " + std::to_string(line_no_));
            return std::nullopt;
        }
        ++line_no_;
        if (is_blank(line)) continue;
        if (format_ == RecordFormat::csv && trim(line) == kHeader) continue;
        try {
            CaseRecord rec = parse_record(line, format_, line_no_);
            if (!seen_.insert(rec.case_id).second) {
                if (strict_) throw ValidationError("line " + std::to_string(line_no_) + ": duplicate case_id '" +
                                                   rec.case_id + "'");
                diagnostics_.push_back({line_no_, rec.case_id, "duplicate case_id; line skipped"});
                continue;
            }
            return rec;
        } catch (const ParseError& e) {
            if (strict_) throw;
            diagnostics_.push_back({line_no_, {}, e.what()});
        }
    }
}

std::vector<CaseRecord> read_all(RecordReader& reader) {
    std::vector<CaseRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

}  // namespace contactnet
