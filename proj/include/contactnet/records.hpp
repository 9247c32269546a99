#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace contactnet {

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

struct GeoPoint {
    double longitude = 0.0;
    double latitude = 0.0;

    bool valid() const noexcept;
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// One reported case. `source_id` names the infecting case when known.
struct CaseRecord {
    std::string case_id;
    std::optional<std::string> source_id;
    Timestamp timestamp{};
    GeoPoint location;

    friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

enum class RecordFormat { csv, jsonl };

RecordFormat parse_record_format(std::string_view name);
std::string_view to_string(RecordFormat format) noexcept;

/// One offending field of a rejected line.
struct FieldError {
    std::string field;
    std::string message;
};

/// Raised when a line cannot be turned into a CaseRecord. Every bad field
/// on the line is listed, not only the first.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::vector<FieldError> errors);

    std::size_t line() const noexcept { return line_; }
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::size_t line_;
    std::vector<FieldError> errors_;
};

/// I/O failure on the underlying source.
class StreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by validate_stream for violations that are always fatal
/// (duplicate ids) or fatal under LinkPolicy::reject.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Accepts `YYYY-MM-DD` (midnight UTC) and `YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM]`;
// a space may replace the `T`.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

std::string_view csv_header() noexcept;

CaseRecord parse_record(std::string_view line, RecordFormat format, std::size_t line_no = 0);
std::string format_record(const CaseRecord& record, RecordFormat format);

struct Diagnostic {
    std::size_t line = 0;  // 0 when not tied to an input line
    std::string case_id;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

enum class LinkPolicy { reject, warn_drop_edge };

/// Records sorted by (timestamp, input index) with every source link
/// resolvable to an earlier-or-simultaneous case. Immutable once built.
class ValidatedStream {
public:
    ValidatedStream() = default;

    const std::vector<CaseRecord>& records() const noexcept { return records_; }
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Position in records() of the case with this id.
    std::optional<std::size_t> find(std::string_view case_id) const;

private:
    friend ValidatedStream validate_stream(std::vector<CaseRecord>, LinkPolicy);

    std::vector<CaseRecord> records_;
    std::vector<Diagnostic> diagnostics_;
    std::unordered_map<std::string, std::size_t> index_;
};

ValidatedStream validate_stream(std::vector<CaseRecord> records,
                                LinkPolicy policy = LinkPolicy::warn_drop_edge);
ValidatedStream validate_stream(const ValidatedStream& stream,
                                LinkPolicy policy = LinkPolicy::warn_drop_edge);

/// Pulls records one line at a time. In lenient mode bad lines and
/// repeated case ids become diagnostics and are skipped; in strict mode
/// they throw.
class RecordReader {
public:
    RecordReader(std::istream& in, RecordFormat format, bool strict = false);

    std::optional<CaseRecord> next();

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
    std::size_t line_number() const noexcept { return line_no_; }

private:
    std::istream& in_;
    RecordFormat format_;
    bool strict_;
    std::size_t line_no_ = 0;
    std::vector<Diagnostic> diagnostics_;
    std::unordered_set<std::string> seen_;
};

/// Drains a reader.
std::vector<CaseRecord> read_all(RecordReader& reader);

}  // namespace contactnet
