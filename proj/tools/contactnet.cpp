// contactnet command-line tool: analyze, stream, simulate, plot.
//
// Exit codes:
//   0   success
//   2   unreadable input, I/O failure, or a strict-mode rejection
//   64  invalid flags or simulator config
//   65  nothing to plot (empty degree distribution)

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "contactnet/engine.hpp"
#include "contactnet/report_json.hpp"
#include "contactnet/sim.hpp"
#include "contactnet/svg_plot.hpp"

namespace cn = contactnet;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUsage = 64;
constexpr int kExitEmpty = 65;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyPlot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything the user asked for, echoed into every report.
struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string format;
    std::string window = "all";
    std::string origin;
    std::string families = "exp,norm,pois,pl";
    std::string rule = "min-se";
    bool include_isolated = false;
    bool strict = false;
    std::optional<std::uint64_t> seed;
    bool log_log = false;
    std::string title;
    std::optional<std::size_t> window_index;
};

struct ParsedWindow {
    bool all = true;
    cn::WindowSpec spec;
};

ParsedWindow parse_window(const RunConfig& rc) {
    ParsedWindow w;
    if (rc.window != "all") {
        auto colon = rc.window.find(':');
        if (colon == std::string::npos) throw UsageError("--window must be all, tumbling:<dur> or cumulative:<dur>");
        const auto mode = rc.window.substr(0, colon);
        if (mode == "tumbling") w.spec.mode = cn::WindowMode::tumbling;
        else if (mode == "cumulative") w.spec.mode = cn::WindowMode::cumulative;
        else throw UsageError("unknown window mode '" + mode + "'");
        try {
            w.spec.period = cn::parse_duration(rc.window.substr(colon + 1));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (w.spec.period <= cn::Duration::zero()) throw UsageError("window period must be positive");
        w.all = false;
    }
    if (!rc.origin.empty()) {
        auto t = cn::parse_timestamp(rc.origin);
        if (!t) throw UsageError("invalid --origin '" + rc.origin + "'");
        w.spec.origin = *t;
    }
    return w;
}

cn::EngineConfig parse_engine_config(const RunConfig& rc) {
    cn::EngineConfig cfg;
    cfg.families.clear();
    try {
        std::stringstream ss(rc.families);
        for (std::string item; std::getline(ss, item, ',');) {
            if (item.empty()) continue;
            cfg.families.push_back(cn::parse_family(item));
        }
        cfg.rule = cn::parse_selection_rule(rc.rule);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (cfg.families.empty()) throw UsageError("--families must name at least one family");
    std::sort(cfg.families.begin(), cfg.families.end());
    cfg.families.erase(std::unique(cfg.families.begin(), cfg.families.end()), cfg.families.end());
    cfg.include_isolated = rc.include_isolated;
    return cfg;
}

cn::RecordFormat record_format(const RunConfig& rc) {
    if (!rc.format.empty()) {
        try {
            return cn::parse_record_format(rc.format);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return std::filesystem::path(rc.input).extension() == ".jsonl" ? cn::RecordFormat::jsonl : cn::RecordFormat::csv;
}

ordered_json run_config_json(const RunConfig& rc, const cn::EngineConfig* engine) {
    ordered_json j;
    j["command"] = rc.command;
    j["input"] = rc.input;
    j["output"] = rc.output.empty() ? ordered_json(nullptr) : ordered_json(rc.output);
    if (rc.command == "analyze" || rc.command == "stream") {
        j["format"] = std::string(cn::to_string(record_format(rc)));
        j["window"] = rc.window;
        j["origin"] = rc.origin.empty() ? ordered_json(nullptr) : ordered_json(rc.origin);
        auto fams = ordered_json::array();
        if (engine)
            for (auto f : engine->families) fams.push_back(std::string(cn::to_string(f)));
        j["families"] = fams;
        j["rule"] = rc.rule;
        j["include_isolated"] = rc.include_isolated;
        j["strict"] = rc.strict;
    }
    if (rc.seed) j["seed"] = *rc.seed;
    return j;
}

ordered_json diagnostics_json(const std::vector<cn::Diagnostic>& diags) {
    auto arr = ordered_json::array();
    for (const auto& d : diags) {
        ordered_json j;
        j["line"] = d.line == 0 ? ordered_json(nullptr) : ordered_json(d.line);
        j["case_id"] = d.case_id;
        j["message"] = d.message;
        arr.push_back(std::move(j));
    }
    return arr;
}

// Opens --input ("-" or empty is stdin).
class Input {
public:
    explicit Input(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*file_) throw InputError("cannot open input '" + path + "'");
    }
    std::istream& stream() { return file_ ? *file_ : std::cin; }

private:
    std::unique_ptr<std::ifstream> file_;
};

// Buffers file output until commit() so a failed run leaves no partial file.
class Output {
public:
    explicit Output(std::string path) : path_(std::move(path)) {}
    std::ostream& stream() { return path_.empty() ? std::cout : buffer_; }
    void line(const std::string& text) {
        stream() << text << '\n';
        if (path_.empty()) std::cout.flush();
    }
    void commit() {
        if (path_.empty()) return;
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << buffer_.str();
        if (!out) throw InputError("cannot write output '" + path_ + "'");
    }

private:
    std::string path_;
    std::ostringstream buffer_;
};

ordered_json report_line(const cn::StructureReport& r, std::size_t index) {
    ordered_json j;
    j["type"] = "report";
    j["index"] = index;
    const auto body = cn::to_json(r);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j;
}

ordered_json summary_line(const RunConfig& rc, const cn::EngineConfig& cfg, const std::vector<cn::StructureReport>& reports,
                          const std::vector<cn::Diagnostic>& diags) {
    ordered_json j;
    j["type"] = "summary";
    j["run_config"] = run_config_json(rc, &cfg);
    j["n_windows"] = reports.size();
    j["trend"] = reports.empty() ? ordered_json(nullptr) : cn::to_json(cn::classify_trend(reports));
    j["diagnostics"] = diagnostics_json(diags);
    return j;
}

int cmd_analyze(const RunConfig& rc) {
    const auto window = parse_window(rc);
    const auto cfg = parse_engine_config(rc);
    const auto format = record_format(rc);

    Input input(rc.input);
    cn::RecordReader reader(input.stream(), format, rc.strict);
    auto records = cn::read_all(reader);
    std::vector<cn::Diagnostic> diags = reader.diagnostics();
    auto stream =
        cn::validate_stream(std::move(records), rc.strict ? cn::LinkPolicy::reject : cn::LinkPolicy::warn_drop_edge);
    diags.insert(diags.end(), stream.diagnostics().begin(), stream.diagnostics().end());

    Output out(rc.output);
    if (window.all) {
        ordered_json doc;
        doc["run_config"] = run_config_json(rc, &cfg);
        if (auto extent = cn::stream_extent(stream)) {
            doc["report"] = cn::to_json(cn::analyze_window(stream, *extent, cfg));
        } else {
            doc["report"] = nullptr;
        }
        doc["diagnostics"] = diagnostics_json(diags);
        out.line(doc.dump(2));
    } else {
        auto reports = cn::analyze_batch(stream, window.spec, cfg);
        for (std::size_t k = 0; k < reports.size(); ++k) out.line(report_line(reports[k], k).dump());
        out.line(summary_line(rc, cfg, reports, diags).dump());
    }
    out.commit();
    return kExitOk;
}

int cmd_stream(const RunConfig& rc) {
    const auto window = parse_window(rc);
    if (window.all) throw UsageError("stream needs --window tumbling:<dur> or cumulative:<dur>");
    const auto cfg = parse_engine_config(rc);

    Input input(rc.input);
    cn::RecordReader reader(input.stream(), record_format(rc), rc.strict);
    Output out(rc.output);
    std::vector<cn::StructureReport> reports;
    std::vector<cn::Diagnostic> diags;
    cn::run(
        reader, window.spec, cfg,
        [&](const cn::StructureReport& r) {
            out.line(report_line(r, reports.size()).dump());
            reports.push_back(r);
        },
        &diags);
    out.line(summary_line(rc, cfg, reports, diags).dump());
    out.commit();
    return kExitOk;
}

int cmd_simulate(const RunConfig& rc) {
    if (rc.input.empty()) throw UsageError("simulate needs --config");
    if (!std::ifstream(rc.input)) throw InputError("cannot open config '" + rc.input + "'");
    cn::sim::SimConfig cfg;
    try {
        cfg = cn::sim::load_sim_config(rc.input);
        if (rc.seed) cfg.seed = *rc.seed;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid simulator config: ") + e.what());
    }
    RunConfig by_output = rc;
    by_output.input = rc.output;
    const auto format = record_format(by_output);
    auto records = cn::sim::simulate_outbreak(cn::sim::generate_network(cfg), cfg);

    Output out(rc.output);
    if (format == cn::RecordFormat::csv) out.stream() << cn::csv_header() << '\n';
    for (const auto& r : records) out.stream() << cn::format_record(r, format) << '\n';
    out.commit();
    return kExitOk;
}

// Accepts an analyze document, a report JSONL (picks --index or the last
// classified window), a bare report object, or a record file (analyzed as
// one all-time window).
cn::StructureReport load_plot_report(const RunConfig& rc) {
    Input input(rc.input);
    std::stringstream buf;
    buf << input.stream().rdbuf();
    const std::string text = buf.str();

    std::vector<nlohmann::json> docs;
    try {
        auto whole = nlohmann::json::parse(text);
        docs.push_back(std::move(whole));
    } catch (const nlohmann::json::exception&) {
        std::istringstream lines(text);
        for (std::string line; std::getline(lines, line);) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                docs.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::exception&) {
                docs.clear();
                break;
            }
        }
    }

    std::vector<nlohmann::json> reports;
    for (const auto& d : docs) {
        if (!d.is_object()) continue;
        if (d.contains("report")) {
            if (d["report"].is_null()) throw EmptyPlot("report is empty");
            reports.push_back(d["report"]);
        } else if (d.value("type", "") == "report" || (d.contains("window") && d.contains("degree_counts"))) {
            reports.push_back(d);
        }
    }
    if (!reports.empty()) {
        try {
            if (rc.window_index) {
                if (*rc.window_index >= reports.size()) throw UsageError("--index beyond the report count");
                return cn::report_from_json(reports[*rc.window_index]);
            }
            return cn::report_from_json(reports.back());
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed report: ") + e.what());
        }
    }

    // Fall back to records.
    std::istringstream in(text);
    cn::RecordReader reader(in, record_format(rc), rc.strict);
    auto stream = cn::validate_stream(cn::read_all(reader));
    auto extent = cn::stream_extent(stream);
    if (!extent) throw EmptyPlot("no records to plot");
    return cn::analyze_window(stream, *extent, parse_engine_config(rc));
}

int cmd_plot(const RunConfig& rc) {
    auto report = load_plot_report(rc);
    if (report.degree_counts.empty()) throw EmptyPlot("empty degree distribution");
    cn::PlotOptions opt;
    opt.log_log = rc.log_log;
    if (!rc.title.empty()) opt.title = rc.title;
    Output out(rc.output);
    out.stream() << cn::render_report_plot(report, opt);
    out.commit();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact-network structure recognition"};
    app.require_subcommand(1);
    RunConfig rc;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output,-o", rc.output, "Output path (stdout when omitted)");
        sub->add_option("--format", rc.format, "Record format: csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    };
    auto add_analysis = [&](CLI::App* sub) {
        sub->add_option("--input,-i", rc.input, "Record file (- for stdin)");
        sub->add_option("--window", rc.window, "all | tumbling:<dur> | cumulative:<dur>");
        sub->add_option("--origin", rc.origin, "Window origin instant (default: first record)");
        sub->add_option("--families", rc.families, "Comma list from exp,norm,pois,pl");
        sub->add_option("--rule", rc.rule, "Selection rule")->check(CLI::IsMember({"min-se", "aic", "max-loglik"}));
        sub->add_flag("--include-isolated", rc.include_isolated, "Keep zero-degree vertices in the fitting sample");
        sub->add_flag("--strict", rc.strict, "Fail on the first bad record or link");
        sub->add_option("--seed", rc.seed, "Recorded in the run config");
        add_common(sub);
    };

    auto* analyze = app.add_subcommand("analyze", "Fit degree distributions per window (batch)");
    add_analysis(analyze);
    analyze->get_option("--input")->required();

    auto* stream = app.add_subcommand("stream", "Run the streaming engine, emitting reports as windows close");
    add_analysis(stream);
    stream->get_option("--window")->default_str("tumbling:1d");

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic outbreak record file");
    simulate->add_option("--config,--input,-c", rc.input, "Simulator JSON config")->required();
    simulate->add_option("--seed", rc.seed, "Override the config seed");
    add_common(simulate);

    auto* plot = app.add_subcommand("plot", "Render a report (or record file) as an SVG degree plot");
    plot->add_option("--input,-i", rc.input, "Report JSON/JSONL or record file")->required();
    plot->add_option("--index", rc.window_index, "Window index within a JSONL report stream");
    plot->add_flag("--log-log", rc.log_log, "Log-log axes");
    plot->add_option("--title", rc.title, "Plot title");
    plot->add_option("--families", rc.families, "Families when plotting straight from records");
    plot->add_option("--rule", rc.rule, "Selection rule when plotting straight from records");
    plot->add_flag("--include-isolated", rc.include_isolated, "Keep zero-degree vertices");
    plot->add_flag("--strict", rc.strict, "Fail on bad records");
    add_common(plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (analyze->parsed()) {
            rc.command = "analyze";
            return cmd_analyze(rc);
        }
        if (stream->parsed()) {
            rc.command = "stream";
            if (stream->get_option("--window")->count() == 0) rc.window = "tumbling:1d";
            return cmd_stream(rc);
        }
        if (simulate->parsed()) {
            rc.command = "simulate";
            return cmd_simulate(rc);
        }
        rc.command = "plot";
        return cmd_plot(rc);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EmptyPlot& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEmpty;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const cn::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const cn::StreamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const cn::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
