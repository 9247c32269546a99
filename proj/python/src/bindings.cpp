// pybind11 surface. Structured results cross the boundary as JSON text and
// are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "contactnet/engine.hpp"
#include "contactnet/hurwitz_zeta.hpp"
#include "contactnet/report_json.hpp"
#include "contactnet/sim.hpp"
#include "contactnet/svg_plot.hpp"

namespace py = pybind11;
namespace cn = contactnet;

namespace {

py::dict record_dict(const cn::CaseRecord& r) {
    py::dict d;
    d["case_id"] = r.case_id;
    d["source_id"] = r.source_id ? py::object(py::str(*r.source_id)) : py::object(py::none());
    d["timestamp"] = cn::format_timestamp(r.timestamp);
    d["longitude"] = r.location.longitude;
    d["latitude"] = r.location.latitude;
    return d;
}

cn::CaseRecord record_from(const py::dict& d) {
    cn::CaseRecord r;
    r.case_id = d["case_id"].cast<std::string>();
    if (d.contains("source_id") && !d["source_id"].is_none()) r.source_id = d["source_id"].cast<std::string>();
    const auto ts = d["timestamp"].cast<std::string>();
    auto parsed = cn::parse_timestamp(ts);
    if (!parsed) throw py::value_error("bad timestamp '" + ts + "'");
    r.timestamp = *parsed;
    r.location = {d["longitude"].cast<double>(), d["latitude"].cast<double>()};
    return r;
}

py::list diagnostics_list(const std::vector<cn::Diagnostic>& diags) {
    py::list out;
    for (const auto& d : diags) {
        py::dict e;
        e["line"] = d.line;
        e["case_id"] = d.case_id;
        e["message"] = d.message;
        out.append(e);
    }
    return out;
}

cn::DegreeSample sample_of(std::vector<std::uint64_t> degrees) { return cn::make_degree_sample(std::move(degrees)); }

std::vector<cn::CaseRecord> read_text(const std::string& text, const std::string& format, bool strict,
                                      std::vector<cn::Diagnostic>& diags) {
    std::istringstream in(text);
    cn::RecordReader reader(in, cn::parse_record_format(format), strict);
    auto records = cn::read_all(reader);
    diags = reader.diagnostics();
    return records;
}

cn::EngineConfig engine_config(const std::vector<std::string>& families, const std::string& rule,
                               bool include_isolated) {
    cn::EngineConfig cfg;
    if (!families.empty()) {
        cfg.families.clear();
        for (const auto& f : families) cfg.families.push_back(cn::parse_family(f));
        std::sort(cfg.families.begin(), cfg.families.end());
        cfg.families.erase(std::unique(cfg.families.begin(), cfg.families.end()), cfg.families.end());
    }
    cfg.rule = cn::parse_selection_rule(rule);
    cfg.include_isolated = include_isolated;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contact-network degree analysis core";

    py::register_exception<cn::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<cn::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<cn::FitError>(m, "FitError", PyExc_ValueError);

    m.def("hurwitz_zeta", &cn::hurwitz_zeta, py::arg("s"), py::arg("a") = 1.0);

    m.def(
        "parse_record",
        [](const std::string& line, const std::string& format) {
            return record_dict(cn::parse_record(line, cn::parse_record_format(format)));
        },
        py::arg("line"), py::arg("format") = "csv");

    m.def(
        "format_record",
        [](const py::dict& d, const std::string& format) {
            return cn::format_record(record_from(d), cn::parse_record_format(format));
        },
        py::arg("record"), py::arg("format") = "csv");

    m.def(
        "read_records",
        [](const std::string& text, const std::string& format, bool strict) {
            std::vector<cn::Diagnostic> diags;
            auto records = read_text(text, format, strict, diags);
            py::list out;
            for (const auto& r : records) out.append(record_dict(r));
            return py::make_tuple(out, diagnostics_list(diags));
        },
        py::arg("text"), py::arg("format") = "csv", py::arg("strict") = false);

    m.def(
        "validate",
        [](const py::list& records, bool strict) {
            std::vector<cn::CaseRecord> rs;
            for (const auto& r : records) rs.push_back(record_from(r.cast<py::dict>()));
            auto vs = cn::validate_stream(std::move(rs), strict ? cn::LinkPolicy::reject : cn::LinkPolicy::warn_drop_edge);
            py::list out;
            for (const auto& r : vs.records()) out.append(record_dict(r));
            return py::make_tuple(out, diagnostics_list(vs.diagnostics()));
        },
        py::arg("records"), py::arg("strict") = false);

    m.def(
        "fit_json",
        [](const std::string& family, std::vector<std::uint64_t> degrees) {
            return cn::to_json(cn::fit(cn::parse_family(family), sample_of(std::move(degrees)))).dump();
        },
        py::arg("family"), py::arg("degrees"));

    m.def(
        "fit_summary_json",
        [](const std::string& family, std::size_t n, double mean, double sd) {
            const auto s = cn::SampleStatistics::from_summary(n, mean, sd);
            switch (cn::parse_family(family)) {
                case cn::Family::exponential: return cn::to_json(cn::fit_exponential(s)).dump();
                case cn::Family::normal: return cn::to_json(cn::fit_normal(s)).dump();
                case cn::Family::poisson: return cn::to_json(cn::fit_poisson(s)).dump();
                default: throw py::value_error("summary fits exist for exponential, normal and poisson only");
            }
        },
        py::arg("family"), py::arg("n"), py::arg("mean"), py::arg("sd"));

    m.def(
        "select_json",
        [](const std::vector<std::string>& fits_json, const std::string& rule) {
            std::vector<cn::FitResult> fits;
            for (const auto& f : fits_json) fits.push_back(cn::fit_from_json(nlohmann::json::parse(f)));
            auto sc = cn::select_structure(std::move(fits), cn::parse_selection_rule(rule));
            return std::string(cn::to_string(sc.chosen));
        },
        py::arg("fits"), py::arg("rule") = "min-se");

    m.def(
        "analyze_json",
        [](const std::string& text, const std::string& format, const std::string& mode, const std::string& period,
           const std::vector<std::string>& families, const std::string& rule, bool include_isolated) {
            std::vector<cn::Diagnostic> diags;
            auto records = read_text(text, format, false, diags);
            auto stream = cn::validate_stream(std::move(records));
            for (const auto& d : stream.diagnostics()) diags.push_back(d);
            const auto cfg = engine_config(families, rule, include_isolated);
            std::vector<std::string> reports;
            if (mode == "all") {
                if (auto extent = cn::stream_extent(stream)) reports.push_back(cn::to_json(cn::analyze_window(stream, *extent, cfg)).dump());
            } else {
                cn::WindowSpec spec;
                if (mode == "tumbling") spec.mode = cn::WindowMode::tumbling;
                else if (mode == "cumulative") spec.mode = cn::WindowMode::cumulative;
                else throw py::value_error("mode must be all, tumbling or cumulative");
                spec.period = cn::parse_duration(period);
                for (const auto& r : cn::analyze_batch(stream, spec, cfg)) reports.push_back(cn::to_json(r).dump());
            }
            return py::make_tuple(reports, diagnostics_list(diags));
        },
        py::arg("text"), py::arg("format") = "csv", py::arg("mode") = "all", py::arg("period") = "1d",
        py::arg("families") = std::vector<std::string>{}, py::arg("rule") = "min-se",
        py::arg("include_isolated") = false);

    m.def(
        "simulate",
        [](const std::string& config_json, const std::string& base_dir, std::optional<std::uint64_t> seed) {
            auto cfg = cn::sim::parse_sim_config(config_json, {}, base_dir);
            if (seed) cfg.seed = *seed;
            cfg.validate();
            const auto records = cn::sim::simulate_outbreak(cn::sim::generate_network(cfg), cfg);
            std::string csv(cn::csv_header());
            csv += '\n';
            for (const auto& r : records) csv += cn::format_record(r, cn::RecordFormat::csv) + '\n';
            return csv;
        },
        py::arg("config_json"), py::arg("base_dir") = "", py::arg("seed") = std::nullopt);

    m.def(
        "final_sizes",
        [](const std::string& config_json, const std::string& base_dir, double p, std::size_t replications) {
            return cn::sim::final_sizes(cn::sim::parse_sim_config(config_json, {}, base_dir), p, replications);
        },
        py::arg("config_json"), py::arg("base_dir") = "", py::arg("p") = 0.1, py::arg("replications") = 10);

    m.def(
        "plot_svg",
        [](const std::string& report_json, bool log_log, const std::string& title) {
            const auto report = cn::report_from_json(nlohmann::json::parse(report_json));
            cn::PlotOptions opt;
            opt.log_log = log_log;
            if (!title.empty()) opt.title = title;
            return cn::render_report_plot(report, opt);
        },
        py::arg("report_json"), py::arg("log_log") = false, py::arg("title") = "");
}
