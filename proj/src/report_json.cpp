#include "contactnet/report_json.hpp"

#include <cmath>
#include <stdexcept>

namespace contactnet {

namespace {

ordered_json family_or_null(const std::optional<Family>& f) {
    return f ? ordered_json(std::string(to_string(*f))) : ordered_json(nullptr);
}

Timestamp timestamp_from_json(const nlohmann::json& j) {
    auto ts = parse_timestamp(j.get<std::string>());
    if (!ts) throw std::invalid_argument("invalid timestamp in report");
    return *ts;
}

}  // namespace

ordered_json to_json(const FitResult& fit) {
    ordered_json j;
    j["family"] = std::string(to_string(fit.family()));
    ordered_json params = ordered_json::object();
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                params["lambda"] = d.rate;
            } else if constexpr (std::is_same_v<T, Normal>) {
                params["mu"] = d.mean;
                params["sigma"] = d.sd;
            } else if constexpr (std::is_same_v<T, Poisson>) {
                params["lambda"] = d.lambda;
            } else {
                params["x_min"] = d.x_min;
                params["alpha"] = d.alpha;
            }
        },
        fit.distribution);
    j["params"] = std::move(params);
    ordered_json se = ordered_json::object();
    auto names = fit.parameter_names();
    for (std::size_t i = 0; i < names.size() && i < fit.se.size(); ++i) se[names[i]] = fit.se[i];
    j["se"] = std::move(se);
    j["vcov"] = {{"dims", {fit.vcov.dim, fit.vcov.dim}}, {"data", fit.vcov.data}};
    if (std::isfinite(fit.log_likelihood)) j["loglik"] = fit.log_likelihood;
    else j["loglik"] = nullptr;
    j["n"] = fit.n;
    if (fit.family() == Family::power_law) {
        j["x_min_estimated"] = fit.x_min_estimated;
        j["ks_distance"] = fit.ks_distance ? ordered_json(*fit.ks_distance) : ordered_json(nullptr);
    }
    return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
    FitResult fit;
    const Family family = parse_family(j.at("family").get<std::string>());
    const auto& p = j.at("params");
    switch (family) {
        case Family::exponential: fit.distribution = Exponential{p.at("lambda").get<double>()}; break;
        case Family::normal: fit.distribution = Normal{p.at("mu").get<double>(), p.at("sigma").get<double>()}; break;
        case Family::poisson: fit.distribution = Poisson{p.at("lambda").get<double>()}; break;
        case Family::power_law:
            fit.distribution = PowerLaw{p.at("x_min").get<std::uint64_t>(), p.at("alpha").get<double>()};
            break;
    }
    for (const auto& name : fit.parameter_names()) {
        const auto& v = j.at("se").at(name);
        fit.se.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    const auto& vc = j.at("vcov");
    fit.vcov.dim = vc.at("dims").at(0).get<std::size_t>();
    fit.vcov.data = vc.at("data").get<std::vector<double>>();
    if (fit.vcov.data.size() != fit.vcov.dim * fit.vcov.dim) throw std::invalid_argument("vcov dims mismatch");
    const auto& ll = j.at("loglik");
    fit.log_likelihood = ll.is_null() ? std::numeric_limits<double>::quiet_NaN() : ll.get<double>();
    fit.n = j.at("n").get<std::size_t>();
    if (j.contains("x_min_estimated")) fit.x_min_estimated = j.at("x_min_estimated").get<bool>();
    if (j.contains("ks_distance") && !j.at("ks_distance").is_null())
        fit.ks_distance = j.at("ks_distance").get<double>();
    return fit;
}

ordered_json to_json(const TimeWindow& window) {
    return {{"start", format_timestamp(window.start)}, {"end", format_timestamp(window.end)}};
}

ordered_json to_json(const StructureReport& report) {
    ordered_json j;
    j["window"] = to_json(report.window);
    j["n_vertices"] = report.n_vertices;
    j["n_edges"] = report.n_edges;
    j["fitting_n"] = report.fitting_n;
    j["mean_degree"] = report.mean_degree;
    if (report.classification) {
        ordered_json fits = ordered_json::array();
        for (const auto& f : report.classification->all_fits) fits.push_back(to_json(f));
        j["classification"] = {{"chosen", std::string(to_string(report.classification->chosen))},
                               {"rule", std::string(to_string(report.classification->rule))},
                               {"fits", std::move(fits)}};
    } else {
        j["classification"] = nullptr;
    }
    ordered_json skipped = ordered_json::array();
    for (const auto& s : report.skipped)
        skipped.push_back({{"family", std::string(to_string(s.family))}, {"reason", s.reason}});
    j["skipped"] = std::move(skipped);
    ordered_json counts = ordered_json::array();
    for (const auto& [d, c] : report.degree_counts) counts.push_back({d, c});
    j["degree_counts"] = std::move(counts);
    return j;
}

StructureReport report_from_json(const nlohmann::json& j) {
    StructureReport r;
    r.window = TimeWindow(timestamp_from_json(j.at("window").at("start")), timestamp_from_json(j.at("window").at("end")));
    r.n_vertices = j.at("n_vertices").get<std::size_t>();
    r.n_edges = j.at("n_edges").get<std::size_t>();
    r.fitting_n = j.at("fitting_n").get<std::size_t>();
    r.mean_degree = j.at("mean_degree").get<double>();
    if (const auto& c = j.at("classification"); !c.is_null()) {
        StructureClass sc;
        sc.chosen = parse_family(c.at("chosen").get<std::string>());
        sc.rule = parse_selection_rule(c.at("rule").get<std::string>());
        for (const auto& f : c.at("fits")) sc.all_fits.push_back(fit_from_json(f));
        r.classification = std::move(sc);
    }
    for (const auto& s : j.at("skipped"))
        r.skipped.push_back({parse_family(s.at("family").get<std::string>()), s.at("reason").get<std::string>()});
    for (const auto& pair : j.at("degree_counts"))
        r.degree_counts.emplace(pair.at(0).get<std::uint64_t>(), pair.at(1).get<std::size_t>());
    return r;
}

ordered_json to_json(const TrendSummary& summary) {
    ordered_json runs = ordered_json::array();
    for (const auto& run : summary.runs) {
        runs.push_back({{"first_window", run.first_window},
                        {"last_window", run.last_window},
                        {"length", run.last_window - run.first_window + 1},
                        {"family", family_or_null(run.family)}});
    }
    ordered_json transitions = ordered_json::array();
    for (const auto& t : summary.transitions)
        transitions.push_back({{"window", t.window}, {"from", family_or_null(t.from)}, {"to", family_or_null(t.to)}});
    return {{"runs", std::move(runs)}, {"transitions", std::move(transitions)}};
}

}  // namespace contactnet
