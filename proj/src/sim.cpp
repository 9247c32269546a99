#include "contactnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "contactnet/graph.hpp"

namespace contactnet::sim {

namespace {

using json = nlohmann::json;

constexpr std::uint32_t kNetworkStream = 0x6e6574;  // "net"
constexpr std::uint32_t kOutbreakStream = 0x6f7574;  // "out"
constexpr double kKmPerDegree = 2.0 * std::numbers::pi * kEarthRadiusKm / 360.0;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

GeoPoint jitter(const GeoPoint& origin, double scale_km, std::mt19937_64& rng) {
    if (scale_km <= 0.0) return origin;
    std::normal_distribution<double> step(0.0, scale_km);
    const double east_km = step(rng);
    const double north_km = step(rng);
    GeoPoint p;
    p.latitude = std::clamp(origin.latitude + north_km / kKmPerDegree, -90.0, 90.0);
    const double cos_lat = std::max(std::cos(origin.latitude * std::numbers::pi / 180.0), 1e-6);
    double lon = origin.longitude + east_km / (kKmPerDegree * cos_lat);
    lon = std::remainder(lon, 360.0);
    p.longitude = std::clamp(lon, -180.0, 180.0);
    return p;
}

GeoPoint point_from_json(const json& j, std::string_view what) {
    if (!j.is_object() || !j.contains("longitude") || !j.contains("latitude"))
        throw std::invalid_argument(std::string(what) + ": expected {longitude, latitude}");
    GeoPoint p{j.at("longitude").get<double>(), j.at("latitude").get<double>()};
    if (!p.valid()) throw std::invalid_argument(std::string(what) + ": coordinates out of range");
    return p;
}

RegionTable regions_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("regions: expected an object");
    RegionTable out;
    for (const auto& [name, value] : j.items()) out.emplace(name, point_from_json(value, "region '" + name + "'"));
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::string_view to_string(Topology t) noexcept {
    return t == Topology::preferential_attachment ? "preferential-attachment" : "uniform-attachment";
}

Topology parse_topology(std::string_view name) {
    if (name == "preferential-attachment" || name == "preferential_attachment" || name == "pa")
        return Topology::preferential_attachment;
    if (name == "uniform-attachment" || name == "uniform_attachment" || name == "ua")
        return Topology::uniform_attachment;
    throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

void SimConfig::validate() const {
    if (n_population == 0) throw std::invalid_argument("n_population must be at least 1");
    if (n_population > 0xffffffffULL) throw std::invalid_argument("n_population too large");
    if (attach_edges == 0) throw std::invalid_argument("attach_edges must be at least 1");
    if (!(p_transmit >= 0.0 && p_transmit <= 1.0)) throw std::invalid_argument("p_transmit must lie in [0, 1]");
    if (!(jitter_km >= 0.0)) throw std::invalid_argument("jitter_km must be non-negative");
    if (index_cases.size() > n_population) throw std::invalid_argument("more index cases than individuals");
    for (const auto& ic : index_cases)
        if (!ic.centroid.valid()) throw std::invalid_argument("index case centroid out of range");
}

RegionTable parse_regions(std::string_view json_text) {
    try {
        return regions_from_json(json::parse(json_text));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("regions: ") + e.what());
    }
}

RegionTable load_regions(const std::filesystem::path& path) { return parse_regions(read_file(path)); }

SimConfig parse_sim_config(std::string_view json_text, const RegionTable& regions,
                           const std::filesystem::path& base_dir) {
    SimConfig cfg;
    try {
        const json doc = json::parse(json_text);
        if (!doc.is_object()) throw std::invalid_argument("sim config: expected a JSON object");
        static const char* const kKeys[] = {"topology", "n_population", "attach_edges", "p_transmit", "n_steps",
                                            "index_cases", "jitter_km", "seed", "regions", "regions_file"};
        for (const auto& [key, value] : doc.items()) {
            if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
                throw std::invalid_argument("sim config: unknown key '" + key + "'");
        }

        RegionTable table = regions;
        if (doc.contains("regions_file")) {
            auto extra = load_regions(base_dir / doc.at("regions_file").get<std::string>());
            table.insert(extra.begin(), extra.end());
        }
        if (doc.contains("regions")) {
            auto extra = regions_from_json(doc.at("regions"));
            for (auto& [k, v] : extra) table.insert_or_assign(k, v);
        }

        if (doc.contains("topology")) cfg.topology = parse_topology(doc.at("topology").get<std::string>());
        if (doc.contains("n_population")) cfg.n_population = doc.at("n_population").get<std::size_t>();
        if (doc.contains("attach_edges")) cfg.attach_edges = doc.at("attach_edges").get<std::size_t>();
        if (doc.contains("p_transmit")) cfg.p_transmit = doc.at("p_transmit").get<double>();
        if (doc.contains("n_steps")) cfg.n_steps = doc.at("n_steps").get<std::size_t>();
        if (doc.contains("jitter_km")) cfg.jitter_km = doc.at("jitter_km").get<double>();
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();

        if (doc.contains("index_cases")) {
            for (const auto& ic : doc.at("index_cases")) {
                IndexCase c;
                auto start = parse_timestamp(ic.at("start").get<std::string>());
                if (!start) throw std::invalid_argument("index case: invalid start date");
                c.start = *start;
                if (ic.contains("region")) {
                    c.region = ic.at("region").get<std::string>();
                    auto it = table.find(c.region);
                    if (it == table.end()) throw std::invalid_argument("index case: unknown region '" + c.region + "'");
                    c.centroid = it->second;
                } else {
                    c.centroid = point_from_json(ic, "index case");
                }
                cfg.index_cases.push_back(std::move(c));
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("sim config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path, const RegionTable& regions) {
    return parse_sim_config(read_file(path), regions, path.parent_path());
}

std::string sim_config_to_json(const SimConfig& cfg) {
    nlohmann::ordered_json j;
    j["topology"] = std::string(to_string(cfg.topology));
    j["n_population"] = cfg.n_population;
    j["attach_edges"] = cfg.attach_edges;
    j["p_transmit"] = cfg.p_transmit;
    j["n_steps"] = cfg.n_steps;
    j["jitter_km"] = cfg.jitter_km;
    j["seed"] = cfg.seed;
    auto cases = nlohmann::ordered_json::array();
    for (const auto& ic : cfg.index_cases) {
        nlohmann::ordered_json c;
        if (!ic.region.empty()) c["region"] = ic.region;
        c["longitude"] = ic.centroid.longitude;
        c["latitude"] = ic.centroid.latitude;
        c["start"] = format_timestamp(ic.start);
        cases.push_back(std::move(c));
    }
    j["index_cases"] = std::move(cases);
    return j.dump();
}

SyntheticNetwork::SyntheticNetwork(std::size_t n, Topology topology, std::uint64_t seed)
    : adjacency_(n), topology_(topology), seed_(seed) {}

void SyntheticNetwork::add_edge(std::uint32_t a, std::uint32_t b) {
    if (a == b) throw std::invalid_argument("self-loop");
    if (has_edge(a, b)) throw std::invalid_argument("parallel edge");
    auto insert_sorted = [](std::vector<std::uint32_t>& adj, std::uint32_t v) {
        adj.insert(std::lower_bound(adj.begin(), adj.end(), v), v);
    };
    insert_sorted(adjacency_.at(a), b);
    insert_sorted(adjacency_.at(b), a);
    ++edge_count_;
}

bool SyntheticNetwork::has_edge(std::uint32_t a, std::uint32_t b) const {
    const auto& adj = adjacency_.at(a);
    return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> SyntheticNetwork::edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(edge_count_);
    for (std::uint32_t a = 0; a < adjacency_.size(); ++a)
        for (auto b : adjacency_[a])
            if (a < b) out.emplace_back(a, b);
    std::sort(out.begin(), out.end());
    return out;
}

SyntheticNetwork generate_network(const SimConfig& config) {
    config.validate();
    SyntheticNetwork net(config.n_population, config.topology, config.seed);
    auto rng = make_engine(config.seed, kNetworkStream);
    // Every edge contributes both endpoints, so a uniform draw from this list
    // picks a node with probability proportional to its degree.
    std::vector<std::uint32_t> endpoints;
    std::vector<std::uint32_t> targets;

    for (std::uint32_t t = 1; t < config.n_population; ++t) {
        const std::size_t k = std::min<std::size_t>(config.attach_edges, t);
        targets.clear();
        while (targets.size() < k) {
            std::uint32_t pick;
            if (config.topology == Topology::preferential_attachment && !endpoints.empty()) {
                std::uniform_int_distribution<std::size_t> d(0, endpoints.size() - 1);
                pick = endpoints[d(rng)];
            } else {
                std::uniform_int_distribution<std::uint32_t> d(0, t - 1);
                pick = d(rng);
            }
            if (std::find(targets.begin(), targets.end(), pick) == targets.end()) targets.push_back(pick);
        }
        for (auto target : targets) {
            net.add_edge(t, target);
            endpoints.push_back(t);
            endpoints.push_back(target);
        }
    }
    return net;
}

std::vector<CaseRecord> simulate_outbreak(const SyntheticNetwork& network, const SimConfig& config) {
    config.validate();
    if (network.size() != config.n_population)
        throw std::invalid_argument("network size does not match n_population");
    std::vector<CaseRecord> records;
    if (config.index_cases.empty()) return records;

    auto rng = make_engine(config.seed, kOutbreakStream);
    const std::size_t n = network.size();

    // Distinct index individuals, drawn in index-case order.
    std::vector<std::uint32_t> index_individuals;
    for (std::size_t i = 0; i < config.index_cases.size(); ++i) {
        std::uniform_int_distribution<std::uint32_t> d(0, static_cast<std::uint32_t>(n - 1));
        std::uint32_t pick;
        do pick = d(rng);
        while (std::find(index_individuals.begin(), index_individuals.end(), pick) != index_individuals.end());
        index_individuals.push_back(pick);
    }

    Timestamp t0 = config.index_cases.front().start;
    for (const auto& ic : config.index_cases) t0 = std::min(t0, ic.start);
    const Duration day{86400};
    std::vector<std::size_t> index_step(config.index_cases.size());
    std::size_t last_index_step = 0;
    for (std::size_t i = 0; i < config.index_cases.size(); ++i) {
        index_step[i] = static_cast<std::size_t>((config.index_cases[i].start - t0) / day);
        last_index_step = std::max(last_index_step, index_step[i]);
    }

    constexpr std::size_t kSusceptible = static_cast<std::size_t>(-1);
    std::vector<std::size_t> infected_at(n, kSusceptible);
    std::vector<GeoPoint> location(n);
    std::vector<std::uint32_t> infected;  // ascending ids of everyone infected before the current step
    std::bernoulli_distribution transmit(config.p_transmit);
    auto case_id = [](std::uint32_t v) { return "C" + std::to_string(v); };

    const std::size_t horizon = std::max(config.n_steps, last_index_step);
    for (std::size_t step = 0; step <= horizon; ++step) {
        std::vector<std::uint32_t> fresh;
        for (std::size_t i = 0; i < config.index_cases.size(); ++i) {
            const auto v = index_individuals[i];
            if (index_step[i] != step || infected_at[v] != kSusceptible) continue;
            infected_at[v] = step;
            location[v] = config.index_cases[i].centroid;
            records.push_back({case_id(v), std::nullopt, config.index_cases[i].start, location[v]});
            fresh.push_back(v);
        }
        if (step >= 1 && step <= config.n_steps && config.p_transmit > 0.0) {
            const Timestamp when = t0 + day * static_cast<Duration::rep>(step);
            for (auto infector : infected) {
                for (auto nb : network.neighbors(infector)) {
                    if (infected_at[nb] != kSusceptible) continue;
                    if (!transmit(rng)) continue;
                    infected_at[nb] = step;
                    location[nb] = jitter(location[infector], config.jitter_km, rng);
                    records.push_back({case_id(nb), case_id(infector), when, location[nb]});
                    fresh.push_back(nb);
                }
            }
        }
        infected.insert(infected.end(), fresh.begin(), fresh.end());
        std::sort(infected.begin(), infected.end());
        if (infected.size() == n && step >= last_index_step) break;
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const CaseRecord& a, const CaseRecord& b) { return a.timestamp < b.timestamp; });
    return records;
}

std::mt19937_64 replication_engine(std::uint64_t seed, std::uint64_t replication) {
    return make_engine(seed, replication);
}

std::vector<double> final_sizes(const SimConfig& base, double p, std::size_t replications) {
    std::vector<double> out;
    out.reserve(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        SimConfig cfg = base;
        cfg.p_transmit = p;
        cfg.seed = replication_engine(base.seed, r)();
        auto network = generate_network(cfg);
        auto records = simulate_outbreak(network, cfg);
        out.push_back(static_cast<double>(records.size()) / static_cast<double>(cfg.n_population));
    }
    return out;
}

std::vector<double> final_size_curve(const SimConfig& base, std::span<const double> p_grid, std::size_t replications) {
    std::vector<double> means;
    means.reserve(p_grid.size());
    for (double p : p_grid) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p_grid values must lie in [0, 1]");
        auto sizes = final_sizes(base, p, replications);
        double sum = 0.0;
        for (double s : sizes) sum += s;
        means.push_back(replications ? sum / static_cast<double>(replications) : 0.0);
    }
    return means;
}

}  // namespace contactnet::sim
