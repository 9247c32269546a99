#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contactnet/records.hpp"

namespace contactnet::sim {

enum class Topology { preferential_attachment, uniform_attachment };

std::string_view to_string(Topology t) noexcept;
Topology parse_topology(std::string_view name);

struct IndexCase {
    GeoPoint centroid;
    Timestamp start{};
    std::string region;  // informational; empty when given by coordinates

    friend bool operator==(const IndexCase&, const IndexCase&) = default;
};

struct SimConfig {
    Topology topology = Topology::preferential_attachment;
    std::size_t n_population = 1000;
    /// Edges each newcomer attaches with; 1 gives a tree.
    std::size_t attach_edges = 1;
    double p_transmit = 0.1;
    std::size_t n_steps = 100;
    std::vector<IndexCase> index_cases;
    double jitter_km = 5.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on a broken invariant.
    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Named region centroids, e.g. {"Gueckedou": {lon, lat}}.
using RegionTable = std::map<std::string, GeoPoint, std::less<>>;

RegionTable load_regions(const std::filesystem::path& path);
RegionTable parse_regions(std::string_view json_text);

/// Reads a simulator config document. Index cases are given either as
/// {"region": name, "start": date} (resolved against `regions`, the
/// document's own "regions" object, or a "regions_file" path relative to
/// `base_dir`) or as {"longitude", "latitude", "start"}.
SimConfig parse_sim_config(std::string_view json_text, const RegionTable& regions = {},
                           const std::filesystem::path& base_dir = {});
SimConfig load_sim_config(const std::filesystem::path& path, const RegionTable& regions = {});
std::string sim_config_to_json(const SimConfig& config);

class SyntheticNetwork {
public:
    SyntheticNetwork(std::size_t n, Topology topology, std::uint64_t seed);

    std::size_t size() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    /// Ascending neighbor ids.
    const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adjacency_.at(v); }
    std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }
    Topology topology() const noexcept { return topology_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Sorted (a < b) edge list.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

    void add_edge(std::uint32_t a, std::uint32_t b);
    bool has_edge(std::uint32_t a, std::uint32_t b) const;

private:
    std::vector<std::vector<std::uint32_t>> adjacency_;
    std::size_t edge_count_ = 0;
    Topology topology_;
    std::uint64_t seed_;
};

/// Growth model: node t joins by attaching `attach_edges` distinct links to
/// existing nodes, chosen proportionally to degree (preferential) or
/// uniformly. Deterministic for a given config.
SyntheticNetwork generate_network(const SimConfig& config);

/// Discrete-time SI outbreak. One step is one day. Each step every
/// individual infected in an earlier step tries each susceptible neighbor
/// with probability p_transmit; infectors act in id order. Records come out
/// sorted by timestamp.
std::vector<CaseRecord> simulate_outbreak(const SyntheticNetwork& network, const SimConfig& config);

/// Random stream for replication `replication` of a run seeded by `seed`.
std::mt19937_64 replication_engine(std::uint64_t seed, std::uint64_t replication);

/// Mean final outbreak fraction for each p, averaged over `replications`
/// runs on fresh networks. Every other setting comes from `base`.
std::vector<double> final_size_curve(const SimConfig& base, std::span<const double> p_grid, std::size_t replications);

/// Per-replication final fractions for one p (what final_size_curve averages).
std::vector<double> final_sizes(const SimConfig& base, double p, std::size_t replications);

}  // namespace contactnet::sim
