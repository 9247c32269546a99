#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "contactnet/records.hpp"

namespace contactnet {

/// Half-open interval [start, end).
struct TimeWindow {
    Timestamp start{};
    Timestamp end{};

    TimeWindow() = default;
    /// Throws std::invalid_argument unless start < end.
    TimeWindow(Timestamp start, Timestamp end);

    bool contains(Timestamp t) const noexcept { return start <= t && t < end; }
    bool contains(const TimeWindow& other) const noexcept {
        return start <= other.start && other.end <= end;
    }
    Duration length() const noexcept { return end - start; }

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Smallest window holding every record of the stream, or nullopt when empty.
std::optional<TimeWindow> stream_extent(const ValidatedStream& stream);

struct Vertex {
    std::string id;
    Timestamp timestamp{};
    GeoPoint location;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Undirected edge; `source` is the infector's vertex index and `target`
/// the infected case, kept so infection trees can be walked.
struct Edge {
    std::size_t source = 0;
    std::size_t target = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class WeightKernel { unit, distance_decay };

struct WeightOptions {
    WeightKernel kernel = WeightKernel::unit;
    double decay_km = 50.0;  // d0 in w = exp(-d / d0)
};

double edge_weight(const GeoPoint& a, const GeoPoint& b, const WeightOptions& options);

/// Snapshot of the contact network. Simple undirected graph: no self-loops,
/// no parallel edges, weights in [0, 1].
class ContactGraph {
public:
    ContactGraph() = default;
    explicit ContactGraph(Timestamp as_of) : as_of_(as_of) {}

    std::size_t add_vertex(Vertex v);
    /// Throws std::invalid_argument on self-loop, parallel edge, bad index
    /// or weight outside [0, 1].
    void add_edge(std::size_t source, std::size_t target, double weight = 1.0);

    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }
    const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_.at(v); }
    std::optional<std::size_t> find(std::string_view id) const;
    bool has_edge(std::size_t a, std::size_t b) const;

    std::size_t component_count() const;

    Timestamp as_of() const noexcept { return as_of_; }
    void set_as_of(Timestamp t) noexcept { as_of_ = t; }

    friend bool operator==(const ContactGraph& a, const ContactGraph& b) {
        return a.as_of_ == b.as_of_ && a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
    }

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::unordered_map<std::string, std::size_t> index_;
    Timestamp as_of_{};
};

/// One vertex per record in the window, one edge per source link whose
/// both endpoints are in the window. Without a window every record is used.
ContactGraph build_graph(const ValidatedStream& stream, std::optional<TimeWindow> window = std::nullopt,
                         const WeightOptions& weights = {});

ContactGraph subnetwork(const ValidatedStream& stream, const TimeWindow& window,
                        const WeightOptions& weights = {});

/// Restriction of an existing graph to the vertices whose timestamps fall
/// in the window.
ContactGraph subnetwork(const ContactGraph& graph, const TimeWindow& window);

/// Vertex degrees, sorted ascending.
struct DegreeSample {
    std::vector<std::uint64_t> degrees;
    bool include_isolated = false;

    std::size_t size() const noexcept { return degrees.size(); }
    bool empty() const noexcept { return degrees.empty(); }

    friend bool operator==(const DegreeSample&, const DegreeSample&) = default;
};

DegreeSample degree_sample(const ContactGraph& graph, bool include_isolated = false);

/// Builds a sample from raw degrees (sorted on the way in).
DegreeSample make_degree_sample(std::vector<std::uint64_t> degrees, bool include_isolated = true);

/// Empirical PMF; throws std::invalid_argument on an empty sample.
std::map<std::uint64_t, double> degree_distribution(const DegreeSample& sample);

/// Degree -> occurrence count.
std::map<std::uint64_t, std::size_t> degree_counts(const DegreeSample& sample);

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance on a sphere of radius 6371 km (haversine).
double geo_distance(const GeoPoint& a, const GeoPoint& b);

/// `id<TAB>id<TAB>weight` per edge.
void write_edge_list(std::ostream& os, const ContactGraph& graph);
/// `id<TAB>lon<TAB>lat<TAB>timestamp` per vertex.
void write_vertex_table(std::ostream& os, const ContactGraph& graph);

}  // namespace contactnet
