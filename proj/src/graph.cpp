#include "contactnet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace contactnet {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

TimeWindow::TimeWindow(Timestamp s, Timestamp e) : start(s), end(e) {
    if (!(s < e)) throw std::invalid_argument("time window requires start < end");
}

std::optional<TimeWindow> stream_extent(const ValidatedStream& stream) {
    if (stream.empty()) return std::nullopt;
    const auto& recs = stream.records();
    return TimeWindow(recs.front().timestamp, recs.back().timestamp + Duration{1});
}

double edge_weight(const GeoPoint& a, const GeoPoint& b, const WeightOptions& options) {
    if (options.kernel == WeightKernel::unit) return 1.0;
    if (!(options.decay_km > 0.0)) throw std::invalid_argument("distance decay scale must be positive");
    return std::exp(-geo_distance(a, b) / options.decay_km);
}

std::size_t ContactGraph::add_vertex(Vertex v) {
    std::size_t idx = vertices_.size();
    if (!index_.emplace(v.id, idx).second) throw std::invalid_argument("duplicate vertex '" + v.id + "'");
    vertices_.push_back(std::move(v));
    adjacency_.emplace_back();
    return idx;
}

void ContactGraph::add_edge(std::size_t source, std::size_t target, double weight) {
    if (source >= vertices_.size() || target >= vertices_.size())
        throw std::invalid_argument("edge endpoint out of range");
    if (source == target) throw std::invalid_argument("self-loop on '" + vertices_[source].id + "'");
    if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("edge weight outside [0, 1]");
    if (has_edge(source, target)) throw std::invalid_argument("parallel edge");
    edges_.push_back({source, target, weight});
    adjacency_[source].push_back(target);
    adjacency_[target].push_back(source);
}

std::optional<std::size_t> ContactGraph::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool ContactGraph::has_edge(std::size_t a, std::size_t b) const {
    const auto& smaller = adjacency_.at(a).size() <= adjacency_.at(b).size() ? adjacency_[a] : adjacency_[b];
    std::size_t other = &smaller == &adjacency_[a] ? b : a;
    return std::find(smaller.begin(), smaller.end(), other) != smaller.end();
}

std::size_t ContactGraph::component_count() const {
    std::vector<std::size_t> parent(vertices_.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = vertices_.size();
    for (const auto& e : edges_) {
        auto a = root(e.source), b = root(e.target);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

ContactGraph build_graph(const ValidatedStream& stream, std::optional<TimeWindow> window,
                         const WeightOptions& weights) {
    Timestamp as_of{};
    if (window) {
        as_of = window->end;
    } else if (!stream.empty()) {
        as_of = stream.records().back().timestamp;
    }
    ContactGraph g(as_of);
    for (const auto& rec : stream.records()) {
        if (window && !window->contains(rec.timestamp)) continue;
        g.add_vertex({rec.case_id, rec.timestamp, rec.location});
    }
    // Records are time-ordered, so a source always precedes its case and
    // edges come out in case order.
    for (const auto& rec : stream.records()) {
        if (!rec.source_id) continue;
        auto child = g.find(rec.case_id);
        if (!child) continue;
        auto src = g.find(*rec.source_id);
        if (!src) continue;
        if (g.has_edge(*src, *child)) continue;
        g.add_edge(*src, *child, edge_weight(g.vertices()[*src].location, rec.location, weights));
    }
    return g;
}

ContactGraph subnetwork(const ValidatedStream& stream, const TimeWindow& window, const WeightOptions& weights) {
    return build_graph(stream, window, weights);
}

ContactGraph subnetwork(const ContactGraph& graph, const TimeWindow& window) {
    ContactGraph out(window.end);
    std::vector<std::optional<std::size_t>> remap(graph.vertex_count());
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
        const auto& v = graph.vertices()[i];
        if (window.contains(v.timestamp)) remap[i] = out.add_vertex(v);
    }
    for (const auto& e : graph.edges()) {
        if (remap[e.source] && remap[e.target]) out.add_edge(*remap[e.source], *remap[e.target], e.weight);
    }
    return out;
}

DegreeSample degree_sample(const ContactGraph& graph, bool include_isolated) {
    DegreeSample s;
    s.include_isolated = include_isolated;
    s.degrees.reserve(graph.vertex_count());
    for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
        auto d = graph.degree(v);
        if (d == 0 && !include_isolated) continue;
        s.degrees.push_back(d);
    }
    std::sort(s.degrees.begin(), s.degrees.end());
    return s;
}

DegreeSample make_degree_sample(std::vector<std::uint64_t> degrees, bool include_isolated) {
    std::sort(degrees.begin(), degrees.end());
    return {std::move(degrees), include_isolated};
}

std::map<std::uint64_t, std::size_t> degree_counts(const DegreeSample& sample) {
    std::map<std::uint64_t, std::size_t> counts;
    for (auto d : sample.degrees) ++counts[d];
    return counts;
}

std::map<std::uint64_t, double> degree_distribution(const DegreeSample& sample) {
    if (sample.empty()) throw std::invalid_argument("degree distribution of an empty sample");
    std::map<std::uint64_t, double> pmf;
    const double n = static_cast<double>(sample.size());
    for (auto [d, c] : degree_counts(sample)) pmf[d] = static_cast<double>(c) / n;
    return pmf;
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = radians(a.latitude), phi2 = radians(b.latitude);
    const double dphi = phi2 - phi1;
    const double dlambda = radians(b.longitude - a.longitude);
    const double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

void write_edge_list(std::ostream& os, const ContactGraph& graph) {
    for (const auto& e : graph.edges()) {
        os << graph.vertices()[e.source].id << '\t' << graph.vertices()[e.target].id << '\t' << shortest(e.weight)
           << '\n';
    }
}

void write_vertex_table(std::ostream& os, const ContactGraph& graph) {
    for (const auto& v : graph.vertices()) {
        os << v.id << '\t' << shortest(v.location.longitude) << '\t' << shortest(v.location.latitude) << '\t'
           << format_timestamp(v.timestamp) << '\n';
    }
}

}  // namespace contactnet
