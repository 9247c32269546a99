#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "contactnet/fitting.hpp"
#include "contactnet/graph.hpp"
#include "contactnet/records.hpp"

namespace contactnet {

enum class WindowMode { tumbling, cumulative };

/// Tumbling windows are disjoint slices [origin + k p, origin + (k+1) p);
/// cumulative windows are prefixes [origin, origin + k p).
struct WindowSpec {
    WindowMode mode = WindowMode::tumbling;
    Duration period{86400};
    /// Unset means the start of the stream (first record's timestamp).
    std::optional<Timestamp> origin;
    std::optional<std::size_t> count;

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Parses `15m`, `1h`, `1d`, `30s`, `2w`.
Duration parse_duration(std::string_view text);
std::string format_duration(Duration d);

/// Windows covering `extent` (ceil((extent.end - origin) / period) of them,
/// origin defaulting to extent.start), capped by spec.count. Throws
/// std::invalid_argument for a period <= 0.
std::vector<TimeWindow> schedule_windows(const WindowSpec& spec, const TimeWindow& extent);

struct EngineConfig {
    std::vector<Family> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
    SelectionRule rule = SelectionRule::min_se;
    bool include_isolated = false;
    WeightOptions weights;

    friend bool operator==(const EngineConfig& a, const EngineConfig& b) {
        return a.families == b.families && a.rule == b.rule && a.include_isolated == b.include_isolated &&
               a.weights.kernel == b.weights.kernel && a.weights.decay_km == b.weights.decay_km;
    }
};

struct SkippedFit {
    Family family = Family::exponential;
    std::string reason;

    friend bool operator==(const SkippedFit&, const SkippedFit&) = default;
};

struct StructureReport {
    TimeWindow window;
    std::size_t n_vertices = 0;
    std::size_t n_edges = 0;
    std::size_t fitting_n = 0;
    double mean_degree = 0.0;  // 2 * n_edges / n_vertices
    std::optional<StructureClass> classification;
    std::vector<SkippedFit> skipped;
    /// Degree -> count of the fitting sample (what gets plotted).
    std::map<std::uint64_t, std::size_t> degree_counts;

    friend bool operator==(const StructureReport&, const StructureReport&) = default;
};

/// Offline pipeline for one window: build_graph, degree_sample, fit each
/// configured family, select_structure.
StructureReport analyze_graph(const ContactGraph& graph, const TimeWindow& window, const EngineConfig& config);
StructureReport analyze_window(const ValidatedStream& stream, const TimeWindow& window, const EngineConfig& config);
/// Offline pipeline over every scheduled window of the stream.
std::vector<StructureReport> analyze_batch(const ValidatedStream& stream, const WindowSpec& spec,
                                           const EngineConfig& config);

/// Incremental recognition engine. Records are pushed in arrival order; a
/// window is reported once the watermark (max timestamp seen) reaches its
/// end. Graph bookkeeping is incremental; fitting is redone per window.
class StreamingEngine {
public:
    StreamingEngine(WindowSpec spec, EngineConfig config);

    /// Ingests one record and returns the reports of windows it closed.
    std::vector<StructureReport> push(const CaseRecord& record);
    /// Marks end of input and reports every remaining scheduled window.
    std::vector<StructureReport> finish();

    std::optional<Timestamp> watermark() const noexcept { return watermark_; }
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
    std::size_t windows_emitted() const noexcept { return next_window_; }
    const WindowSpec& spec() const noexcept { return spec_; }
    const EngineConfig& config() const noexcept { return config_; }

private:
    TimeWindow window_at(std::size_t k) const;
    std::size_t window_index_of(Timestamp t) const;
    bool window_limit_reached(std::size_t k) const { return spec_.count && k >= *spec_.count; }
    void link(std::size_t source, std::size_t child);
    void commit_vertex(std::size_t v);
    void commit_edge(std::size_t e);
    Timestamp committed_end() const;
    StructureReport process_window(std::size_t k);
    std::vector<StructureReport> close_until(Timestamp watermark, bool final);

    WindowSpec spec_;
    EngineConfig config_;
    Timestamp origin_{};
    bool started_ = false;

    std::optional<Timestamp> watermark_;
    std::size_t next_window_ = 0;
    std::vector<Diagnostic> diagnostics_;

    std::vector<Vertex> vertices_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::vector<std::size_t>> waiting_for_source_;
    std::vector<Edge> edges_;

    // Tumbling mode: vertex and edge ids bucketed by window index.
    std::map<std::size_t, std::vector<std::size_t>> window_vertices_;
    std::map<std::size_t, std::vector<std::size_t>> window_edges_;

    // Cumulative mode: vertices before committed_end() form the running
    // graph; degree_histogram_ is its degree multiset.
    std::vector<std::uint64_t> degree_;
    std::vector<bool> committed_;
    std::vector<std::size_t> uncommitted_vertices_;
    std::vector<std::size_t> uncommitted_edges_;
    std::map<std::uint64_t, std::size_t> degree_histogram_;
    std::size_t committed_vertex_count_ = 0;
    std::size_t committed_edge_count_ = 0;
};

/// Drives a reader through the engine, handing each report to `sink` as
/// soon as its window closes. Reader and engine diagnostics are appended to
/// `diagnostics` when provided. A StreamError propagates after the reports
/// already closed have been delivered.
void run(RecordReader& reader, const WindowSpec& spec, const EngineConfig& config,
         const std::function<void(const StructureReport&)>& sink, std::vector<Diagnostic>* diagnostics = nullptr);

std::vector<StructureReport> run(RecordReader& reader, const WindowSpec& spec, const EngineConfig& config,
                                 std::vector<Diagnostic>* diagnostics = nullptr);

struct TrendRun {
    std::size_t first_window = 0;
    std::size_t last_window = 0;
    std::optional<Family> family;  // unset for windows without a classification

    friend bool operator==(const TrendRun&, const TrendRun&) = default;
};

struct TrendTransition {
    std::size_t window = 0;  // index of the first window of the new run
    std::optional<Family> from;
    std::optional<Family> to;

    friend bool operator==(const TrendTransition&, const TrendTransition&) = default;
};

struct TrendSummary {
    std::vector<TrendRun> runs;
    std::vector<TrendTransition> transitions;

    friend bool operator==(const TrendSummary&, const TrendSummary&) = default;
};

/// Throws std::invalid_argument on an empty sequence.
TrendSummary classify_trend(const std::vector<StructureReport>& reports);
TrendSummary classify_trend(const std::vector<std::optional<Family>>& chosen);

}  // namespace contactnet
