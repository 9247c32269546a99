#include "contactnet/engine.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace contactnet {

Duration parse_duration(std::string_view text) {
    if (text.size() < 2) throw std::invalid_argument("invalid duration '" + std::string(text) + "'");
    const char unit = text.back();
    std::string_view digits = text.substr(0, text.size() - 1);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw std::invalid_argument("invalid duration '" + std::string(text) + "'");
    long long scale = 0;
    switch (unit) {
        case 's': scale = 1; break;
        case 'm': scale = 60; break;
        case 'h': scale = 3600; break;
        case 'd': scale = 86400; break;
        case 'w': scale = 7 * 86400; break;
        default: throw std::invalid_argument("invalid duration unit in '" + std::string(text) + "'");
    }
    return Duration{value * scale};
}

std::string format_duration(Duration d) {
    const long long s = d.count();
    if (s != 0 && s % 86400 == 0) return std::to_string(s / 86400) + "d";
    if (s != 0 && s % 3600 == 0) return std::to_string(s / 3600) + "h";
    if (s != 0 && s % 60 == 0) return std::to_string(s / 60) + "m";
    return std::to_string(s) + "s";
}

std::vector<TimeWindow> schedule_windows(const WindowSpec& spec, const TimeWindow& extent) {
    if (spec.period <= Duration::zero()) throw std::invalid_argument("window period must be positive");
    const Timestamp origin = spec.origin.value_or(extent.start);
    std::vector<TimeWindow> out;
    if (extent.end <= origin) return out;
    const auto span = (extent.end - origin).count();
    const auto p = spec.period.count();
    std::size_t n = static_cast<std::size_t>((span + p - 1) / p);
    if (spec.count) n = std::min(n, *spec.count);
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto end = origin + spec.period * static_cast<Duration::rep>(k + 1);
        const auto start = spec.mode == WindowMode::tumbling ? origin + spec.period * static_cast<Duration::rep>(k) : origin;
        out.emplace_back(start, end);
    }
    return out;
}

namespace {

StructureReport fit_sample(const TimeWindow& window, std::size_t n_vertices, std::size_t n_edges,
                           DegreeSample sample, const EngineConfig& config) {
    StructureReport report;
    report.window = window;
    report.n_vertices = n_vertices;
    report.n_edges = n_edges;
    report.mean_degree = n_vertices > 0 ? 2.0 * static_cast<double>(n_edges) / static_cast<double>(n_vertices) : 0.0;
    report.fitting_n = sample.size();
    report.degree_counts = degree_counts(sample);

    std::vector<FitResult> fits;
    for (Family family : config.families) {
        try {
            fits.push_back(fit(family, sample));
        } catch (const FitError& e) {
            report.skipped.push_back({family, e.reason()});
        }
    }
    if (!fits.empty()) report.classification = select_structure(std::move(fits), config.rule);
    return report;
}

}  // namespace

StructureReport analyze_graph(const ContactGraph& graph, const TimeWindow& window, const EngineConfig& config) {
    return fit_sample(window, graph.vertex_count(), graph.edge_count(), degree_sample(graph, config.include_isolated),
                      config);
}

StructureReport analyze_window(const ValidatedStream& stream, const TimeWindow& window, const EngineConfig& config) {
    return analyze_graph(build_graph(stream, window, config.weights), window, config);
}

std::vector<StructureReport> analyze_batch(const ValidatedStream& stream, const WindowSpec& spec,
                                           const EngineConfig& config) {
    std::vector<StructureReport> out;
    auto extent = stream_extent(stream);
    if (!extent) return out;
    for (const auto& w : schedule_windows(spec, *extent)) out.push_back(analyze_window(stream, w, config));
    return out;
}

StreamingEngine::StreamingEngine(WindowSpec spec, EngineConfig config)
    : spec_(std::move(spec)), config_(std::move(config)) {
    if (spec_.period <= Duration::zero()) throw std::invalid_argument("window period must be positive");
}

TimeWindow StreamingEngine::window_at(std::size_t k) const {
    const auto end = origin_ + spec_.period * static_cast<Duration::rep>(k + 1);
    if (spec_.mode == WindowMode::cumulative) return {origin_, end};
    return {origin_ + spec_.period * static_cast<Duration::rep>(k), end};
}

std::size_t StreamingEngine::window_index_of(Timestamp t) const {
    return static_cast<std::size_t>((t - origin_) / spec_.period);
}

Timestamp StreamingEngine::committed_end() const {
    return next_window_ == 0 ? origin_ : window_at(next_window_ - 1).end;
}

void StreamingEngine::commit_vertex(std::size_t v) {
    committed_[v] = true;
    ++committed_vertex_count_;
    ++degree_histogram_[0];
}

void StreamingEngine::commit_edge(std::size_t e) {
    for (std::size_t v : {edges_[e].source, edges_[e].target}) {
        auto it = degree_histogram_.find(degree_[v]);
        if (--it->second == 0) degree_histogram_.erase(it);
        ++degree_histogram_[++degree_[v]];
    }
    ++committed_edge_count_;
}

void StreamingEngine::link(std::size_t source, std::size_t child) {
    const auto& s = vertices_[source];
    const auto& c = vertices_[child];
    if (s.timestamp > c.timestamp) {
        diagnostics_.push_back({0, c.id, "source '" + s.id + "' reported after the case; edge dropped"});
        return;
    }
    const std::size_t e = edges_.size();
    edges_.push_back({source, child, edge_weight(s.location, c.location, config_.weights)});
    if (s.timestamp < origin_) return;

    if (spec_.mode == WindowMode::tumbling) {
        const auto k = window_index_of(s.timestamp);
        if (k == window_index_of(c.timestamp)) window_edges_[k].push_back(e);
    } else if (committed_[source] && committed_[child]) {
        commit_edge(e);
    } else {
        uncommitted_edges_.push_back(e);
    }
}

std::vector<StructureReport> StreamingEngine::push(const CaseRecord& record) {
    if (!started_) {
        origin_ = spec_.origin.value_or(record.timestamp);
        started_ = true;
    }
    if (!record.location.valid()) {
        diagnostics_.push_back({0, record.case_id, "coordinates out of range; record dropped"});
        return {};
    }
    if (index_.count(record.case_id)) {
        diagnostics_.push_back({0, record.case_id, "duplicate case_id; record dropped"});
        return {};
    }

    const bool before_origin = record.timestamp < origin_;
    if (before_origin) {
        diagnostics_.push_back({0, record.case_id, "timestamp before window origin; outside every window"});
    } else if (next_window_ > 0 && record.timestamp < committed_end()) {
        if (spec_.mode == WindowMode::tumbling) {
            diagnostics_.push_back({0, record.case_id, "late record for an emitted window; rejected"});
            return {};
        }
        diagnostics_.push_back({0, record.case_id, "late record; absorbed into subsequent windows"});
    }

    const std::size_t v = vertices_.size();
    vertices_.push_back({record.case_id, record.timestamp, record.location});
    index_.emplace(record.case_id, v);
    degree_.push_back(0);
    committed_.push_back(false);

    if (!before_origin) {
        if (spec_.mode == WindowMode::tumbling) {
            window_vertices_[window_index_of(record.timestamp)].push_back(v);
        } else if (record.timestamp < committed_end()) {
            commit_vertex(v);
        } else {
            uncommitted_vertices_.push_back(v);
        }
    }

    if (record.source_id) {
        if (*record.source_id == record.case_id) {
            diagnostics_.push_back({0, record.case_id, "source is the case itself; edge dropped"});
        } else if (auto it = index_.find(*record.source_id); it != index_.end()) {
            link(it->second, v);
        } else {
            waiting_for_source_[*record.source_id].push_back(v);
        }
    }
    if (auto it = waiting_for_source_.find(record.case_id); it != waiting_for_source_.end()) {
        for (std::size_t child : it->second) link(v, child);
        waiting_for_source_.erase(it);
    }

    if (!watermark_ || record.timestamp > *watermark_) watermark_ = record.timestamp;
    return close_until(*watermark_, false);
}

std::vector<StructureReport> StreamingEngine::finish() {
    std::vector<std::string> dangling;
    for (const auto& [source, children] : waiting_for_source_) {
        for (std::size_t child : children) dangling.push_back(vertices_[child].id + "\n" + source);
    }
    std::sort(dangling.begin(), dangling.end());
    for (const auto& entry : dangling) {
        auto cut = entry.find('\n');
        diagnostics_.push_back(
            {0, entry.substr(0, cut), "dangling source '" + entry.substr(cut + 1) + "'; edge dropped"});
    }
    waiting_for_source_.clear();
    if (!watermark_) return {};
    return close_until(*watermark_, true);
}

StructureReport StreamingEngine::process_window(std::size_t k) {
    const TimeWindow window = window_at(k);
    DegreeSample sample;
    sample.include_isolated = config_.include_isolated;

    if (spec_.mode == WindowMode::tumbling) {
        auto vit = window_vertices_.find(k);
        auto eit = window_edges_.find(k);
        std::unordered_map<std::size_t, std::uint64_t> degree;
        std::size_t n_vertices = 0, n_edges = 0;
        if (vit != window_vertices_.end()) {
            n_vertices = vit->second.size();
            for (auto v : vit->second) degree.emplace(v, 0);
        }
        if (eit != window_edges_.end()) {
            n_edges = eit->second.size();
            for (auto e : eit->second) {
                ++degree[edges_[e].source];
                ++degree[edges_[e].target];
            }
        }
        for (const auto& [v, d] : degree) {
            if (d > 0 || config_.include_isolated) sample.degrees.push_back(d);
        }
        std::sort(sample.degrees.begin(), sample.degrees.end());
        if (vit != window_vertices_.end()) window_vertices_.erase(vit);
        if (eit != window_edges_.end()) window_edges_.erase(eit);
        return fit_sample(window, n_vertices, n_edges, std::move(sample), config_);
    }

    std::erase_if(uncommitted_vertices_, [&](std::size_t v) {
        if (vertices_[v].timestamp >= window.end) return false;
        commit_vertex(v);
        return true;
    });
    std::erase_if(uncommitted_edges_, [&](std::size_t e) {
        if (!committed_[edges_[e].source] || !committed_[edges_[e].target]) return false;
        commit_edge(e);
        return true;
    });
    for (const auto& [d, count] : degree_histogram_) {
        if (d == 0 && !config_.include_isolated) continue;
        sample.degrees.insert(sample.degrees.end(), count, d);
    }
    return fit_sample(window, committed_vertex_count_, committed_edge_count_, std::move(sample), config_);
}

std::vector<StructureReport> StreamingEngine::close_until(Timestamp watermark, bool final) {
    std::vector<StructureReport> out;
    while (!window_limit_reached(next_window_)) {
        const Timestamp slice_start = origin_ + spec_.period * static_cast<Duration::rep>(next_window_);
        if (final ? slice_start > watermark : window_at(next_window_).end > watermark) break;
        out.push_back(process_window(next_window_));
        ++next_window_;
    }
    return out;
}

void run(RecordReader& reader, const WindowSpec& spec, const EngineConfig& config,
         const std::function<void(const StructureReport&)>& sink, std::vector<Diagnostic>* diagnostics) {
    StreamingEngine engine(spec, config);
    auto collect = [&] {
        if (!diagnostics) return;
        diagnostics->insert(diagnostics->end(), reader.diagnostics().begin(), reader.diagnostics().end());
        diagnostics->insert(diagnostics->end(), engine.diagnostics().begin(), engine.diagnostics().end());
    };
    try {
        while (auto rec = reader.next()) {
            for (const auto& r : engine.push(*rec)) sink(r);
        }
    } catch (const StreamError&) {
        collect();
        throw;
    }
    for (const auto& r : engine.finish()) sink(r);
    collect();
}

std::vector<StructureReport> run(RecordReader& reader, const WindowSpec& spec, const EngineConfig& config,
                                 std::vector<Diagnostic>* diagnostics) {
    std::vector<StructureReport> out;
    run(reader, spec, config, [&](const StructureReport& r) { out.push_back(r); }, diagnostics);
    return out;
}

TrendSummary classify_trend(const std::vector<std::optional<Family>>& chosen) {
    if (chosen.empty()) throw std::invalid_argument("classify_trend needs at least one report");
    TrendSummary s;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (!s.runs.empty() && s.runs.back().family == chosen[i]) {
            s.runs.back().last_window = i;
            continue;
        }
        if (!s.runs.empty()) s.transitions.push_back({i, s.runs.back().family, chosen[i]});
        s.runs.push_back({i, i, chosen[i]});
    }
    return s;
}

TrendSummary classify_trend(const std::vector<StructureReport>& reports) {
    std::vector<std::optional<Family>> chosen;
    chosen.reserve(reports.size());
    for (const auto& r : reports) {
        chosen.push_back(r.classification ? std::optional(r.classification->chosen) : std::nullopt);
    }
    return classify_trend(chosen);
}

}  // namespace contactnet
