#include "contactnet/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "contactnet/hurwitz_zeta.hpp"

namespace contactnet {

namespace {

constexpr double kMarginLeft = 70.0, kMarginRight = 150.0, kMarginTop = 40.0, kMarginBottom = 50.0;
constexpr double kCurveStep = 0.25;

const char* family_color(Family f) {
    switch (f) {
        case Family::exponential: return "#d62728";
        case Family::normal: return "#1f77b4";
        case Family::poisson: return "#2ca02c";
        case Family::power_law: return "#9467bd";
    }
    return "#000000";
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Round-trip precision for the data-* attributes.
std::string exact(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Axes {
    double x0, x1, y0, y1;
    double left, top, w, h;
    bool log;

    double tx(double x) const { return log ? std::log10(x) : x; }
    double ty(double y) const { return log ? std::log10(y) : y; }
    double px(double x) const { return left + (tx(x) - x0) / (x1 - x0) * w; }
    double py(double y) const { return top + h - (ty(y) - y0) / (y1 - y0) * h; }
    bool visible(double x, double y) const {
        if (log && (x <= 0.0 || y <= 0.0)) return false;
        const double a = ty(y);
        return std::isfinite(a) && a >= y0 - 1e-12 && a <= y1 + 1e-12;
    }
};

std::vector<double> ticks(double lo, double hi, int target) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
    return out;
}

}  // namespace

double fitted_curve(const Distribution& dist, double x) {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return x < 0.0 ? 0.0 : d.rate * std::exp(-d.rate * x);
            } else if constexpr (std::is_same_v<T, Normal>) {
                const double z = (x - d.mean) / d.sd;
                return std::exp(-0.5 * z * z) / (d.sd * std::sqrt(2.0 * std::numbers::pi));
            } else if constexpr (std::is_same_v<T, Poisson>) {
                if (x < 0.0 || std::floor(x) != x) return 0.0;
                return std::exp(x * std::log(d.lambda) - d.lambda - std::lgamma(x + 1.0));
            } else {
                if (x < static_cast<double>(d.x_min) || std::floor(x) != x) return 0.0;
                return std::pow(x, -d.alpha) / hurwitz_zeta(d.alpha, static_cast<double>(d.x_min));
            }
        },
        dist);
}

std::string render_degree_plot(const std::map<std::uint64_t, double>& pmf, const std::vector<FitResult>& fits,
                               std::size_t sample_size, const PlotOptions& options) {
    if (pmf.empty()) throw std::invalid_argument("cannot plot an empty degree distribution");

    const double d_lo = static_cast<double>(pmf.begin()->first);
    const double d_hi = static_cast<double>(pmf.rbegin()->first);

    // Curve samples first; their range feeds the y axis.
    struct Series {
        Family family;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> curves;
    for (const auto& fit : fits) {
        Series s{fit.family(), {}};
        const bool discrete = s.family == Family::poisson || s.family == Family::power_law;
        double scale = 1.0;
        if (s.family == Family::power_law && sample_size > 0)
            scale = static_cast<double>(fit.n) / static_cast<double>(sample_size);
        const double start = options.log_log ? std::max(1.0, d_lo) : std::min(0.0, d_lo);
        const double step = discrete ? 1.0 : kCurveStep;
        const std::size_t count = static_cast<std::size_t>(std::floor((std::max(d_hi, start) - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            const double x = start + step * static_cast<double>(i);
            const double y = scale * fitted_curve(fit.distribution, x);
            if (s.family == Family::power_law && y == 0.0) continue;
            s.points.emplace_back(x, y);
        }
        curves.push_back(std::move(s));
    }

    Axes ax{};
    ax.log = options.log_log;
    ax.left = kMarginLeft;
    ax.top = kMarginTop;
    ax.w = options.width - kMarginLeft - kMarginRight;
    ax.h = options.height - kMarginTop - kMarginBottom;

    double y_max = 0.0, y_min_pos = 1.0;
    for (const auto& [d, p] : pmf) {
        y_max = std::max(y_max, p);
        if (p > 0.0) y_min_pos = std::min(y_min_pos, p);
    }
    if (ax.log) {
        ax.x0 = 0.0;
        ax.x1 = std::log10(std::max(d_hi, 10.0));
        ax.y1 = std::ceil(std::log10(std::max(y_max, 1e-300)) + 1e-9);
        ax.y0 = std::floor(std::log10(y_min_pos)) - 1.0;
        if (ax.y1 <= ax.y0) ax.y1 = ax.y0 + 1.0;
    } else {
        for (const auto& c : curves)
            for (const auto& [x, y] : c.points) y_max = std::max(y_max, y);
        ax.x0 = std::min(0.0, d_lo);
        ax.x1 = std::max(d_hi, ax.x0 + 1.0);
        ax.y0 = 0.0;
        ax.y1 = y_max * 1.05;
    }

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
       << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(ax.left + ax.w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"16\">" << escape(options.title) << "</text>\n";
    os << "<g class=\"plot\" data-scale=\"" << (ax.log ? "log" : "linear") << "\" data-x-range=\"" << exact(ax.x0) << ' '
       << exact(ax.x1) << "\" data-y-range=\"" << exact(ax.y0) << ' ' << exact(ax.y1) << "\" data-box=\"" << num(ax.left)
       << ' ' << num(ax.top) << ' ' << num(ax.w) << ' ' << num(ax.h) << "\">\n";

    // Frame and ticks.
    os << "<rect class=\"frame\" x=\"" << num(ax.left) << "\" y=\"" << num(ax.top) << "\" width=\"" << num(ax.w)
       << "\" height=\"" << num(ax.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double t : ticks(ax.x0, ax.x1, 8)) {
        const double x = ax.left + (t - ax.x0) / (ax.x1 - ax.x0) * ax.w;
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(ax.top + ax.h) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(ax.top + ax.h + 5) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(ax.top + ax.h + 18) << "\" text-anchor=\"middle\">"
           << label(ax.log ? std::pow(10.0, t) : t) << "</text>\n";
    }
    for (double t : ticks(ax.y0, ax.y1, 6)) {
        const double y = ax.top + ax.h - (t - ax.y0) / (ax.y1 - ax.y0) * ax.h;
        os << "<line x1=\"" << num(ax.left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ax.left) << "\" y2=\""
           << num(y) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(ax.left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
           << label(ax.log ? std::pow(10.0, t) : t) << "</text>\n";
    }
    os << "</g>\n";
    os << "<text x=\"" << num(ax.left + ax.w / 2) << "\" y=\"" << num(options.height - 10.0)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">degree</text>\n";
    os << "<text transform=\"translate(18 " << num(ax.top + ax.h / 2) << ") rotate(-90)\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"13\">probability</text>\n";

    for (const auto& c : curves) {
        os << "<polyline class=\"fit\" data-family=\"" << to_string(c.family) << "\" fill=\"none\" stroke=\""
           << family_color(c.family) << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& [x, y] : c.points) {
            if (!ax.visible(x, y)) continue;
            if (!first) os << ' ';
            os << num(ax.px(x)) << ',' << num(ax.py(y));
            first = false;
        }
        os << "\"/>\n";
    }

    os << "<g class=\"empirical\" fill=\"black\">\n";
    for (const auto& [d, p] : pmf) {
        const double x = static_cast<double>(d);
        if (!ax.visible(x, p)) continue;
        os << "<circle cx=\"" << num(ax.px(x)) << "\" cy=\"" << num(ax.py(p)) << "\" r=\"3\"/>\n";
    }
    os << "</g>\n";
    os << "</g>\n";

    os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = ax.top + 10;
    const double lx = ax.left + ax.w + 15;
    os << "<circle cx=\"" << num(lx + 10) << "\" cy=\"" << num(ly) << "\" r=\"3\" fill=\"black\"/><text x=\""
       << num(lx + 25) << "\" y=\"" << num(ly + 4) << "\">empirical</text>\n";
    for (const auto& c : curves) {
        ly += 20;
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20) << "\" y2=\"" << num(ly)
           << "\" stroke=\"" << family_color(c.family) << "\" stroke-width=\"1.5\"/><text x=\"" << num(lx + 25)
           << "\" y=\"" << num(ly + 4) << "\">" << to_string(c.family) << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

std::string render_report_plot(const StructureReport& report, const PlotOptions& options) {
    std::map<std::uint64_t, double> pmf;
    std::size_t total = 0;
    for (const auto& [d, c] : report.degree_counts) total += c;
    for (const auto& [d, c] : report.degree_counts)
        pmf[d] = static_cast<double>(c) / static_cast<double>(total);
    std::vector<FitResult> fits;
    if (report.classification) fits = report.classification->all_fits;
    return render_degree_plot(pmf, fits, total, options);
}

}  // namespace contactnet
