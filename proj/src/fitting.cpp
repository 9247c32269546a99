#include "contactnet/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "contactnet/hurwitz_zeta.hpp"

namespace contactnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::span<const std::uint64_t> tail_of(std::span<const std::uint64_t> sorted, std::uint64_t x_min) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x_min);
    return sorted.subspan(static_cast<std::size_t>(it - sorted.begin()));
}

struct TailFit {
    double alpha;
    double se;
    double log_likelihood;
};

// Solves d/dalpha ln L = 0, i.e. mean(ln x) = E_alpha[ln X] = -zeta'/zeta.
// The score is strictly decreasing in alpha (its derivative is -n Var ln X),
// so a bracketed Newton iteration converges.
TailFit fit_tail(std::span<const std::uint64_t> tail, std::uint64_t x_min, const PowerLawOptions& options) {
    const double n = static_cast<double>(tail.size());
    double sum_log = 0.0;
    for (auto x : tail) sum_log += std::log(static_cast<double>(x));
    const double mean_log = sum_log / n;
    const double a = static_cast<double>(x_min);

    auto score = [&](double alpha) { return -hurwitz_zeta_derivatives(alpha, a).log_d1() - mean_log; };

    double lo = 1.0 + 1e-9;
    double hi = options.alpha_upper;
    if (score(hi) > 0.0) throw FitError(Family::power_law, "alpha exceeds search bound");

    double alpha = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        auto z = hurwitz_zeta_derivatives(alpha, a);
        const double g = -z.log_d1() - mean_log;
        if (g > 0.0) lo = alpha;
        else hi = alpha;
        const double curvature = z.log_d2();
        double next = alpha + g / curvature;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - alpha);
        alpha = next;
        if (step < options.tolerance || hi - lo < options.tolerance) break;
    }

    auto z = hurwitz_zeta_derivatives(alpha, a);
    const double info = n * z.log_d2();
    return {alpha, 1.0 / std::sqrt(info), -alpha * sum_log - n * std::log(z.value)};
}

FitResult make_powerlaw_result(std::span<const std::uint64_t> tail, std::uint64_t x_min,
                               const PowerLawOptions& options) {
    if (tail.size() < 2) throw FitError(Family::power_law, "tail smaller than 2 points");
    if (tail.back() == x_min) throw FitError(Family::power_law, "unbounded likelihood: all tail values equal x_min");
    auto tf = fit_tail(tail, x_min, options);
    FitResult r;
    r.distribution = PowerLaw{x_min, tf.alpha};
    r.se = {tf.se};
    r.vcov = Matrix::diagonal({tf.se * tf.se});
    r.log_likelihood = tf.log_likelihood;
    r.n = tail.size();
    r.ks_distance = powerlaw_ks_distance(PowerLaw{x_min, tf.alpha}, tail);
    return r;
}

std::vector<double> to_doubles(const DegreeSample& sample) {
    return {sample.degrees.begin(), sample.degrees.end()};
}

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::exponential: return "exponential";
        case Family::normal: return "normal";
        case Family::poisson: return "poisson";
        case Family::power_law: return "power_law";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    if (name == "exp" || name == "exponential") return Family::exponential;
    if (name == "norm" || name == "normal") return Family::normal;
    if (name == "pois" || name == "poisson") return Family::poisson;
    if (name == "pl" || name == "power_law" || name == "power-law" || name == "powerlaw") return Family::power_law;
    throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

Family family_of(const Distribution& d) noexcept { return static_cast<Family>(d.index()); }

FitError::FitError(Family family, std::string reason)
    : std::runtime_error(std::string(to_string(family)) + ": " + reason), family_(family), reason_(std::move(reason)) {}

Matrix Matrix::diagonal(std::initializer_list<double> diag) {
    Matrix m;
    m.dim = diag.size();
    m.data.assign(m.dim * m.dim, 0.0);
    std::size_t i = 0;
    for (double v : diag) {
        m.data[i * m.dim + i] = v;
        ++i;
    }
    return m;
}

std::vector<std::string> FitResult::parameter_names() const {
    switch (family()) {
        case Family::exponential: return {"lambda"};
        case Family::normal: return {"mu", "sigma"};
        case Family::poisson: return {"lambda"};
        case Family::power_law: return {"alpha"};
    }
    return {};
}

std::size_t FitResult::estimated_parameter_count() const noexcept {
    return se.size() + (x_min_estimated ? 1 : 0);
}

double FitResult::se_sum() const noexcept {
    double s = 0.0;
    for (double v : se) s += v;
    return s;
}

double FitResult::aic() const noexcept {
    return 2.0 * static_cast<double>(estimated_parameter_count()) - 2.0 * log_likelihood;
}

SampleStatistics SampleStatistics::of(std::span<const double> values) {
    SampleStatistics st;
    st.n = values.size();
    if (values.empty()) return st;
    double sum = 0.0;
    st.min_value = values.front();
    st.all_equal = true;
    for (double x : values) {
        sum += x;
        st.min_value = std::min(st.min_value, x);
        if (x != values.front()) st.all_equal = false;
        if (!is_integer(x)) st.integer_valued = false;
    }
    st.mean = sum / static_cast<double>(st.n);
    double ss = 0.0;
    for (double x : values) ss += (x - st.mean) * (x - st.mean);
    st.variance = ss / static_cast<double>(st.n);
    if (st.integer_valued && st.min_value >= 0.0) {
        for (double x : values) st.sum_log_factorial += std::lgamma(x + 1.0);
    } else {
        st.sum_log_factorial = kNaN;
    }
    return st;
}

SampleStatistics SampleStatistics::of(const DegreeSample& sample) {
    auto v = to_doubles(sample);
    return of(std::span<const double>(v));
}

SampleStatistics SampleStatistics::from_summary(std::size_t n, double mean, double sd_mle) {
    SampleStatistics st;
    st.n = n;
    st.mean = mean;
    st.variance = sd_mle * sd_mle;
    st.sum_log_factorial = kNaN;
    st.min_value = 0.0;
    st.all_equal = !(sd_mle > 0.0);
    return st;
}

FitResult fit_exponential(const SampleStatistics& st) {
    if (st.n < 2) throw FitError(Family::exponential, "sample smaller than 2");
    if (st.min_value < 0.0) throw FitError(Family::exponential, "negative value in sample");
    if (!(st.mean > 0.0)) throw FitError(Family::exponential, "all-zero sample");
    const double n = static_cast<double>(st.n);
    const double rate = 1.0 / st.mean;
    FitResult r;
    r.distribution = Exponential{rate};
    r.se = {rate / std::sqrt(n)};
    r.vcov = Matrix::diagonal({rate * rate / n});
    r.log_likelihood = n * std::log(rate) - rate * st.mean * n;
    r.n = st.n;
    return r;
}

FitResult fit_normal(const SampleStatistics& st) {
    if (st.n < 2) throw FitError(Family::normal, "sample smaller than 2");
    if (st.all_equal || !(st.variance > 0.0)) throw FitError(Family::normal, "constant sample");
    const double n = static_cast<double>(st.n);
    const double sd = std::sqrt(st.variance);
    FitResult r;
    r.distribution = Normal{st.mean, sd};
    r.se = {sd / std::sqrt(n), sd / std::sqrt(2.0 * n)};
    r.vcov = Matrix::diagonal({st.variance / n, st.variance / (2.0 * n)});
    r.log_likelihood = -0.5 * n * std::log(2.0 * std::numbers::pi * st.variance) - 0.5 * n;
    r.n = st.n;
    return r;
}

FitResult fit_poisson(const SampleStatistics& st) {
    if (st.n < 1) throw FitError(Family::poisson, "empty sample");
    if (!st.integer_valued || st.min_value < 0.0) throw FitError(Family::poisson, "non-integer value in sample");
    if (!(st.mean > 0.0)) throw FitError(Family::poisson, "all-zero sample");
    const double n = static_cast<double>(st.n);
    const double lambda = st.mean;
    FitResult r;
    r.distribution = Poisson{lambda};
    r.se = {std::sqrt(lambda / n)};
    r.vcov = Matrix::diagonal({lambda / n});
    r.log_likelihood = n * st.mean * std::log(lambda) - n * lambda - st.sum_log_factorial;
    r.n = st.n;
    return r;
}

FitResult fit_exponential(const DegreeSample& sample) { return fit_exponential(SampleStatistics::of(sample)); }
FitResult fit_normal(const DegreeSample& sample) { return fit_normal(SampleStatistics::of(sample)); }
FitResult fit_poisson(const DegreeSample& sample) { return fit_poisson(SampleStatistics::of(sample)); }

double powerlaw_log_likelihood(double alpha, std::uint64_t x_min, std::span<const std::uint64_t> sorted_values) {
    auto tail = tail_of(sorted_values, x_min);
    double sum_log = 0.0;
    for (auto x : tail) sum_log += std::log(static_cast<double>(x));
    return -alpha * sum_log - static_cast<double>(tail.size()) * std::log(hurwitz_zeta(alpha, static_cast<double>(x_min)));
}

double powerlaw_ks_distance(const PowerLaw& law, std::span<const std::uint64_t> sorted_values) {
    auto tail = tail_of(sorted_values, law.x_min);
    if (tail.empty()) return 0.0;
    const double n = static_cast<double>(tail.size());
    const double norm = hurwitz_zeta(law.alpha, static_cast<double>(law.x_min));
    double model_mass = 0.0;
    double worst = 0.0;
    std::size_t idx = 0;
    for (std::uint64_t x = law.x_min; x <= tail.back(); ++x) {
        model_mass += std::pow(static_cast<double>(x), -law.alpha);
        while (idx < tail.size() && tail[idx] <= x) ++idx;
        const double empirical = static_cast<double>(idx) / n;
        worst = std::max(worst, std::abs(empirical - model_mass / norm));
    }
    return worst;
}

FitResult fit_powerlaw(const DegreeSample& sample, std::optional<std::uint64_t> x_min, const PowerLawOptions& options) {
    std::span<const std::uint64_t> values(sample.degrees);
    if (x_min) {
        if (*x_min < 1) throw FitError(Family::power_law, "x_min must be at least 1");
        return make_powerlaw_result(tail_of(values, *x_min), *x_min, options);
    }

    std::optional<FitResult> best;
    std::vector<std::uint64_t> candidates;
    for (auto x : values) {
        if (x >= 1 && (candidates.empty() || candidates.back() != x)) candidates.push_back(x);
    }
    for (auto candidate : candidates) {
        auto tail = tail_of(values, candidate);
        if (tail.size() < 2 || tail.back() == candidate) continue;
        FitResult r;
        try {
            r = make_powerlaw_result(tail, candidate, options);
        } catch (const FitError&) {
            continue;
        }
        if (!best || *r.ks_distance < *best->ks_distance) best = std::move(r);
    }
    if (!best) {
        auto positive = tail_of(values, 1);
        if (positive.size() < 2) throw FitError(Family::power_law, "tail smaller than 2 points");
        throw FitError(Family::power_law, "unbounded likelihood: all tail values equal x_min");
    }
    best->x_min_estimated = true;
    return *best;
}

FitResult fit(Family family, const DegreeSample& sample) {
    switch (family) {
        case Family::exponential: return fit_exponential(sample);
        case Family::normal: return fit_normal(sample);
        case Family::poisson: return fit_poisson(sample);
        case Family::power_law: return fit_powerlaw(sample);
    }
    throw std::invalid_argument("unknown family");
}

double log_likelihood(const Distribution& dist, std::span<const double> values) {
    return std::visit(
        overloaded{
            [&](const Exponential& d) {
                if (!(d.rate > 0.0)) throw std::domain_error("exponential rate must be positive");
                double ll = 0.0;
                for (double x : values) {
                    if (!(x >= 0.0)) throw std::domain_error("exponential support is [0, inf)");
                    ll += std::log(d.rate) - d.rate * x;
                }
                return ll;
            },
            [&](const Normal& d) {
                if (!(d.sd > 0.0)) throw std::domain_error("normal sd must be positive");
                double ll = 0.0;
                const double log_norm = std::log(d.sd * std::sqrt(2.0 * std::numbers::pi));
                for (double x : values) {
                    if (!std::isfinite(x)) throw std::domain_error("normal support is the real line");
                    const double z = (x - d.mean) / d.sd;
                    ll += -log_norm - 0.5 * z * z;
                }
                return ll;
            },
            [&](const Poisson& d) {
                if (!(d.lambda > 0.0)) throw std::domain_error("poisson lambda must be positive");
                double ll = 0.0;
                for (double x : values) {
                    if (!is_integer(x) || x < 0.0) throw std::domain_error("poisson support is the non-negative integers");
                    ll += x * std::log(d.lambda) - d.lambda - std::lgamma(x + 1.0);
                }
                return ll;
            },
            [&](const PowerLaw& d) {
                if (!(d.alpha > 1.0)) throw std::domain_error("power-law alpha must exceed 1");
                if (d.x_min < 1) throw std::domain_error("power-law x_min must be at least 1");
                const double xm = static_cast<double>(d.x_min);
                const double log_norm = std::log(hurwitz_zeta(d.alpha, xm));
                double ll = 0.0;
                for (double x : values) {
                    if (!(x >= xm)) continue;
                    if (!is_integer(x)) throw std::domain_error("power-law support is the integers >= x_min");
                    ll += -d.alpha * std::log(x) - log_norm;
                }
                return ll;
            },
        },
        dist);
}

double log_likelihood(const Distribution& dist, const DegreeSample& sample) {
    auto v = to_doubles(sample);
    return log_likelihood(dist, std::span<const double>(v));
}

std::string_view to_string(SelectionRule r) noexcept {
    switch (r) {
        case SelectionRule::min_se: return "min-se";
        case SelectionRule::max_loglik: return "max-loglik";
        case SelectionRule::aic: return "aic";
    }
    return "?";
}

SelectionRule parse_selection_rule(std::string_view name) {
    if (name == "min-se") return SelectionRule::min_se;
    if (name == "max-loglik") return SelectionRule::max_loglik;
    if (name == "aic") return SelectionRule::aic;
    throw std::invalid_argument("unknown selection rule '" + std::string(name) + "'");
}

const FitResult& StructureClass::chosen_fit() const {
    for (const auto& f : all_fits)
        if (f.family() == chosen) return f;
    throw std::logic_error("chosen family missing from fits");
}

StructureClass select_structure(std::vector<FitResult> fits, SelectionRule rule) {
    if (fits.empty()) throw std::invalid_argument("select_structure needs at least one fit");
    // Lower score wins; NaN scores lose to everything.
    auto score = [rule](const FitResult& f) {
        double s = 0.0;
        switch (rule) {
            case SelectionRule::min_se: s = f.se_sum(); break;
            case SelectionRule::aic: s = f.aic(); break;
            case SelectionRule::max_loglik: s = -f.log_likelihood; break;
        }
        return std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
    };
    const FitResult* best = &fits.front();
    for (const auto& f : fits) {
        const double a = score(f), b = score(*best);
        if (a < b || (a == b && f.family() < best->family())) best = &f;
    }
    StructureClass out;
    out.chosen = best->family();
    out.rule = rule;
    out.all_fits = std::move(fits);
    return out;
}

}  // namespace contactnet
