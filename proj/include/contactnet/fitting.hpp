#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "contactnet/graph.hpp"

namespace contactnet {

// Declaration order is the tie-break order used by select_structure.
enum class Family { exponential = 0, normal = 1, poisson = 2, power_law = 3 };

inline constexpr Family kAllFamilies[] = {Family::exponential, Family::normal, Family::poisson, Family::power_law};

std::string_view to_string(Family f) noexcept;
/// Accepts long names and the short CLI spellings exp, norm, pois, pl.
Family parse_family(std::string_view name);

struct Exponential {
    double rate = 1.0;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};
struct Normal {
    double mean = 0.0;
    double sd = 1.0;
    friend bool operator==(const Normal&, const Normal&) = default;
};
struct Poisson {
    double lambda = 1.0;
    friend bool operator==(const Poisson&, const Poisson&) = default;
};
/// Discrete power law p(x) = x^-alpha / zeta(alpha, x_min) on x >= x_min.
struct PowerLaw {
    std::uint64_t x_min = 1;
    double alpha = 2.0;
    friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

using Distribution = std::variant<Exponential, Normal, Poisson, PowerLaw>;

Family family_of(const Distribution& d) noexcept;

/// Raised when a sample cannot support a fit (too small, constant, all-zero,
/// unbounded likelihood). Carries a short machine-friendly reason.
class FitError : public std::runtime_error {
public:
    FitError(Family family, std::string reason);
    Family family() const noexcept { return family_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    Family family_;
    std::string reason_;
};

/// Dense row-major square matrix.
struct Matrix {
    std::size_t dim = 0;
    std::vector<double> data;

    static Matrix diagonal(std::initializer_list<double> diag);
    double operator()(std::size_t r, std::size_t c) const { return data.at(r * dim + c); }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct FitResult {
    Distribution distribution;
    /// Standard errors of the estimated continuous parameters, in the order
    /// given by parameter_names(). The power-law x_min has none.
    std::vector<double> se;
    Matrix vcov;
    double log_likelihood = 0.0;
    /// Effective sample size (tail size for the power law).
    std::size_t n = 0;
    /// Power law only: whether x_min was chosen by the KS scan, and the
    /// KS distance at the chosen x_min.
    bool x_min_estimated = false;
    std::optional<double> ks_distance;

    Family family() const noexcept { return family_of(distribution); }
    /// Names of the parameters carrying a standard error.
    std::vector<std::string> parameter_names() const;
    /// Number of estimated parameters, x_min included when scanned.
    std::size_t estimated_parameter_count() const noexcept;
    double se_sum() const noexcept;
    double aic() const noexcept;

    friend bool operator==(const FitResult&, const FitResult&) = default;
};

/// Sufficient statistics of a degree sample. Reported summaries (mean,
/// MLE standard deviation, n) can be turned into one via from_summary.
struct SampleStatistics {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // MLE (denominator n)
    double sum_log_factorial = 0.0;
    double min_value = 0.0;
    bool integer_valued = true;
    bool all_equal = false;

    static SampleStatistics of(std::span<const double> values);
    static SampleStatistics of(const DegreeSample& sample);
    /// The Poisson log-likelihood is NaN for summary-built statistics since
    /// sum(ln x!) is unknown.
    static SampleStatistics from_summary(std::size_t n, double mean, double sd_mle);
};

FitResult fit_exponential(const SampleStatistics& stats);
FitResult fit_normal(const SampleStatistics& stats);
FitResult fit_poisson(const SampleStatistics& stats);

FitResult fit_exponential(const DegreeSample& sample);
FitResult fit_normal(const DegreeSample& sample);
FitResult fit_poisson(const DegreeSample& sample);

struct PowerLawOptions {
    double alpha_upper = 20.0;
    double tolerance = 1e-10;
};

/// Maximizes the discrete power-law likelihood over alpha in (1, 20]. With
/// no x_min, every observed value leaving at least two distinct tail values
/// is tried and the x_min minimizing the KS distance wins (smallest on ties).
FitResult fit_powerlaw(const DegreeSample& sample, std::optional<std::uint64_t> x_min = std::nullopt,
                       const PowerLawOptions& options = {});

/// Power-law log-likelihood over the tail {x >= x_min} as a function of alpha.
double powerlaw_log_likelihood(double alpha, std::uint64_t x_min, std::span<const std::uint64_t> sorted_values);

/// KS distance between the empirical tail CDF and the fitted discrete
/// power-law CDF, taken over the integers x_min..max.
double powerlaw_ks_distance(const PowerLaw& law, std::span<const std::uint64_t> sorted_values);

FitResult fit(Family family, const DegreeSample& sample);

/// Exact log-density sum. Throws std::domain_error on support violations
/// or invalid parameters. The power law is evaluated on its tail only.
double log_likelihood(const Distribution& dist, std::span<const double> values);
double log_likelihood(const Distribution& dist, const DegreeSample& sample);

enum class SelectionRule { min_se, max_loglik, aic };

std::string_view to_string(SelectionRule r) noexcept;
SelectionRule parse_selection_rule(std::string_view name);

struct StructureClass {
    Family chosen = Family::exponential;
    SelectionRule rule = SelectionRule::min_se;
    std::vector<FitResult> all_fits;

    const FitResult& chosen_fit() const;

    friend bool operator==(const StructureClass&, const StructureClass&) = default;
};

/// min-se picks the smallest sum of parameter SEs; aic the smallest
/// 2k - 2 ln L; max-loglik the largest ln L. Ties go to the earlier family.
StructureClass select_structure(std::vector<FitResult> fits, SelectionRule rule = SelectionRule::min_se);

}  // namespace contactnet
