#include "contactnet/hurwitz_zeta.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace contactnet {

namespace {

// Value plus first and second derivative with respect to s.
struct Jet {
    double v = 0.0, d1 = 0.0, d2 = 0.0;

    Jet& operator+=(const Jet& o) {
        v += o.v;
        d1 += o.d1;
        d2 += o.d2;
        return *this;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
    }
    friend Jet operator*(double c, const Jet& a) { return {c * a.v, c * a.d1, c * a.d2}; }
};

// x^(-s + shift) as a function of s.
Jet power_term(double x, double s, double shift) {
    const double log_x = std::log(x);
    const double e = std::exp((shift - s) * log_x);
    return {e, -log_x * e, log_x * log_x * e};
}

// B_{2j} / (2j)! for j = 1..10.
constexpr std::array<double, 10> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
};

constexpr int kHeadTerms = 10;

Jet zeta_jet(double s, double a) {
    if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta requires s > 1");
    if (!(a >= 1.0)) throw std::domain_error("hurwitz_zeta requires a >= 1");

    Jet sum;
    for (int k = kHeadTerms - 1; k >= 0; --k) sum += power_term(a + k, s, 0.0);

    const double x = a + kHeadTerms;
    // x^(1-s) / (s-1)
    const double u = s - 1.0;
    Jet inv{1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)};
    Jet tail = power_term(x, s, 1.0) * inv;
    tail += 0.5 * power_term(x, s, 0.0);

    // Rising factorial s (s+1) ... (s+2j-2), carried as a jet in s.
    Jet rising{s, 1.0, 0.0};
    for (std::size_t j = 1; j <= kBernoulliOverFactorial.size(); ++j) {
        if (j > 1) {
            const double k1 = static_cast<double>(2 * j - 3);
            const double k2 = static_cast<double>(2 * j - 2);
            rising = rising * Jet{s + k1, 1.0, 0.0};
            rising = rising * Jet{s + k2, 1.0, 0.0};
        }
        Jet term = kBernoulliOverFactorial[j - 1] * (rising * power_term(x, s, 1.0 - 2.0 * j));
        tail += term;
        if (std::abs(term.v) < 1e-17 * std::abs(tail.v) && std::abs(term.d2) < 1e-17 * std::abs(tail.d2)) break;
    }
    tail += sum;
    return tail;
}

}  // namespace

double hurwitz_zeta(double s, double a) { return zeta_jet(s, a).v; }

ZetaDerivatives hurwitz_zeta_derivatives(double s, double a) {
    Jet j = zeta_jet(s, a);
    return {j.v, j.d1, j.d2};
}

}  // namespace contactnet
