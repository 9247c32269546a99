#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "contactnet/fitting.hpp"
#include "oracles.hpp"

using namespace contactnet;
namespace oracle = contactnet::testing;

namespace {

bool within(double got, double want, double tol) { return std::abs(got - want) <= tol; }

FitResult with_se(Family f, std::vector<double> se, double ll = 0.0) {
    FitResult r;
    switch (f) {
        case Family::exponential: r.distribution = Exponential{1.0}; break;
        case Family::normal: r.distribution = Normal{0.0, 1.0}; break;
        case Family::poisson: r.distribution = Poisson{1.0}; break;
        case Family::power_law: r.distribution = PowerLaw{1, 2.0}; break;
    }
    r.se = std::move(se);
    r.log_likelihood = ll;
    r.n = 10;
    return r;
}

std::vector<std::uint64_t> zeta_sample(double alpha, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> v(n);
    for (auto& x : v) x = oracle::sample_zeta(alpha, rng);
    return v;
}

}  // namespace

// Closed-form families on the small examples.

TEST_CASE("exponential closed form") {
    auto r = fit_exponential(SampleStatistics::from_summary(100, 2.0, 1.0));
    CHECK(std::get<Exponential>(r.distribution).rate == doctest::Approx(0.5).epsilon(1e-15));
    REQUIRE(r.se.size() == 1);
    CHECK(r.se[0] == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(r.n == 100);
}

TEST_CASE("normal closed form on {1,1,3,3}") {
    auto r = fit_normal(make_degree_sample({1, 1, 3, 3}));
    const auto& d = std::get<Normal>(r.distribution);
    CHECK(d.mean == 2.0);
    CHECK(d.sd == 1.0);
    CHECK(r.parameter_names() == std::vector<std::string>{"mu", "sigma"});
    CHECK(r.se[0] == doctest::Approx(0.5));
    CHECK(r.se[1] == doctest::Approx(1.0 / std::sqrt(8.0)));
}

TEST_CASE("poisson closed form on {0..5}") {
    auto r = fit_poisson(make_degree_sample({0, 1, 2, 3, 4, 5}));
    CHECK(std::get<Poisson>(r.distribution).lambda == 2.5);
    CHECK(r.se[0] == doctest::Approx(std::sqrt(2.5 / 6.0)).epsilon(1e-14));
}

TEST_CASE("reference full-network fits (941 points)") {
    const auto stats = SampleStatistics::from_summary(941, 1.9936238, 2.77914691);
    auto e = fit_exponential(stats);
    CHECK(within(std::get<Exponential>(e.distribution).rate, 0.50159915, 1e-6));
    CHECK(within(e.se[0], 0.01635166, 1e-6));
    CHECK(within(e.vcov(0, 0), 2.673769e-4, 1e-8));

    auto nrm = fit_normal(stats);
    CHECK(within(nrm.se[0], 0.09059760, 1e-6));
    CHECK(within(nrm.se[1], 0.06406218, 1e-6));
    CHECK(within(nrm.vcov(0, 0), 0.008207925, 1e-8));
    CHECK(within(nrm.vcov(1, 1), 0.004103963, 1e-8));
    CHECK(nrm.vcov(0, 1) == 0.0);

    auto p = fit_poisson(stats);
    CHECK(within(p.se[0], 0.0460285, 1e-6));
    CHECK(within(p.vcov(0, 0), 0.002118623, 1e-8));
    CHECK(std::isnan(p.log_likelihood));
}

TEST_CASE("reference Aug-26 window fits (184 points)") {
    const auto stats = SampleStatistics::from_summary(184, 1.33695652, 1.00841216);
    auto e = fit_exponential(stats);
    CHECK(within(std::get<Exponential>(e.distribution).rate, 0.74796748, 1e-6));
    CHECK(within(e.se[0], 0.05514089, 1e-6));
    CHECK(within(fit_normal(stats).se[0], 0.07434113, 1e-6));
    auto p = fit_poisson(stats);
    CHECK(within(p.se[0], 0.08524123, 1e-6));
    CHECK(within(p.vcov(0, 0), 0.007266068, 1e-8));
}

TEST_CASE("closed-form identities hold on random samples (property)") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::uint64_t> deg(0, 30);
        std::uniform_int_distribution<std::size_t> size(2, 400);
        std::vector<std::uint64_t> v(size(rng));
        for (auto& x : v) x = deg(rng);
        v[0] = 1;
        v[1] = 2;  // not constant, positive mean
        auto s = make_degree_sample(v);
        const double n = static_cast<double>(s.size());

        auto e = fit_exponential(s);
        const double lam = std::get<Exponential>(e.distribution).rate;
        CHECK(e.se[0] == doctest::Approx(lam / std::sqrt(n)).epsilon(1e-12));
        CHECK(e.vcov(0, 0) == doctest::Approx(lam * lam / n).epsilon(1e-12));

        auto p = fit_poisson(s);
        CHECK(p.vcov(0, 0) == doctest::Approx(std::get<Poisson>(p.distribution).lambda / n).epsilon(1e-12));

        auto nr = fit_normal(s);
        const double sd = std::get<Normal>(nr.distribution).sd;
        CHECK(nr.vcov(0, 0) == doctest::Approx(sd * sd / n).epsilon(1e-12));
        CHECK(nr.vcov(1, 1) == doctest::Approx(sd * sd / (2 * n)).epsilon(1e-12));

        for (const auto* r : {&e, &p, &nr}) {
            for (std::size_t k = 0; k < r->se.size(); ++k)
                CHECK(r->se[k] == doctest::Approx(std::sqrt(r->vcov(k, k))).epsilon(1e-12));
            CHECK(r->log_likelihood == doctest::Approx(log_likelihood(r->distribution, s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("closed-form fit errors") {
    CHECK_THROWS_AS(fit_exponential(make_degree_sample({0, 0, 0})), FitError);
    CHECK_THROWS_AS(fit_exponential(make_degree_sample({3})), FitError);
    CHECK_THROWS_AS(fit_normal(make_degree_sample({4, 4, 4})), FitError);
    std::vector<double> frac{0.5, 1.0, 2.0};
    CHECK_THROWS_AS(fit_poisson(SampleStatistics::of(frac)), FitError);
    CHECK_THROWS_AS(fit_poisson(DegreeSample{}), FitError);
    try {
        fit_normal(make_degree_sample({4, 4}));
    } catch (const FitError& e) {
        CHECK(e.family() == Family::normal);
        CHECK_FALSE(e.reason().empty());
    }
}

// Power law.

TEST_CASE("power-law likelihood matches the direct-sum oracle") {
    auto v = zeta_sample(2.3, 500, 1);
    std::sort(v.begin(), v.end());
    for (double a : {1.5, 2.3, 3.1})
        for (std::uint64_t xm : {1u, 2u, 3u})
            CHECK(powerlaw_log_likelihood(a, xm, v) ==
                  doctest::Approx(oracle::powerlaw_ll_direct(a, xm, v, 200000)).epsilon(1e-9));
}

TEST_CASE("power-law MLE recovers alpha and agrees with the grid oracle") {
    auto v = zeta_sample(2.5, 100000, 2014);
    auto s = make_degree_sample(v);
    auto r = fit_powerlaw(s, 1);
    const double a = std::get<PowerLaw>(r.distribution).alpha;
    CHECK(a >= 2.48);
    CHECK(a <= 2.52);
    CHECK(std::abs(a - oracle::powerlaw_grid_alpha(s.degrees, 1)) <= 2e-4);
    CHECK(r.n == 100000);
    CHECK_FALSE(r.x_min_estimated);
    // Observed-information SE against the asymptotic (alpha - 1)/sqrt(n) scale.
    CHECK(r.se[0] > 0.0);
    CHECK(r.se[0] < (a - 1.0) / std::sqrt(1e5) * 2.0);
}

TEST_CASE("power-law score vanishes at the MLE") {
    auto v = zeta_sample(3.0, 2000, 77);
    auto s = make_degree_sample(v);
    for (std::uint64_t xm : {1u, 2u}) {
        auto r = fit_powerlaw(s, xm);
        const double a = std::get<PowerLaw>(r.distribution).alpha;
        const double h = 1e-5;
        const double up = powerlaw_log_likelihood(a + h, xm, s.degrees);
        const double dn = powerlaw_log_likelihood(a - h, xm, s.degrees);
        CHECK(std::abs(up - dn) / (2 * h) < 1e-3);
        CHECK(r.log_likelihood == doctest::Approx(powerlaw_log_likelihood(a, xm, s.degrees)).epsilon(1e-12));
    }
}

TEST_CASE("x_min scan picks a value and reports the KS distance") {
    // Mixture: a uniform bump below 5 and a clean power law from 5 up.
    std::mt19937_64 rng(9);
    std::vector<std::uint64_t> v;
    std::uniform_int_distribution<std::uint64_t> low(1, 4);
    for (int i = 0; i < 3000; ++i) v.push_back(low(rng));
    for (int i = 0; i < 3000; ++i) {
        std::uint64_t x;
        do x = oracle::sample_zeta(2.5, rng);
        while (x < 5);
        v.push_back(x);
    }
    auto r = fit_powerlaw(make_degree_sample(v));
    const auto& pl = std::get<PowerLaw>(r.distribution);
    CHECK(r.x_min_estimated);
    REQUIRE(r.ks_distance);
    CHECK(pl.x_min >= 4);
    CHECK(pl.x_min <= 7);
    CHECK(*r.ks_distance == doctest::Approx(powerlaw_ks_distance(pl, make_degree_sample(v).degrees)));
    CHECK(r.estimated_parameter_count() == 2);
}

TEST_CASE("power-law boundary and size errors") {
    CHECK_THROWS_AS(fit_powerlaw(make_degree_sample({2, 2, 2}), 2), FitError);
    CHECK_THROWS_AS(fit_powerlaw(make_degree_sample({1, 5}), 3), FitError);
    CHECK_THROWS_AS(fit_powerlaw(make_degree_sample({0, 0, 0})), FitError);
    CHECK_THROWS_AS(fit_powerlaw(DegreeSample{}), FitError);
}

TEST_CASE("log_likelihood examples and support checks") {
    CHECK(log_likelihood(Poisson{1.0}, make_degree_sample({0})) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(log_likelihood(Exponential{0.5}, make_degree_sample({2})) ==
          doctest::Approx(std::log(0.5) - 1.0).epsilon(1e-15));
    CHECK(log_likelihood(Normal{0.0, 1.0}, make_degree_sample({0})) ==
          doctest::Approx(-std::log(std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-15));

    std::vector<double> neg{-1.0}, frac{0.5};
    CHECK_THROWS_AS(log_likelihood(Exponential{1.0}, neg), std::domain_error);
    CHECK_THROWS_AS(log_likelihood(Poisson{1.0}, frac), std::domain_error);
    CHECK_THROWS_AS(log_likelihood(Normal{0.0, 0.0}, frac), std::domain_error);
    // Power law ignores values below x_min.
    CHECK(log_likelihood(PowerLaw{2, 2.5}, make_degree_sample({1, 2})) ==
          doctest::Approx(oracle::powerlaw_ll_direct(2.5, 2, std::vector<std::uint64_t>{2}, 200000)).epsilon(1e-9));
}

TEST_CASE("likelihood at the MLE beats +-10% perturbations (property)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        std::geometric_distribution<std::uint64_t> geo(0.3 + 0.01 * trial);
        std::vector<std::uint64_t> v(300);
        for (auto& x : v) x = geo(rng) + 1;
        auto s = make_degree_sample(v);
        for (Family f : kAllFamilies) {
            FitResult r;
            try {
                r = fit(f, s);
            } catch (const FitError&) {
                continue;
            }
            const double best = r.log_likelihood;
            for (double k : {0.9, 1.1}) {
                Distribution d = r.distribution;
                std::visit(
                    [k](auto& p) {
                        using T = std::decay_t<decltype(p)>;
                        if constexpr (std::is_same_v<T, Exponential>) p.rate *= k;
                        else if constexpr (std::is_same_v<T, Normal>) p.mean *= k;
                        else if constexpr (std::is_same_v<T, Poisson>) p.lambda *= k;
                        else p.alpha = 1.0 + (p.alpha - 1.0) * k;
                    },
                    d);
                CHECK(log_likelihood(d, s) <= best);
                if (auto* nd = std::get_if<Normal>(&d)) {
                    Normal alt = std::get<Normal>(r.distribution);
                    alt.sd *= k;
                    CHECK(log_likelihood(Distribution{alt}, s) <= best);
                    (void)nd;
                }
            }
        }
    }
}

TEST_CASE("estimates fall within 3 SE of truth in >= 99% of 200 replications") {
    std::mt19937_64 rng(4242);
    const std::size_t n = 10000;
    int ok_exp = 0, ok_norm = 0, ok_pois = 0, ok_pl = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> xe(n), xn(n);
        std::exponential_distribution<double> ed(0.7);
        std::normal_distribution<double> nd(3.0, 1.5);
        for (auto& x : xe) x = ed(rng);
        for (auto& x : xn) x = nd(rng);
        std::poisson_distribution<std::uint64_t> pd(2.2);
        std::vector<std::uint64_t> xp(n), xz(n);
        for (auto& x : xp) x = pd(rng);
        for (auto& x : xz) x = oracle::sample_zeta(2.7, rng);

        auto e = fit_exponential(SampleStatistics::of(xe));
        ok_exp += std::abs(std::get<Exponential>(e.distribution).rate - 0.7) <= 3 * e.se[0];
        auto nr = fit_normal(SampleStatistics::of(xn));
        ok_norm += std::abs(std::get<Normal>(nr.distribution).mean - 3.0) <= 3 * nr.se[0] &&
                   std::abs(std::get<Normal>(nr.distribution).sd - 1.5) <= 3 * nr.se[1];
        auto p = fit_poisson(make_degree_sample(xp));
        ok_pois += std::abs(std::get<Poisson>(p.distribution).lambda - 2.2) <= 3 * p.se[0];
        auto z = fit_powerlaw(make_degree_sample(xz), 1);
        ok_pl += std::abs(std::get<PowerLaw>(z.distribution).alpha - 2.7) <= 3 * z.se[0];
    }
    CHECK(ok_exp >= 198);
    CHECK(ok_norm >= 198);
    CHECK(ok_pois >= 198);
    CHECK(ok_pl >= 198);
}

// Selection.

TEST_CASE("min-se reproduces both reference conclusions") {
    auto table1 = select_structure({with_se(Family::exponential, {0.01635166}),
                                    with_se(Family::normal, {0.09059760, 0.06406218}),
                                    with_se(Family::poisson, {0.0460285}),
                                    with_se(Family::power_law, {0.03831463})});
    CHECK(table1.chosen == Family::exponential);
    CHECK(table1.all_fits[1].se_sum() == doctest::Approx(0.15465978).epsilon(1e-9));

    auto table2 = select_structure({with_se(Family::exponential, {0.05514089}),
                                    with_se(Family::normal, {0.07434113, 0.05256712}),
                                    with_se(Family::poisson, {0.08524123}),
                                    with_se(Family::power_law, {0.02865438})});
    CHECK(table2.chosen == Family::power_law);
    CHECK(table2.all_fits[1].se_sum() == doctest::Approx(0.12690825).epsilon(1e-9));
}

TEST_CASE("selection basics") {
    CHECK(select_structure({with_se(Family::poisson, {0.3})}).chosen == Family::poisson);
    CHECK_THROWS_AS(select_structure({}), std::invalid_argument);

    // Ties go to the earlier family regardless of list order.
    auto tie = select_structure({with_se(Family::power_law, {0.1}), with_se(Family::exponential, {0.1})});
    CHECK(tie.chosen == Family::exponential);

    auto ll = select_structure({with_se(Family::exponential, {0.1}, -50.0), with_se(Family::poisson, {0.9}, -40.0)},
                               SelectionRule::max_loglik);
    CHECK(ll.chosen == Family::poisson);
    CHECK(ll.rule == SelectionRule::max_loglik);

    // AIC: normal pays for its extra parameter.
    auto aic = select_structure({with_se(Family::exponential, {0.1}, -100.0),
                                 with_se(Family::normal, {0.1, 0.1}, -99.5)},
                                SelectionRule::aic);
    CHECK(aic.chosen == Family::exponential);

    // NaN scores never win.
    auto nan = select_structure({with_se(Family::exponential, {0.1}, NAN), with_se(Family::normal, {0.1, 0.1}, -5.0)},
                                SelectionRule::max_loglik);
    CHECK(nan.chosen == Family::normal);
}

TEST_CASE("min-se choice is invariant under reordering (property)") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.001, 0.2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FitResult> fits{with_se(Family::exponential, {u(rng)}), with_se(Family::normal, {u(rng), u(rng)}),
                                    with_se(Family::poisson, {u(rng)}), with_se(Family::power_law, {u(rng)})};
        if (trial % 10 == 0) fits[2].se[0] = fits[0].se[0];  // force ties now and then
        const Family want = select_structure(fits).chosen;
        std::sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.family() < b.family(); });
        do {
            CHECK(select_structure(fits).chosen == want);
        } while (std::next_permutation(fits.begin(), fits.end(),
                                       [](const auto& a, const auto& b) { return a.family() < b.family(); }));
    }
}

TEST_CASE("names round-trip") {
    for (Family f : kAllFamilies) CHECK(parse_family(to_string(f)) == f);
    CHECK(parse_family("pl") == Family::power_law);
    CHECK_THROWS_AS(parse_family("gamma"), std::invalid_argument);
    for (auto r : {SelectionRule::min_se, SelectionRule::aic, SelectionRule::max_loglik})
        CHECK(parse_selection_rule(to_string(r)) == r);
}
