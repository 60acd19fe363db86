#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpr/allocation.hpp"
#include "support/fixtures.hpp"

using namespace mpr;
using mpr::testing::table1;

namespace {

struct Solved {
    MarketParams p;
    RiccatiSolution full;
    FilterVariance fv;
    RiccatiSolution partial;
    QPath q;
    Admissibility adm;
};

Solved solve_all(MarketParams p) {
    p = validate(p);
    const TimeGrid grid = default_grid(p.horizon);
    RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    FilterVariance fv = solve_filter_variance(p, grid);
    RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    QPath q = q_path(full, fv, p);
    Admissibility adm = check_admissibility(full, partial, q, p);
    return {p, std::move(full), std::move(fv), std::move(partial), std::move(q), adm};
}

} // namespace

TEST_CASE("penalty vanishes at the horizon and under log utility") {
    const Solved s = solve_all(table1());
    CHECK(penalty(s.p.horizon, 0.7, s.full, s.p) == 0.0);
    CHECK(penalty(s.p.horizon, -2.0, s.full, s.p) == 0.0);

    MarketParams plog = table1();
    plog.gamma = 1.0;
    const Solved slog = solve_all(plog);
    for (double t : {0.0, 1.7, 4.2}) CHECK(penalty(t, 0.4, slog.full, slog.p) == 0.0);
}

TEST_CASE("penalty size grows as gamma drops to zero and vanishes at log utility") {
    const double rho = 0.0;
    auto nu0 = [&](double gamma) {
        MarketParams p = table1(rho);
        p.gamma = gamma;
        const Solved s = solve_all(p);
        return penalty(0.0, p.pi0, s.full, s.p);
    };
    const double v045 = nu0(0.45), v06 = nu0(0.6), v09 = nu0(0.9);
    CHECK(std::abs(v045) > std::abs(v06));
    CHECK(std::abs(v06) > std::abs(v09));
    CHECK(nu0(1.0) == 0.0);
    // Above log utility the penalty grows from zero with opposite sign.
    // (Evaluating the closed form across gamma shows a saturating increase,
    // with no interior maximum at these parameters.)
    const double v12 = nu0(1.2), v25 = nu0(2.5), v15g = nu0(15.0);
    CHECK(std::abs(v25) > std::abs(v12));
    CHECK(std::abs(v15g) > std::abs(v25));
    CHECK(v09 * v12 < 0.0);
}

TEST_CASE("full-information strategy boundary and myopic reductions") {
    const Solved s = solve_all(table1(0.8));
    const double x = 0.53;
    CHECK(strategy_full(s.p.horizon, x, s.full, s.p) ==
          doctest::Approx(x / (s.p.gamma * s.p.sigma)).epsilon(1e-14));

    MarketParams plog = table1(0.8);
    plog.gamma = 1.0;
    const Solved slog = solve_all(plog);
    CHECK(strategy_full(2.0, x, slog.full, slog.p) == doctest::Approx(x / plog.sigma));

    const Solved s0 = solve_all(table1(0.0));
    for (double t : {0.0, 2.5, 4.9})
        CHECK(strategy_full(t, x, s0.full, s0.p) ==
              doctest::Approx(x / (s0.p.gamma * s0.p.sigma)).epsilon(1e-14));
}

TEST_CASE("strategies are affine in the state (three-point collinearity)") {
    const Solved s = solve_all(table1());
    for (double t : {0.0, 1.3, 3.7}) {
        const double x1 = -0.5, x2 = 0.25, x3 = 1.0;
        const double f1 = strategy_full(t, x1, s.full, s.p);
        const double f2 = strategy_full(t, x2, s.full, s.p);
        const double f3 = strategy_full(t, x3, s.full, s.p);
        CHECK((f2 - f1) / (x2 - x1) == doctest::Approx((f3 - f2) / (x3 - x2)).epsilon(1e-10));
        const double g1 = strategy_partial(t, x1, s.partial, s.fv, s.p);
        const double g2 = strategy_partial(t, x2, s.partial, s.fv, s.p);
        const double g3 = strategy_partial(t, x3, s.partial, s.fv, s.p);
        CHECK((g2 - g1) / (x2 - x1) == doctest::Approx((g3 - g2) / (x3 - x2)).epsilon(1e-10));
    }
}

TEST_CASE("partial strategy decomposes into myopic plus gain-weighted hedge") {
    const Solved s = solve_all(table1());
    for (double t : {0.0, 2.2}) {
        for (double pi : {-0.3, 0.4, 1.1}) {
            const double theta = strategy_partial(t, pi, s.partial, s.fv, s.p);
            const double gain = s.fv.eval(t) + s.p.rho * s.p.sigma_x;
            const double hedge =
                gain / s.p.sigma * (s.partial.eval_b(t) + s.partial.eval_c(t) * pi);
            CHECK(theta - pi / (s.p.gamma * s.p.sigma) == doctest::Approx(hedge).epsilon(1e-12));
        }
    }
}

TEST_CASE("Lagrange multiplier reductions") {
    const Solved s = solve_all(table1());
    // w = 1, x0 = 0: lambda0 = exp(gamma A(0))
    const Multipliers m = lagrange_multipliers(s.full, s.partial, s.p, 0.0);
    CHECK(m.lambda0 == doctest::Approx(std::exp(s.p.gamma * s.full.a(0))).epsilon(1e-12));

    // near-degenerate horizon: lambda0 -> w^{-gamma}
    MarketParams tiny = table1();
    tiny.horizon = 1e-5;
    tiny.w = 2.0;
    const Solved st = solve_all(tiny);
    const Multipliers mt = lagrange_multipliers(st.full, st.partial, st.p, 0.7);
    CHECK(mt.lambda0 == doctest::Approx(std::pow(tiny.w, -tiny.gamma)).epsilon(1e-4));
    CHECK(mt.lambda0_tilde == doctest::Approx(std::pow(tiny.w, -tiny.gamma)).epsilon(1e-4));
}

TEST_CASE("wealth formulas satisfy the budget and first-order conditions") {
    const Solved s = solve_all(table1());
    const double x0 = 0.21;
    const WealthFormula wf = make_wealth_formula(s.full, s.partial, s.adm, s.p, x0);

    CHECK(wf.wealth_full(0.0, 1.0, x0) == doctest::Approx(s.p.w).epsilon(1e-12));
    CHECK(wf.wealth_partial(0.0, 1.0, s.p.pi0) == doctest::Approx(s.p.w).epsilon(1e-12));

    for (double xi : {0.2, 1.0, 3.7}) {
        const double wt = wf.wealth_full(s.p.horizon, xi, 0.9);
        CHECK(std::pow(wt, -s.p.gamma) == doctest::Approx(wf.lambda0() * xi).epsilon(1e-12));
        const double wpt = wf.wealth_partial(s.p.horizon, xi, 0.9);
        CHECK(std::pow(wpt, -s.p.gamma) ==
              doctest::Approx(wf.lambda0_tilde() * xi).epsilon(1e-12));
        // at the horizon the conditional expected utility is the utility itself
        CHECK(wf.expected_utility_full(s.p.horizon, xi, 0.9) ==
              doctest::Approx(utility(wt, s.p.gamma)).epsilon(1e-12));
    }
}

TEST_CASE("unconditional expected utility collapses to the conditional one at zero prior variance") {
    MarketParams p = table1();
    p.r0 = 0.0;
    const Solved s = solve_all(p);
    const WealthFormula wf = make_wealth_formula(s.full, s.partial, s.adm, s.p, p.pi0);
    CHECK(expected_utility_full_unconditional(s.full, s.p) ==
          doctest::Approx(wf.expected_utility_full(0.0, 1.0, p.pi0)).epsilon(1e-12));
}

TEST_CASE("information ordering of unconditional utilities") {
    for (double rho : {-0.93, 0.0, 0.8}) {
        const Solved s = solve_all(table1(rho));
        const double eu_full = expected_utility_full_unconditional(s.full, s.p);
        const double eu_partial = expected_utility_partial_unconditional(s.partial, s.p);
        CHECK(eu_partial <= eu_full);
    }
}

TEST_CASE("Gaussian quadratic expectation reductions and quadrature oracle") {
    // c = 0: lognormal moment
    CHECK(gaussian_quad_expectation(0.3, 1.2, 0.0, 0.4, 0.09) ==
          doctest::Approx(std::exp(0.3 + 1.2 * 0.4 + 0.5 * 1.2 * 1.2 * 0.09)).epsilon(1e-14));
    // a = b = 0, mu = 0: chi-square style integral
    CHECK(gaussian_quad_expectation(0.0, 0.0, 0.8, 0.0, 0.5) ==
          doctest::Approx(1.0 / std::sqrt(1.0 - 0.8 * 0.5)).epsilon(1e-14));

    // quadrature oracle: composite Simpson over the explicit Gaussian integral
    const double mu = 0.0, var = 0.5, a = 0.0, b = 1.0, c = 1.0;
    const double sd = std::sqrt(var);
    const int n = 400000;
    const double lo = mu - 40.0 * sd, hi = mu + 40.0 * sd;
    const double h = (hi - lo) / n;
    auto integrand = [&](double x) {
        return std::exp(a + b * x + 0.5 * c * x * x) *
               std::exp(-(x - mu) * (x - mu) / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    };
    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) acc += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    const double oracle = acc * h / 3.0;
    CHECK(gaussian_quad_expectation(a, b, c, mu, var) ==
          doctest::Approx(oracle).epsilon(1e-10));

    CHECK_THROWS_AS(gaussian_quad_expectation(0.0, 0.0, 2.1, 0.0, 0.5), Error);
}

TEST_CASE("wealth formulas are gated by the sufficient conditions for gamma < 1") {
    MarketParams p = table1(0.0);
    p.gamma = 0.4;
    const Solved probe = solve_all(p);
    REQUIRE(probe.adm.t_star_star.has_value());
    REQUIRE(classify(p).t_star.has_value());
    const double t_fail = *probe.adm.t_star_star + 0.5;
    REQUIRE(t_fail < *classify(p).t_star);

    p.horizon = t_fail;
    const Solved s = solve_all(p);
    CHECK_FALSE(s.adm.full_ok);
    try {
        make_wealth_formula(s.full, s.partial, s.adm, s.p, p.pi0);
        FAIL("expected NotVerified");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotVerified);
    }
}
