#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "mpr/riccati.hpp"
#include "support/fixtures.hpp"

using namespace mpr;
using mpr::testing::table1;

namespace {

// Independent oracle: plain fixed-step RK4 over the node grid at 10x finer
// resolution, written against the ODE system directly.
std::array<double, 3> oracle_full_at_zero(const MarketParams& p, double T, int steps) {
    const double a = (1.0 - p.gamma) / (p.gamma * p.gamma);
    const double b = 2.0 * (-p.lambda + (1.0 - p.gamma) / p.gamma * p.rho * p.sigma_x);
    const double c = p.sigma_x * p.sigma_x * (p.rho * p.rho + p.gamma * (1.0 - p.rho * p.rho));
    auto rhs = [&](const std::array<double, 3>& y) {
        const double B = y[1], C = y[2];
        return std::array<double, 3>{
            (p.gamma - 1.0) / p.gamma * p.r - B * p.lambda * p.x_bar -
                0.5 * C * p.sigma_x * p.sigma_x - 0.5 * c * B * B,
            -C * p.lambda * p.x_bar - (0.5 * b + c * C) * B,
            -a - b * C - c * C * C};
    };
    std::array<double, 3> y{0.0, 0.0, 0.0};
    const double h = -T / steps;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = rhs(y);
        std::array<double, 3> t;
        for (int j = 0; j < 3; ++j) t[j] = y[j] + 0.5 * h * k1[j];
        const auto k2 = rhs(t);
        for (int j = 0; j < 3; ++j) t[j] = y[j] + 0.5 * h * k2[j];
        const auto k3 = rhs(t);
        for (int j = 0; j < 3; ++j) t[j] = y[j] + h * k3[j];
        const auto k4 = rhs(t);
        for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
    }
    return y;
}

} // namespace

TEST_CASE("terminal boundary is hit exactly") {
    const MarketParams p = table1();
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    CHECK(full.a(grid.n) == 0.0);
    CHECK(full.b(grid.n) == 0.0);
    CHECK(full.c(grid.n) == 0.0);

    const FilterVariance fv = solve_filter_variance(p, grid);
    const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    CHECK(partial.a(grid.n) == 0.0);
    CHECK(partial.b(grid.n) == 0.0);
    CHECK(partial.c(grid.n) == 0.0);
}

TEST_CASE("full solve agrees with the independent 10x finer oracle") {
    for (double rho : {-0.93, 0.0, 0.8}) {
        const MarketParams p = table1(rho);
        const TimeGrid grid = default_grid(p.horizon);
        const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
        const auto o = oracle_full_at_zero(p, p.horizon, 10 * grid.n);
        CHECK(full.a(0) == doctest::Approx(o[0]).epsilon(1e-8));
        CHECK(full.b(0) == doctest::Approx(o[1]).epsilon(1e-8));
        CHECK(full.c(0) == doctest::Approx(o[2]).epsilon(1e-8));
        CHECK(full.certified_error <= 1e-8);
    }
}

TEST_CASE("gamma = 5 has negative increasing C") {
    const MarketParams p = table1();
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    CHECK(full.c(0) < 0.0);
    for (int i = 0; i < grid.n; ++i) CHECK(full.c(i) < full.c(i + 1));
}

TEST_CASE("tangent horizon past T* is refused") {
    MarketParams p = table1(0.0);
    p.gamma = 0.4;
    p.horizon = 25.0;
    const RegimeReport reg = classify(p);
    REQUIRE(reg.regime == Regime::Tangent);
    try {
        solve_full_riccati(p, reg, default_grid(p.horizon));
        FAIL("expected HorizonBeyondCriticalTime");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::HorizonBeyondCriticalTime);
    }
}

TEST_CASE("numerical blow-up time matches the critical-time formula") {
    MarketParams p = table1(0.0);
    p.gamma = 0.4;
    const RegimeReport reg = classify(p);
    REQUIRE(reg.t_star.has_value());
    const BlowUpReport rep = detect_blowup(p, 25.0);
    REQUIRE(rep.blew_up);
    CHECK(std::abs(rep.tau - *reg.t_star) <= 1e-3);
}

TEST_CASE("filter variance steady states match the reported values") {
    CHECK(solve_filter_variance(table1(0.0), default_grid(5.0)).r_infty ==
          doctest::Approx(0.0769).epsilon(5e-4 / 0.0769));
    CHECK(solve_filter_variance(table1(-0.9), default_grid(5.0)).r_infty ==
          doctest::Approx(0.0632).epsilon(5e-4 / 0.0632));
    CHECK(solve_filter_variance(table1(0.9), default_grid(5.0)).r_infty ==
          doctest::Approx(0.0092).epsilon(5e-4 / 0.0092));
}

TEST_CASE("filter variance started at the fixed point stays there") {
    MarketParams p = table1(0.3);
    const TimeGrid grid = default_grid(p.horizon);
    const double rinf = filter_variance_fixed_point(p);
    const FilterVariance fv = solve_filter_variance(p, grid, rinf);
    for (int i = 0; i <= grid.n; ++i) CHECK(fv.r(i) == doctest::Approx(rinf).epsilon(1e-12));
}

TEST_CASE("filter variance is monotone toward the fixed point and nonnegative") {
    for (double r0 : {0.0, 0.02, 0.09, 0.8}) {
        MarketParams p = table1(-0.5);
        p.r0 = r0;
        const TimeGrid grid = default_grid(p.horizon);
        const FilterVariance fv = solve_filter_variance(p, grid);
        CHECK(fv.r(0) == r0);
        const double dir = r0 < fv.r_infty ? 1.0 : -1.0;
        for (int i = 0; i < grid.n; ++i) {
            CHECK(dir * (fv.r(i + 1) - fv.r(i)) >= -1e-14);
            CHECK(fv.r(i) >= 0.0);
        }
    }
}

TEST_CASE("partial solve and the Q-relation shortcut agree") {
    for (double rho : {-0.93, 0.0, 0.8}) {
        for (double gamma : {0.7, 5.0}) {
            for (double r0 : {0.0, 0.09, 0.5}) {
                MarketParams p = table1(rho);
                p.gamma = gamma;
                p.r0 = r0;
                const TimeGrid grid = default_grid(p.horizon);
                const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
                const FilterVariance fv = solve_filter_variance(p, grid);
                const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
                const auto [tilde, q] = via_q_relation(full, fv, p);
                for (int i = 0; i <= grid.n; i += 10) {
                    const double scale_c = 1.0 + std::abs(full.c(i));
                    CHECK(std::abs(partial.c(i) - tilde.c(i)) <= 1e-6 * scale_c);
                    const double scale_b = 1.0 + std::abs(full.b(i));
                    CHECK(std::abs(partial.b(i) - tilde.b(i)) <= 1e-6 * scale_b);
                    const double scale_a = 1.0 + std::abs(full.a(i));
                    CHECK(std::abs(partial.a(i) - tilde.a(i)) <= 1e-6 * scale_a);
                }
            }
        }
    }
}

TEST_CASE("Q-relation identities: Q(T) = 1 and Q(0) = 1 at zero prior variance") {
    MarketParams p = table1();
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);

    const FilterVariance fv = solve_filter_variance(p, grid);
    const auto [tilde, q] = via_q_relation(full, fv, p);
    CHECK(q.q(grid.n) == 1.0);
    for (int i = 0; i <= grid.n; ++i) CHECK(q.q(i) > 0.0);

    const FilterVariance fv0 = solve_filter_variance(p, grid, 0.0);
    const auto [tilde0, q0] = via_q_relation(full, fv0, p);
    CHECK(q0.q(0) == 1.0);
    CHECK(tilde0.c(0) == full.c(0));
    CHECK(tilde0.b(0) == full.b(0));
}

TEST_CASE("gamma > 1 is admissible through the gamma branch") {
    const MarketParams p = table1();
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    const FilterVariance fv = solve_filter_variance(p, grid);
    const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    const QPath q = q_path(full, fv, p);
    const Admissibility adm = check_admissibility(full, partial, q, p);
    CHECK(adm.via_gamma_branch);
    CHECK(adm.full_ok);
    CHECK(adm.partial_ok);
    CHECK_FALSE(adm.t_star_star.has_value());
}

TEST_CASE("T** is stricter than the Riccati existence horizon") {
    MarketParams p = table1(0.0);
    p.gamma = 0.4;
    p.horizon = 5.0;
    const RegimeReport reg = classify(p);
    REQUIRE(reg.t_star.has_value());
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, reg, grid);
    const FilterVariance fv = solve_filter_variance(p, grid);
    const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    const QPath q = q_path(full, fv, p);
    const Admissibility adm = check_admissibility(full, partial, q, p);
    REQUIRE(adm.t_star_star.has_value());
    CHECK(*adm.t_star_star < *reg.t_star);
    CHECK(*adm.t_star_star > 0.0);
}

TEST_CASE("zero prior variance reduces the admissibility bound to its stationary term") {
    MarketParams p = table1(0.0);
    p.gamma = 0.6;
    p.r0 = 0.0;
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    const FilterVariance fv = solve_filter_variance(p, grid);
    const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    const QPath q = q_path(full, fv, p);
    const Admissibility adm = check_admissibility(full, partial, q, p);

    const double v_term = p.sigma_x * p.sigma_x / (2.0 * p.lambda) *
                          (1.0 - std::exp(-2.0 * p.lambda * p.horizon));
    CHECK(adm.cond_full_lhs ==
          doctest::Approx(1.0 - 4.0 * full.c(0) * v_term).epsilon(1e-12));
}

TEST_CASE("halving the grid step moves t = 0 values less than the certified error") {
    const MarketParams p = table1();
    const TimeGrid coarse{0.0, p.horizon, 2000};
    const TimeGrid fine{0.0, p.horizon, 4000};
    const RegimeReport reg = classify(p);
    const RiccatiSolution s1 = solve_full_riccati(p, reg, coarse);
    const RiccatiSolution s2 = solve_full_riccati(p, reg, fine);
    CHECK(std::abs(s1.a(0) - s2.a(0)) <= 1e-8);
    CHECK(std::abs(s1.b(0) - s2.b(0)) <= 1e-8);
    CHECK(std::abs(s1.c(0) - s2.c(0)) <= 1e-8);
}

TEST_CASE("log utility collapses the systems to zero") {
    MarketParams p = table1();
    p.gamma = 1.0;
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    for (int i = 0; i <= grid.n; ++i) {
        CHECK(full.a(i) == 0.0);
        CHECK(full.b(i) == 0.0);
        CHECK(full.c(i) == 0.0);
    }
}
