#include <doctest.h>

#include <cmath>
#include <complex>

#include "mpr/allocation.hpp"
#include "mpr/mgf.hpp"
#include "support/fixtures.hpp"

using namespace mpr;
using mpr::testing::table1;

namespace {

struct Solved {
    MarketParams p;
    TimeGrid grid;
    RiccatiSolution full;
    FilterVariance fv;
    RiccatiSolution partial;
};

Solved solve_all(MarketParams p) {
    p = validate(p);
    const TimeGrid grid = default_grid(p.horizon);
    RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    FilterVariance fv = solve_filter_variance(p, grid);
    RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    return {p, grid, std::move(full), std::move(fv), std::move(partial)};
}

} // namespace

TEST_CASE("zeroth moment: z = 0 gives identically zero coefficients and phi = 1") {
    const Solved s = solve_all(table1());
    const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, {0.0, 0.0});
    for (int i = 0; i <= m.grid.n; i += 100) {
        CHECK(std::abs(m.d(i)) == 0.0);
        CHECK(std::abs(m.e(i)) == 0.0);
        CHECK(std::abs(m.h(i)) == 0.0);
    }
    CHECK(evaluate_mgf(m, 0.0, 1.0, s.p.pi0, 2.3).real() == 1.0);
    const MgfCoefficients mp =
        solve_mgf_partial(s.p, s.partial, s.fv, s.p.horizon, {0.0, 0.0});
    CHECK(evaluate_mgf(mp, 0.0, 1.0, s.p.pi0, 2.3).real() == 1.0);
}

TEST_CASE("boundary identity: z = 1 - gamma collapses onto the Riccati solutions") {
    for (double rho : {-0.93, 0.0, 0.8}) {
        const Solved s = solve_all(table1(rho));
        const Complex z{1.0 - s.p.gamma, 0.0};
        const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, z);
        const MgfCoefficients mp = solve_mgf_partial(s.p, s.partial, s.fv, s.p.horizon, z);
        REQUIRE(m.grid.n == s.grid.n);
        for (int i = 0; i <= s.grid.n; i += 25) {
            CHECK(std::abs(m.d(i).real() - s.full.a(i)) <= 1e-8);
            CHECK(std::abs(m.e(i).real() - s.full.b(i)) <= 1e-8);
            CHECK(std::abs(m.h(i).real() - s.full.c(i)) <= 1e-8);
            CHECK(std::abs(mp.d(i).real() - s.partial.a(i)) <= 1e-8);
            CHECK(std::abs(mp.e(i).real() - s.partial.b(i)) <= 1e-8);
            CHECK(std::abs(mp.h(i).real() - s.partial.c(i)) <= 1e-8);
        }
    }
}

TEST_CASE("s = t_eval evaluation returns the wealth power by construction") {
    const Solved s = solve_all(table1());
    const double x0 = 0.3;
    const Multipliers mult = lagrange_multipliers(s.full, s.partial, s.p, x0);
    const WealthFormula wf(s.full, s.partial, s.p, x0, mult);
    for (double z : {0.5, 1.0, 2.0}) {
        const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, {z, 0.0});
        for (double xi : {0.4, 1.7}) {
            const double w_t = wf.wealth_full(s.p.horizon, xi, 0.8);
            const Complex phi = evaluate_mgf(m, s.p.horizon, xi, 0.8, mult.lambda0);
            CHECK(phi.real() == doctest::Approx(std::pow(w_t, z)).epsilon(1e-10));
            CHECK(phi.imag() == 0.0);
        }
    }
}

TEST_CASE("z = 1 - gamma at s = 0 reproduces the conditional expected utility") {
    const Solved s = solve_all(table1());
    const double x0 = 0.55;
    const Multipliers mult = lagrange_multipliers(s.full, s.partial, s.p, x0);
    const WealthFormula wf(s.full, s.partial, s.p, x0, mult);
    const Complex z{1.0 - s.p.gamma, 0.0};
    const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, z);
    const double via_mgf =
        evaluate_mgf(m, 0.0, 1.0, x0, mult.lambda0).real() / (1.0 - s.p.gamma);
    CHECK(via_mgf == doctest::Approx(wf.expected_utility_full(0.0, 1.0, x0)).epsilon(1e-9));
}

TEST_CASE("characteristic-function modulus bound and conjugate symmetry") {
    const Solved s = solve_all(table1());
    for (double u : {0.3, 1.0, 4.0, 15.0}) {
        const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, {0.0, u});
        const Complex phi = evaluate_mgf(m, 0.0, 1.0, s.p.pi0, 1.9);
        CHECK(std::abs(phi) <= 1.0 + 1e-12);

        const MgfCoefficients mc = solve_mgf_full(s.p, s.full, s.p.horizon, {0.7, -u});
        const MgfCoefficients mpz = solve_mgf_full(s.p, s.full, s.p.horizon, {0.7, u});
        const Complex a = evaluate_mgf(mc, 0.0, 1.0, s.p.pi0, 1.9);
        const Complex b = std::conj(evaluate_mgf(mpz, 0.0, 1.0, s.p.pi0, 1.9));
        CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-12));
        CHECK(a.imag() == doctest::Approx(b.imag()).epsilon(1e-12));
    }
}

TEST_CASE("time consistency: restarting from interior boundary data reproduces s = 0") {
    const Solved s = solve_all(table1());
    const Complex z{1.3, 0.8};
    const MgfCoefficients direct = solve_mgf_full(s.p, s.full, s.p.horizon, z);
    const int i_mid = s.grid.n / 2;
    const double t_mid = s.grid.node(i_mid);
    const MgfCoefficients restarted = solve_mgf_full(
        s.p, s.full, t_mid, z,
        std::array<Complex, 3>{direct.d(i_mid), direct.e(i_mid), direct.h(i_mid)});
    CHECK(std::abs(restarted.d(0) - direct.d(0)) <= 1e-10);
    CHECK(std::abs(restarted.e(0) - direct.e(0)) <= 1e-10);
    CHECK(std::abs(restarted.h(0) - direct.h(0)) <= 1e-10);

    const MgfCoefficients pdirect = solve_mgf_partial(s.p, s.partial, s.fv, s.p.horizon, z);
    const MgfCoefficients prestart = solve_mgf_partial(
        s.p, s.partial, s.fv, t_mid, z,
        std::array<Complex, 3>{pdirect.d(i_mid), pdirect.e(i_mid), pdirect.h(i_mid)});
    CHECK(std::abs(prestart.d(0) - pdirect.d(0)) <= 1e-10);
}

TEST_CASE("unconditional moment at zero prior variance equals the conditional one") {
    MarketParams p = table1();
    p.r0 = 0.0;
    const Solved s = solve_all(p);
    for (double z : {0.5, 2.0}) {
        const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, {z, 0.0});
        const Complex uncond = unconditional_mgf(m, s.p, s.full);
        const Complex cond = conditional_mgf_at_x0(m, s.p, s.full, p.pi0);
        CHECK(uncond.real() == doctest::Approx(cond.real()).epsilon(1e-12));
    }
}

TEST_CASE("z = 1 - gamma unconditional moment reproduces the Gaussian utility formula") {
    const Solved s = solve_all(table1());
    const Complex z{1.0 - s.p.gamma, 0.0};
    const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, z);
    const Complex phi = unconditional_mgf(m, s.p, s.full);
    const double eu = expected_utility_full_unconditional(s.full, s.p);
    CHECK(phi.real() == doctest::Approx((1.0 - s.p.gamma) * eu).epsilon(1e-9));
    CHECK(std::abs(phi.imag()) <= 1e-14);

    const MgfCoefficients mp = solve_mgf_partial(s.p, s.partial, s.fv, s.p.horizon, z);
    const Complex phip = unconditional_mgf(mp, s.p, s.partial);
    const double eup = expected_utility_partial_unconditional(s.partial, s.p);
    CHECK(phip.real() == doctest::Approx((1.0 - s.p.gamma) * eup).epsilon(1e-9));
}

TEST_CASE("moments beyond the analyticity strip are reported, not returned") {
    const Solved s = solve_all(table1());
    // The X0 integration diverges first, the coefficient system later.
    {
        const MgfCoefficients m = solve_mgf_full(s.p, s.full, s.p.horizon, {20.0, 0.0});
        CHECK_THROWS_AS((void)unconditional_mgf(m, s.p, s.full), Error);
    }
    try {
        (void)solve_mgf_full(s.p, s.full, s.p.horizon, {160.0, 0.0});
        FAIL("expected MomentExplosion");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MomentExplosion);
    }
}
