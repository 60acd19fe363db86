#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "mpr/filter.hpp"
#include "mpr/mc.hpp"
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

    SimInputs inputs() const { return SimInputs{p, &full, &partial, &fv, {}}; }
};

Solved solve_all(MarketParams p) {
    p = validate(p);
    const TimeGrid grid = default_grid(p.horizon);
    RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    FilterVariance fv = solve_filter_variance(p, grid);
    RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    return {p, grid, std::move(full), std::move(fv), std::move(partial)};
}

bool within_se(const Estimate& est, double target, double k) {
    return std::abs(est.mean - target) <= k * est.se;
}

} // namespace

TEST_CASE("degenerate factor: constant theta wealth is lognormal with known mean") {
    MarketParams p = table1(0.0);
    p.sigma_x = 1e-10;
    p.r0 = 0.0;
    const Solved s = solve_all(p);
    SimInputs in = s.inputs();
    in.x0_fixed = p.pi0;

    SimConfig cfg;
    cfg.n_paths = 40000;
    cfg.n_steps = 100;
    cfg.seed = 5;
    const StrategySpec strat[] = {StrategySpec::constant(0.5)};
    const SimResult res = simulate_scenarios(in, cfg, strat);

    const double expect = p.w * std::exp((p.r + 0.5 * p.sigma * p.pi0) * p.horizon);
    CHECK(within_se(res.strategies[0].terminal_wealth, expect, 3.0));
    // X stays put without factor noise
    CHECK(res.x_terminal_mean.mean == doctest::Approx(p.pi0).epsilon(1e-8));
    CHECK(res.x_terminal_var <= 1e-12);
}

TEST_CASE("exact OU sampler self test against the transition moments") {
    const Solved s = solve_all(table1(-0.5));
    SimConfig cfg;
    cfg.n_paths = 60000;
    cfg.n_steps = 50;
    cfg.seed = 11;
    cfg.antithetic = false; // pair averaging cancels linear statistics exactly
    const StrategySpec strat[] = {StrategySpec::myopic()};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, strat);

    const MarketParams& p = s.p;
    const double decay = std::exp(-p.lambda * p.horizon);
    const double mean = p.x_bar + (p.pi0 - p.x_bar) * decay;
    const double var = p.r0 * decay * decay +
                       p.sigma_x * p.sigma_x * (1.0 - decay * decay) / (2.0 * p.lambda);
    CHECK(within_se(res.x_terminal_mean, mean, 3.0));
    CHECK(res.x_terminal_var == doctest::Approx(var).epsilon(0.04));
}

TEST_CASE("budget identities hold for both information regimes") {
    const Solved s = solve_all(table1());
    SimConfig cfg;
    cfg.n_paths = 40000;
    cfg.n_steps = 250;
    cfg.seed = 42;
    const StrategySpec strat[] = {StrategySpec::full(), StrategySpec::partial()};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, strat);
    CHECK(within_se(res.strategies[0].budget, s.p.w, 3.0));
    CHECK(within_se(res.strategies[1].budget, s.p.w, 3.0));
}

TEST_CASE("reproducibility: same seed bit-identical, serial equals parallel") {
    const Solved s = solve_all(table1());
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.n_steps = 60;
    cfg.seed = 99;
    const StrategySpec strat[] = {StrategySpec::full(), StrategySpec::partial()};
    const SimResult a = simulate_scenarios(s.inputs(), cfg, strat, ExecMode::Parallel);
    const SimResult b = simulate_scenarios(s.inputs(), cfg, strat, ExecMode::Parallel);
    const SimResult c = simulate_scenarios(s.inputs(), cfg, strat, ExecMode::Serial);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.strategies[i].terminal_wealth.mean == b.strategies[i].terminal_wealth.mean);
        CHECK(a.strategies[i].terminal_wealth.mean == c.strategies[i].terminal_wealth.mean);
        CHECK(a.strategies[i].utility.mean == c.strategies[i].utility.mean);
        CHECK(a.strategies[i].budget.se == c.strategies[i].budget.se);
    }
    CHECK(a.x_terminal_mean.mean == c.x_terminal_mean.mean);
}

TEST_CASE("antithetic variates do not hurt the terminal-wealth estimator") {
    const Solved s = solve_all(table1());
    SimConfig plain;
    plain.n_paths = 20000;
    plain.n_steps = 100;
    plain.seed = 7;
    plain.antithetic = false;
    SimConfig anti = plain;
    anti.antithetic = true;
    const StrategySpec strat[] = {StrategySpec::full()};
    const SimResult rp = simulate_scenarios(s.inputs(), plain, strat);
    const SimResult ra = simulate_scenarios(s.inputs(), anti, strat);
    CHECK(ra.strategies[0].terminal_wealth.se <= rp.strategies[0].terminal_wealth.se);
    // and the two estimators agree statistically
    const double gap = std::abs(ra.strategies[0].terminal_wealth.mean -
                                rp.strategies[0].terminal_wealth.mean);
    CHECK(gap <= 4.0 * (ra.strategies[0].terminal_wealth.se +
                        rp.strategies[0].terminal_wealth.se));
}

TEST_CASE("closed-form wealth tracks the self-financed path, tighter with finer steps") {
    const Solved s = solve_all(table1());
    const StrategySpec strat[] = {StrategySpec::full(), StrategySpec::partial()};

    SimConfig coarse;
    coarse.n_paths = 2000;
    coarse.n_steps = 200;
    coarse.seed = 13;
    SimConfig fine = coarse;
    fine.n_steps = 800;
    const SimResult rc = simulate_scenarios(s.inputs(), coarse, strat);
    const SimResult rf = simulate_scenarios(s.inputs(), fine, strat);
    for (std::size_t i = 0; i < 2; ++i) {
        const double ratio = rc.strategies[i].max_closed_form_gap /
                             rf.strategies[i].max_closed_form_gap;
        CHECK(ratio > 1.2); // ~2 expected for a 4x step refinement at order 1/2
        CHECK(ratio < 4.5);
    }

    SimConfig spec_dt; // dt = 1e-3 as in the stated 2% bound
    spec_dt.n_paths = 2000;
    spec_dt.n_steps = 5000;
    spec_dt.seed = 13;
    const SimResult rs = simulate_scenarios(s.inputs(), spec_dt, strat);
    CHECK(rs.strategies[0].max_closed_form_gap <= 0.02);
    CHECK(rs.strategies[1].max_closed_form_gap <= 0.02);
}

TEST_CASE("filter consistency: estimate is unbiased with variance R(t)") {
    const Solved s = solve_all(table1());
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.n_steps = 500;
    cfg.seed = 2024;
    cfg.antithetic = false; // keep honest standard errors for the mean checks
    const StrategySpec strat[] = {StrategySpec::partial()};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, strat);
    REQUIRE(res.filter.checkpoints.size() == 3);
    for (const FilterCheckpoint& cp : res.filter.checkpoints) {
        CHECK(within_se(cp.error_mean, 0.0, 3.0));
        CHECK(cp.error_var == doctest::Approx(cp.r_theory).epsilon(0.05));
    }
    CHECK(within_se(res.filter.innov_mean, 0.0, 3.0));
    CHECK(res.filter.innov_var_ratio == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("inline filter recursion matches the filter module on a dumped path") {
    const Solved s = solve_all(table1(-0.4));
    SimConfig cfg;
    cfg.n_paths = 3;
    cfg.n_steps = 40;
    cfg.seed = 31;
    std::ostringstream dump;
    dump_paths(s.inputs(), cfg, 1, dump);

    // parse the S and pi columns of path 0
    std::istringstream in(dump.str());
    std::string line;
    std::getline(in, line); // header
    std::vector<double> s_vals, pi_vals;
    while (std::getline(in, line)) {
        double cols[7];
        std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &cols[0], &cols[1], &cols[2],
                    &cols[3], &cols[4], &cols[5], &cols[6]);
        s_vals.push_back(cols[3]);
        pi_vals.push_back(cols[4]);
    }
    REQUIRE(s_vals.size() == static_cast<std::size_t>(cfg.n_steps) + 1);

    const TimeGrid grid{0.0, s.p.horizon, cfg.n_steps};
    const FilterVariance fv = solve_filter_variance(s.p, grid);
    const FilterPath path = run_filter(s.p, make_price_path(grid, s_vals), fv);
    for (std::size_t i = 0; i < pi_vals.size(); ++i)
        CHECK(path.pi_vals[i] == doctest::Approx(pi_vals[i]).epsilon(1e-6));
}

TEST_CASE("perturbation test: the optimum sits at zero tilt") {
    const Solved s = solve_all(table1());
    SimConfig cfg;
    cfg.n_paths = 30000;
    cfg.n_steps = 200;
    cfg.seed = 8;
    const std::vector<double> eps{-0.25, -0.2, -0.15, -0.1, -0.05, 0.0,
                                  0.05,  0.1,  0.15,  0.2,  0.25};
    const PerturbationResult full_t =
        perturbation_test(s.inputs(), cfg, StrategySpec::full(), eps);
    CHECK(std::abs(full_t.argmax_scaled) <= 0.05 + 1e-12);
    CHECK(std::abs(full_t.argmax_shifted) <= 0.05 + 1e-12);
    // eps = 0 reproduces the base strategy estimate
    const StrategySpec base[] = {StrategySpec::full()};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, base);
    CHECK(full_t.utility_scaled[5] == res.strategies[0].utility.mean);

    const PerturbationResult part_t =
        perturbation_test(s.inputs(), cfg, StrategySpec::partial(), eps);
    CHECK(std::abs(part_t.argmax_scaled) <= 0.05 + 1e-12);
    CHECK(std::abs(part_t.argmax_shifted) <= 0.05 + 1e-12);
}

TEST_CASE("dropping the hedging demand costs utility beyond noise") {
    const Solved s = solve_all(table1());
    SimConfig cfg;
    cfg.n_paths = 40000;
    cfg.n_steps = 200;
    cfg.seed = 21;
    const StrategySpec strat[] = {StrategySpec::full(), StrategySpec::myopic()};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, strat);
    const double diff = res.strategies[0].utility.mean - res.strategies[1].utility.mean;
    CHECK(diff > 3.0 * (res.strategies[0].utility.se + res.strategies[1].utility.se));
}

TEST_CASE("log utility: the myopic rule beats constant weights in expected log wealth") {
    MarketParams p = table1();
    p.gamma = 1.0;
    const Solved s = solve_all(p);
    SimConfig cfg;
    cfg.n_paths = 30000;
    cfg.n_steps = 200;
    cfg.seed = 4;
    const StrategySpec strat[] = {StrategySpec::full(), StrategySpec::constant(0.0),
                                  StrategySpec::constant(0.5), StrategySpec::constant(1.0),
                                  StrategySpec::constant(2.0)};
    const SimResult res = simulate_scenarios(s.inputs(), cfg, strat);
    for (std::size_t i = 1; i < 5; ++i) {
        CHECK(res.strategies[0].log_wealth.mean >
              res.strategies[i].log_wealth.mean +
                  3.0 * (res.strategies[0].log_wealth.se + res.strategies[i].log_wealth.se));
    }
}
