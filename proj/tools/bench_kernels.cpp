// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: Monte Carlo path loop, characteristic-function curve, and
// the value-of-information sweep. Results must agree bitwise; the speedup
// column is what varies with the machine.

#include <cstdio>
#include <omp.h>
#include <vector>

#include "mpr/density.hpp"
#include "mpr/mc.hpp"
#include "mpr/voi.hpp"

using namespace mpr;

namespace {

MarketParams table1() {
    MarketParams p;
    p.r = 0.034;
    p.sigma = 0.144;
    p.lambda = 0.19;
    p.sigma_x = 0.1875;
    p.x_bar = 0.3958;
    p.rho = -0.93;
    p.pi0 = 0.3958;
    p.r0 = 0.09;
    p.horizon = 5.0;
    p.gamma = 5.0;
    p.w = 1.0;
    return p;
}

template <class F>
double timed(F&& f) {
    const double t0 = omp_get_wtime();
    f();
    return omp_get_wtime() - t0;
}

} // namespace

int main() {
    const MarketParams p = table1();
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, classify(p), grid);
    const FilterVariance fv = solve_filter_variance(p, grid);
    const RiccatiSolution partial = solve_partial_riccati(p, fv, grid);
    const SimInputs inputs{p, &full, &partial, &fv, {}};

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

    {
        SimConfig cfg;
        cfg.n_paths = 20000;
        cfg.n_steps = 250;
        const std::vector<StrategySpec> strategies{StrategySpec::full(),
                                                   StrategySpec::partial()};
        SimResult rs, rp;
        const double ts =
            timed([&] { rs = simulate_scenarios(inputs, cfg, strategies, ExecMode::Serial); });
        const double tp = timed(
            [&] { rp = simulate_scenarios(inputs, cfg, strategies, ExecMode::Parallel); });
        const bool same = rs.strategies[0].terminal_wealth.mean ==
                          rp.strategies[0].terminal_wealth.mean;
        std::printf("%-28s %10.3f %10.3f %8.2f  %s\n", "mc paths (20k x 250)", ts, tp, ts / tp,
                    same ? "bitwise-equal" : "MISMATCH");
    }

    {
        std::vector<double> us(2001);
        for (std::size_t j = 0; j < us.size(); ++j) us[j] = 0.25 * static_cast<double>(j);
        std::vector<Complex> cs, cp;
        const double ts = timed([&] {
            cs = cf_curve(p, partial, &fv, Conditioning::Unconditional, p.pi0, 1.0, us,
                          ExecMode::Serial);
        });
        const double tp = timed([&] {
            cp = cf_curve(p, partial, &fv, Conditioning::Unconditional, p.pi0, 1.0, us,
                          ExecMode::Parallel);
        });
        const bool same = cs == cp;
        std::printf("%-28s %10.3f %10.3f %8.2f  %s\n", "cf curve (2001 pts)", ts, tp, ts / tp,
                    same ? "bitwise-equal" : "MISMATCH");
    }

    {
        std::vector<double> r0s(24);
        for (std::size_t i = 0; i < r0s.size(); ++i)
            r0s[i] = 0.01 + static_cast<double>(i) * 0.04;
        std::vector<InfoValueReport> vs, vp;
        const double ts =
            timed([&] { vs = voi_sweep(p, SweepAxis::R0, r0s, ExecMode::Serial); });
        const double tp =
            timed([&] { vp = voi_sweep(p, SweepAxis::R0, r0s, ExecMode::Parallel); });
        bool same = true;
        for (std::size_t i = 0; i < r0s.size(); ++i)
            same = same && vs[i].v_dynamic == vp[i].v_dynamic;
        std::printf("%-28s %10.3f %10.3f %8.2f  %s\n", "voi sweep (24 pts)", ts, tp, ts / tp,
                    same ? "bitwise-equal" : "MISMATCH");
    }
    return 0;
}
