#include "mpr/mc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mpr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, long k) {
    return splitmix64(seed ^ splitmix64(0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) + 1)));
}

/// Everything a path needs, precomputed on the simulation grid.
struct SimTables {
    int n_steps;
    double dt, sqrt_dt;
    double r, sigma, lambda, sigma_x, x_bar, rho, gamma, w, pi0, r0;
    double rho_perp;     // sqrt(1 - rho^2)
    double e_lambda;     // exp(-lambda dt)
    double ou_m;         // (1 - e^{-lambda dt}) / lambda
    double ou_gain;      // ou_m / dt
    double ou_cond_sd;   // sd of the OU driving integral given the increment
    std::vector<double> b_full, c_full;       // per left node
    std::vector<double> b_part, c_part;       // per left node
    std::vector<double> filter_gain;          // R(t_i) + rho sigma_x
    std::vector<int> checkpoint_idx;
    double a0_full, b0_full, c0_full;         // for per-path lambda0(X_0)
    double lambda0_tilde;
    bool log_utility;

    SimTables(const SimInputs& in, const SimConfig& cfg) {
        const MarketParams& p = in.params;
        n_steps = cfg.n_steps;
        dt = p.horizon / cfg.n_steps;
        sqrt_dt = std::sqrt(dt);
        r = p.r; sigma = p.sigma; lambda = p.lambda; sigma_x = p.sigma_x;
        x_bar = p.x_bar; rho = p.rho; gamma = p.gamma; w = p.w; pi0 = p.pi0; r0 = p.r0;
        rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        e_lambda = std::exp(-lambda * dt);
        ou_m = (1.0 - e_lambda) / lambda;
        ou_gain = ou_m / dt;
        const double ou_var = (1.0 - std::exp(-2.0 * lambda * dt)) / (2.0 * lambda);
        ou_cond_sd = std::sqrt(std::max(0.0, ou_var - ou_m * ou_m / dt));
        log_utility = p.log_utility();

        const auto bf = in.full->interp_b();
        const auto cf = in.full->interp_c();
        const auto bp = in.partial->interp_b();
        const auto cp = in.partial->interp_c();
        const auto rf = in.fv->interp();
        b_full.resize(n_steps); c_full.resize(n_steps);
        b_part.resize(n_steps); c_part.resize(n_steps);
        filter_gain.resize(n_steps);
        for (int i = 0; i < n_steps; ++i) {
            const double t = i * dt;
            b_full[i] = bf(t); c_full[i] = cf(t);
            b_part[i] = bp(t); c_part[i] = cp(t);
            filter_gain[i] = rf(t) + rho * sigma_x;
        }

        a0_full = in.full->a(0); b0_full = in.full->b(0); c0_full = in.full->c(0);
        const double k_part =
            in.partial->a(0) + in.partial->b(0) * pi0 + 0.5 * in.partial->c(0) * pi0 * pi0;
        lambda0_tilde = std::pow(std::exp(k_part) / w, gamma);

        for (double f : cfg.checkpoint_fractions)
            checkpoint_idx.push_back(static_cast<int>(std::lround(f * cfg.n_steps)));
    }
};

/// Per-path outputs for one strategy.
struct PathStrategyOut {
    double wT, util, budget, lnwT, cf_gap;
};

struct PathOut {
    std::vector<PathStrategyOut> strat; // per strategy
    std::vector<double> filter_err;     // X - pi per checkpoint
    double innov_sum, innov_sq_sum;
    double xT;
};

/// One path. normals holds 1 + 4 n_steps standard normals; sign = +-1 flips
/// them for the antithetic twin.
void run_path(const SimTables& tab, const SimInputs& in,
              std::span<const StrategySpec> strategies, std::span<const double> normals,
              double sign, PathOut& out) {
    const double x0 = in.x0_fixed ? *in.x0_fixed
                                  : tab.pi0 + std::sqrt(tab.r0) * sign * normals[0];
    double x = x0;
    double pi = tab.pi0;
    double ln_xi_star = 0.0, ln_xi_tilde = 0.0;
    const std::size_t n_strat = strategies.size();
    thread_local std::vector<double> lnw;
    lnw.assign(n_strat, std::log(tab.w));

    out.innov_sum = 0.0;
    out.innov_sq_sum = 0.0;
    std::size_t cp = 0;
    if (!tab.checkpoint_idx.empty() && tab.checkpoint_idx[0] == 0) {
        out.filter_err[0] = x - pi;
        cp = 1;
    }

    for (int i = 0; i < tab.n_steps; ++i) {
        const double zs = sign * normals[1 + 4 * static_cast<std::size_t>(i)];
        const double zp = sign * normals[2 + 4 * static_cast<std::size_t>(i)];
        const double u1 = sign * normals[3 + 4 * static_cast<std::size_t>(i)];
        const double u2 = sign * normals[4 + 4 * static_cast<std::size_t>(i)];
        const double dzs = tab.sqrt_dt * zs;
        const double dzp = tab.sqrt_dt * zp;

        // strategies act on left-node information
        for (std::size_t s = 0; s < n_strat; ++s) {
            const StrategySpec& sp = strategies[s];
            double theta;
            switch (sp.kind) {
                case StrategySpec::Kind::FullInfo:
                    theta = x / (tab.gamma * tab.sigma) +
                            tab.rho * tab.sigma_x / tab.sigma * (tab.b_full[i] + tab.c_full[i] * x);
                    break;
                case StrategySpec::Kind::PartialInfo:
                    theta = pi / (tab.gamma * tab.sigma) +
                            tab.filter_gain[i] / tab.sigma * (tab.b_part[i] + tab.c_part[i] * pi);
                    break;
                case StrategySpec::Kind::Myopic:
                    theta = x / (tab.gamma * tab.sigma);
                    break;
                case StrategySpec::Kind::Constant:
                default:
                    theta = sp.constant_weight;
                    break;
            }
            theta = sp.tilt_scale * theta + sp.tilt_shift;
            lnw[s] += (tab.r + theta * tab.sigma * x -
                       0.5 * theta * theta * tab.sigma * tab.sigma) * tab.dt +
                      theta * tab.sigma * dzs;
        }

        const double nu = -tab.gamma * (tab.b_full[i] + tab.c_full[i] * x) * tab.sigma_x;
        ln_xi_star += (-tab.r - 0.5 * x * x - 0.5 * nu * nu * tab.rho_perp * tab.rho_perp) * tab.dt -
                      x * dzs - nu * tab.rho_perp * dzp;

        const double d_innov = (x - pi) * tab.dt + dzs;
        ln_xi_tilde += (-tab.r - 0.5 * pi * pi) * tab.dt - pi * d_innov;
        out.innov_sum += d_innov;
        out.innov_sq_sum += d_innov * d_innov;

        pi += -tab.lambda * (pi - tab.x_bar) * tab.dt + tab.filter_gain[i] * d_innov;

        // exact OU transition, jointly Gaussian with the Brownian increments
        const double gs = tab.ou_gain * dzs + tab.ou_cond_sd * u1;
        const double gp = tab.ou_gain * dzp + tab.ou_cond_sd * u2;
        x = tab.x_bar + (x - tab.x_bar) * tab.e_lambda +
            tab.sigma_x * (tab.rho * gs + tab.rho_perp * gp);

        if (cp < tab.checkpoint_idx.size() &&
            i + 1 == tab.checkpoint_idx[cp]) {
            out.filter_err[cp] = x - pi;
            ++cp;
        }
    }
    out.xT = x;

    const double xi_star = std::exp(ln_xi_star);
    const double xi_tilde = std::exp(ln_xi_tilde);
    const double lambda0 =
        std::pow(std::exp(tab.a0_full + tab.b0_full * x0 + 0.5 * tab.c0_full * x0 * x0) / tab.w,
                 tab.gamma);
    for (std::size_t s = 0; s < n_strat; ++s) {
        const StrategySpec& sp = strategies[s];
        const double wT = std::exp(lnw[s]);
        PathStrategyOut& ps = out.strat[s];
        ps.wT = wT;
        ps.lnwT = lnw[s];
        ps.util = utility(wT, tab.gamma);
        const bool partial = sp.kind == StrategySpec::Kind::PartialInfo;
        ps.budget = (partial ? xi_tilde : xi_star) * wT;
        ps.cf_gap = std::numeric_limits<double>::quiet_NaN();
        if (sp.untilted()) {
            if (sp.kind == StrategySpec::Kind::FullInfo) {
                const double w_cf = std::pow(lambda0 * xi_star, -1.0 / tab.gamma);
                ps.cf_gap = std::abs(w_cf - wT) / wT;
            } else if (partial) {
                const double w_cf = std::pow(tab.lambda0_tilde * xi_tilde, -1.0 / tab.gamma);
                ps.cf_gap = std::abs(w_cf - wT) / wT;
            }
        }
    }
}

Estimate mean_se(std::span<const double> obs) {
    Estimate e;
    e.n = static_cast<long>(obs.size());
    if (obs.empty()) return e;
    double sum = 0.0;
    for (double v : obs) sum += v;
    e.mean = sum / static_cast<double>(obs.size());
    double ss = 0.0;
    for (double v : obs) ss += (v - e.mean) * (v - e.mean);
    if (obs.size() > 1)
        e.se = std::sqrt(ss / (static_cast<double>(obs.size()) - 1.0) /
                         static_cast<double>(obs.size()));
    return e;
}

} // namespace

SimResult simulate_scenarios(const SimInputs& inputs, const SimConfig& config,
                             std::span<const StrategySpec> strategies, ExecMode mode) {
    if (config.n_paths < 1 || config.n_steps < 1)
        throw Error(Errc::InvalidParams, "simulation needs n_paths >= 1 and n_steps >= 1");
    if (!inputs.full || !inputs.partial || !inputs.fv)
        throw Error(Errc::InvalidParams, "simulation inputs must reference solved systems");

    const SimTables tab(inputs, config);
    const bool anti = config.antithetic;
    const long n_obs = anti ? (config.n_paths + 1) / 2 : config.n_paths;
    const std::size_t n_strat = strategies.size();
    const std::size_t n_z = config.moment_exponents.size();
    const std::size_t n_cp = tab.checkpoint_idx.size();

    // Per-observation statistic layout, reduced serially afterwards so the
    // result does not depend on the thread count.
    const std::size_t per_strat = 4 + n_z;
    const std::size_t stride = n_strat * per_strat + 2 * n_cp + 4;
    std::vector<double> obs(static_cast<std::size_t>(n_obs) * stride);
    std::vector<double> gap_max(static_cast<std::size_t>(n_obs) * n_strat);
    std::vector<std::vector<double>> samples;
    if (config.collect_terminal_wealth)
        samples.assign(n_strat, std::vector<double>(static_cast<std::size_t>(
                                    anti ? 2 * n_obs : n_obs)));

    const int normals_per_path = 1 + 4 * config.n_steps;

    auto run_observation = [&](long k) {
        std::mt19937_64 eng(substream_seed(config.seed, k));
        std::normal_distribution<double> normal(0.0, 1.0);
        thread_local std::vector<double> normals;
        normals.resize(static_cast<std::size_t>(normals_per_path));
        for (double& v : normals) v = normal(eng);

        thread_local PathOut a, b;
        a.strat.resize(n_strat);
        a.filter_err.assign(n_cp, 0.0);
        run_path(tab, inputs, strategies, normals, +1.0, a);
        const PathOut* second = nullptr;
        if (anti) {
            b.strat.resize(n_strat);
            b.filter_err.assign(n_cp, 0.0);
            run_path(tab, inputs, strategies, normals, -1.0, b);
            second = &b;
        }

        auto pair_avg = [&](auto&& get) {
            return second ? 0.5 * (get(a) + get(*second)) : get(a);
        };

        if (config.collect_terminal_wealth) {
            for (std::size_t s = 0; s < n_strat; ++s) {
                if (anti) {
                    samples[s][2 * static_cast<std::size_t>(k)] = a.strat[s].wT;
                    samples[s][2 * static_cast<std::size_t>(k) + 1] = second->strat[s].wT;
                } else {
                    samples[s][static_cast<std::size_t>(k)] = a.strat[s].wT;
                }
            }
        }

        double* row = obs.data() + static_cast<std::size_t>(k) * stride;
        std::size_t col = 0;
        for (std::size_t s = 0; s < n_strat; ++s) {
            row[col++] = pair_avg([&](const PathOut& p) { return p.strat[s].wT; });
            row[col++] = pair_avg([&](const PathOut& p) { return p.strat[s].util; });
            row[col++] = pair_avg([&](const PathOut& p) { return p.strat[s].budget; });
            row[col++] = pair_avg([&](const PathOut& p) { return p.strat[s].lnwT; });
            for (std::size_t j = 0; j < n_z; ++j) {
                const double z = config.moment_exponents[j];
                row[col++] = pair_avg(
                    [&](const PathOut& p) { return std::exp(z * p.strat[s].lnwT); });
            }
            double g = a.strat[s].cf_gap;
            if (second) g = std::max(g, second->strat[s].cf_gap);
            gap_max[static_cast<std::size_t>(k) * n_strat + s] = g;
        }
        for (std::size_t c = 0; c < n_cp; ++c) {
            row[col++] = pair_avg([&](const PathOut& p) { return p.filter_err[c]; });
            row[col++] = pair_avg(
                [&](const PathOut& p) { return p.filter_err[c] * p.filter_err[c]; });
        }
        row[col++] = pair_avg([&](const PathOut& p) { return p.innov_sum; });
        row[col++] = pair_avg([&](const PathOut& p) { return p.innov_sq_sum; });
        row[col++] = pair_avg([&](const PathOut& p) { return p.xT; });
        row[col++] = pair_avg([&](const PathOut& p) { return p.xT * p.xT; });
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (long k = 0; k < n_obs; ++k) run_observation(k);
    } else {
        for (long k = 0; k < n_obs; ++k) run_observation(k);
    }

    // Deterministic serial reduction.
    SimResult result;
    result.observations = n_obs;
    auto column = [&](std::size_t c) {
        std::vector<double> v(static_cast<std::size_t>(n_obs));
        for (long k = 0; k < n_obs; ++k) v[static_cast<std::size_t>(k)] =
            obs[static_cast<std::size_t>(k) * stride + c];
        return v;
    };

    std::size_t col = 0;
    for (std::size_t s = 0; s < n_strat; ++s) {
        StrategyStats st;
        st.spec = strategies[s];
        st.terminal_wealth = mean_se(column(col++));
        st.utility = mean_se(column(col++));
        st.budget = mean_se(column(col++));
        st.log_wealth = mean_se(column(col++));
        for (std::size_t j = 0; j < n_z; ++j) st.moments.push_back(mean_se(column(col++)));
        double g = std::numeric_limits<double>::quiet_NaN();
        if (strategies[s].untilted() && (strategies[s].kind == StrategySpec::Kind::FullInfo ||
                                         strategies[s].kind == StrategySpec::Kind::PartialInfo)) {
            g = 0.0;
            for (long k = 0; k < n_obs; ++k)
                g = std::max(g, gap_max[static_cast<std::size_t>(k) * n_strat + s]);
        }
        st.max_closed_form_gap = g;
        result.strategies.push_back(std::move(st));
    }

    const double t_horizon = inputs.params.horizon;
    for (std::size_t c = 0; c < n_cp; ++c) {
        FilterCheckpoint cp;
        cp.t = tab.checkpoint_idx[c] * tab.dt;
        cp.error_mean = mean_se(column(col));
        const Estimate sq = mean_se(column(col + 1));
        cp.error_var = sq.mean - cp.error_mean.mean * cp.error_mean.mean;
        cp.error_var_se = sq.se;
        cp.r_theory = inputs.fv->eval(std::min(cp.t, t_horizon));
        result.filter.checkpoints.push_back(cp);
        col += 2;
    }

    const Estimate innov_sum = mean_se(column(col++));
    const Estimate innov_sq = mean_se(column(col++));
    const double n_steps_d = static_cast<double>(config.n_steps);
    result.filter.innov_mean.mean = innov_sum.mean / n_steps_d / tab.sqrt_dt;
    result.filter.innov_mean.se = innov_sum.se / n_steps_d / tab.sqrt_dt;
    result.filter.innov_mean.n = n_obs;
    result.filter.innov_var_ratio = innov_sq.mean / n_steps_d / tab.dt;

    result.x_terminal_mean = mean_se(column(col++));
    const Estimate x_sq = mean_se(column(col++));
    result.x_terminal_var = x_sq.mean - result.x_terminal_mean.mean * result.x_terminal_mean.mean;
    result.terminal_samples = std::move(samples);
    return result;
}

PerturbationResult perturbation_test(const SimInputs& inputs, const SimConfig& config,
                                     const StrategySpec& base, std::span<const double> eps_grid,
                                     ExecMode mode) {
    std::vector<StrategySpec> strategies;
    for (double eps : eps_grid) {
        StrategySpec s = base;
        s.tilt_scale = base.tilt_scale * (1.0 + eps);
        strategies.push_back(s);
    }
    for (double eps : eps_grid) {
        StrategySpec s = base;
        s.tilt_shift = base.tilt_shift + eps;
        strategies.push_back(s);
    }

    SimConfig cfg = config;
    cfg.moment_exponents.clear();
    const SimResult res = simulate_scenarios(inputs, cfg, strategies, mode);

    PerturbationResult out;
    out.epsilons.assign(eps_grid.begin(), eps_grid.end());
    const std::size_t m = eps_grid.size();
    for (std::size_t i = 0; i < m; ++i) {
        out.utility_scaled.push_back(res.strategies[i].utility.mean);
        out.se_scaled.push_back(res.strategies[i].utility.se);
        out.utility_shifted.push_back(res.strategies[m + i].utility.mean);
        out.se_shifted.push_back(res.strategies[m + i].utility.se);
    }
    const auto arg_scaled = std::distance(
        out.utility_scaled.begin(),
        std::max_element(out.utility_scaled.begin(), out.utility_scaled.end()));
    const auto arg_shifted = std::distance(
        out.utility_shifted.begin(),
        std::max_element(out.utility_shifted.begin(), out.utility_shifted.end()));
    out.argmax_scaled = out.epsilons[static_cast<std::size_t>(arg_scaled)];
    out.argmax_shifted = out.epsilons[static_cast<std::size_t>(arg_shifted)];
    return out;
}

void dump_paths(const SimInputs& inputs, const SimConfig& config, int max_paths,
                std::ostream& out) {
    const int count = std::min({max_paths, 100, static_cast<int>(config.n_paths)});
    const SimTables tab(inputs, config);
    out << std::setprecision(17);
    out << "path,t,x,s,pi,xi_star,xi_tilde\n";
    for (int k = 0; k < count; ++k) {
        std::mt19937_64 eng(substream_seed(config.seed, k));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> normals(static_cast<std::size_t>(1 + 4 * config.n_steps));
        for (double& v : normals) v = normal(eng);

        double x = inputs.x0_fixed ? *inputs.x0_fixed
                                   : tab.pi0 + std::sqrt(tab.r0) * normals[0];
        double pi = tab.pi0, ln_s = 0.0, ln_xi_star = 0.0, ln_xi_tilde = 0.0;
        out << k << ",0," << x << ",1," << pi << ",1,1\n";
        for (int i = 0; i < config.n_steps; ++i) {
            const double dzs = tab.sqrt_dt * normals[1 + 4 * static_cast<std::size_t>(i)];
            const double dzp = tab.sqrt_dt * normals[2 + 4 * static_cast<std::size_t>(i)];
            const double u1 = normals[3 + 4 * static_cast<std::size_t>(i)];
            const double u2 = normals[4 + 4 * static_cast<std::size_t>(i)];
            const double nu = -tab.gamma * (tab.b_full[i] + tab.c_full[i] * x) * tab.sigma_x;
            ln_xi_star += (-tab.r - 0.5 * x * x -
                           0.5 * nu * nu * tab.rho_perp * tab.rho_perp) * tab.dt -
                          x * dzs - nu * tab.rho_perp * dzp;
            const double dlns =
                (tab.r + tab.sigma * x - 0.5 * tab.sigma * tab.sigma) * tab.dt + tab.sigma * dzs;
            ln_s += dlns;
            const double d_innov = (x - pi) * tab.dt + dzs;
            ln_xi_tilde += (-tab.r - 0.5 * pi * pi) * tab.dt - pi * d_innov;
            pi += -tab.lambda * (pi - tab.x_bar) * tab.dt + tab.filter_gain[i] * d_innov;
            const double gs = tab.ou_gain * dzs + tab.ou_cond_sd * u1;
            const double gp = tab.ou_gain * dzp + tab.ou_cond_sd * u2;
            x = tab.x_bar + (x - tab.x_bar) * tab.e_lambda +
                tab.sigma_x * (tab.rho * gs + tab.rho_perp * gp);
            out << k << ',' << (i + 1) * tab.dt << ',' << x << ',' << std::exp(ln_s) << ','
                << pi << ',' << std::exp(ln_xi_star) << ',' << std::exp(ln_xi_tilde) << '\n';
        }
    }
}

} // namespace mpr
