#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mpr/allocation.hpp"
#include "mpr/filter.hpp"
#include "mpr/riccati.hpp"

namespace mpr {

enum class ExecMode { Serial, Parallel };

struct SimConfig {
    long n_paths = 100'000;
    int n_steps = 500;
    std::uint64_t seed = 42;
    bool antithetic = true;
    std::vector<double> moment_exponents;                     // E[(W_T)^z] per strategy
    std::vector<double> checkpoint_fractions = {0.25, 0.5, 1.0}; // filter checks at f * T
    bool collect_terminal_wealth = false; // keep per-path W_T samples (ecdf tests)
};

/// A strategy the engine can follow along a path. FullInfo and Myopic read
/// the simulated X, PartialInfo reads only the filtered estimate. The tilt
/// fields support the optimality perturbation tests.
struct StrategySpec {
    enum class Kind { FullInfo, PartialInfo, Myopic, Constant };
    Kind kind = Kind::FullInfo;
    double tilt_scale = 1.0; // theta -> tilt_scale * theta + tilt_shift
    double tilt_shift = 0.0;
    double constant_weight = 0.0;

    bool untilted() const { return tilt_scale == 1.0 && tilt_shift == 0.0; }

    static StrategySpec full() { return {Kind::FullInfo}; }
    static StrategySpec partial() { return {Kind::PartialInfo}; }
    static StrategySpec myopic() { return {Kind::Myopic}; }
    static StrategySpec constant(double weight) {
        StrategySpec s{Kind::Constant};
        s.constant_weight = weight;
        return s;
    }
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0; // standard error of the mean
    long n = 0;
};

struct StrategyStats {
    StrategySpec spec;
    Estimate terminal_wealth;       // E[W_T]
    Estimate utility;               // E[u(W_T)]
    Estimate budget;                // E[xi_T W_T] with xi matching the information kind
    Estimate log_wealth;            // E[ln W_T]
    std::vector<Estimate> moments;  // E[W_T^z] per requested exponent
    // Max over paths of |W_closed_form - W_selffinanced| / W, for the
    // untilted optimal strategies; NaN otherwise.
    double max_closed_form_gap = 0.0;
};

struct FilterCheckpoint {
    double t = 0.0;
    Estimate error_mean;    // E[X_t - pi_t]
    double error_var = 0.0; // Var[X_t - pi_t]
    double error_var_se = 0.0;
    double r_theory = 0.0;  // R(t) from the deterministic ODE
};

struct FilterDiagnostics {
    std::vector<FilterCheckpoint> checkpoints;
    Estimate innov_mean; // mean of dI / sqrt(dt) over all steps and paths
    double innov_var_ratio = 0.0; // sample var of dI divided by dt
};

struct SimResult {
    std::vector<StrategyStats> strategies;
    FilterDiagnostics filter;
    Estimate x_terminal_mean; // exact-sampler self test against OU moments
    double x_terminal_var = 0.0;
    long observations = 0; // pairs when antithetic, paths otherwise
    // Per-path terminal wealth per strategy, when requested in the config.
    std::vector<std::vector<double>> terminal_samples;
};

struct SimInputs {
    MarketParams params;
    const RiccatiSolution* full = nullptr;
    const RiccatiSolution* partial = nullptr;
    const FilterVariance* fv = nullptr;
    std::optional<double> x0_fixed; // conditional mode: X_0 fixed instead of N(pi0, R0)
};

/// Joint simulation of (X, S, filter, xi*, xi~) with exact OU transitions
/// for X and log-Euler updates elsewhere, evaluating every strategy on
/// common random numbers. Results are bit-identical across execution modes
/// and thread counts: each path owns an RNG substream derived from
/// (seed, path index) and the reduction order is fixed.
SimResult simulate_scenarios(const SimInputs& inputs, const SimConfig& config,
                             std::span<const StrategySpec> strategies,
                             ExecMode mode = ExecMode::Parallel);

struct PerturbationResult {
    std::vector<double> epsilons;
    std::vector<double> utility_scaled;  // E[u(W_T)] under theta (1 + eps)
    std::vector<double> utility_shifted; // E[u(W_T)] under theta + eps
    std::vector<double> se_scaled, se_shifted;
    double argmax_scaled = 0.0;
    double argmax_shifted = 0.0;
};

/// Common-random-number tilt study around a base strategy.
PerturbationResult perturbation_test(const SimInputs& inputs, const SimConfig& config,
                                     const StrategySpec& base, std::span<const double> eps_grid,
                                     ExecMode mode = ExecMode::Parallel);

/// Writes up to max_paths simulated paths as CSV for debugging (hard cap 100).
void dump_paths(const SimInputs& inputs, const SimConfig& config, int max_paths,
                std::ostream& out);

} // namespace mpr
