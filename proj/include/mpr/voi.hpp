#pragma once

#include <string>
#include <vector>

#include "mpr/allocation.hpp"
#include "mpr/mc.hpp"

namespace mpr {

/// Closed-form value of information and certainty equivalents for one
/// parameter set. Certainty equivalents are reported as CE/w, the sure
/// wealth fraction with the same expected utility.
struct InfoValueReport {
    double axis_value = 0.0; // sweep coordinate, 0 for single-point reports
    double v_initial = 0.0;  // V^I in [0, 1)
    double v_dynamic = 0.0;  // V^D in [0, 1)
    double dw_initial = 0.0; // reservation prices, wealth units
    double dw_dynamic = 0.0;
    double ce_partial = 0.0;
    double ce_partial_r0zero = 0.0;
    double ce_full = 0.0;
    // Ingredients, recorded for diagnostics and figure scripts.
    double a0 = 0.0;         // A(0), full information
    double a0_tilde_r0 = 0.0; // Atilde(0) with the filter started at r0
    double a0_tilde_0 = 0.0;  // Atilde(0) with the filter started at 0
    double b0 = 0.0;
    double c0 = 0.0;
    double q0 = 0.0;
    bool admissible = true;
    std::string flag;
};

/// Both information values from already-solved systems. partial_at_r0 and
/// partial_at_zero are the partial-information solves with the filter
/// variance started at params.r0 and at 0 respectively.
InfoValueReport info_values(const MarketParams& params, const RiccatiSolution& full,
                            const RiccatiSolution& partial_at_r0,
                            const RiccatiSolution& partial_at_zero);

/// Convenience: solves everything on the default grid first.
InfoValueReport info_value_report(const MarketParams& params);

/// Expected utility of the investor who will learn X_0 exactly at time 0
/// and then trades under partial information, evaluated ex ante over the
/// prior (right-hand side of the initial-information indifference
/// equation). `wealth` is her starting wealth.
double expected_utility_initial_information(const MarketParams& params,
                                            const RiccatiSolution& full,
                                            const RiccatiSolution& partial_at_zero,
                                            double wealth);

enum class SweepAxis { R0, Horizon, Rho, Gamma };

const char* sweep_axis_name(SweepAxis axis);

/// Vectorized reports along one parameter axis; inadmissible points are
/// flagged, not thrown.
std::vector<InfoValueReport> voi_sweep(const MarketParams& params, SweepAxis axis,
                                       std::span<const double> values,
                                       ExecMode mode = ExecMode::Parallel);

} // namespace mpr
