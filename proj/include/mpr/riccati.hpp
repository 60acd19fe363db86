#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mpr/grid.hpp"
#include "mpr/params.hpp"

namespace mpr {

enum class InfoKind { FullInfo, PartialInfo };

/// Backward solution of a Riccati triple on [0, T]. Values are stored on the
/// half grid (2n+1 points, spacing h/2) so that downstream ODE solves can
/// sample exact stage values; node accessors expose the requested grid.
struct RiccatiSolution {
    TimeGrid grid;
    InfoKind kind = InfoKind::FullInfo;
    RegimeReport regime;
    std::vector<double> a_half, b_half, c_half; // A,B,C (or tilde), size 2n+1
    double certified_error = 0.0; // Richardson estimate of max abs error at t = 0

    double a(int i) const { return a_half[2 * static_cast<std::size_t>(i)]; }
    double b(int i) const { return b_half[2 * static_cast<std::size_t>(i)]; }
    double c(int i) const { return c_half[2 * static_cast<std::size_t>(i)]; }
    double a_mid(int i) const { return a_half[2 * static_cast<std::size_t>(i) + 1]; }
    double b_mid(int i) const { return b_half[2 * static_cast<std::size_t>(i) + 1]; }
    double c_mid(int i) const { return c_half[2 * static_cast<std::size_t>(i) + 1]; }

    std::vector<double> a_vals() const; // per-node copies
    std::vector<double> b_vals() const;
    std::vector<double> c_vals() const;

    double eval_a(double t) const;
    double eval_b(double t) const;
    double eval_c(double t) const;

    Pchip interp_a() const;
    Pchip interp_b() const;
    Pchip interp_c() const;
};

/// Deterministic filter variance R(t), solved forward from R(0) = r0.
/// Stored on the quarter grid (4n+1 points) so the partial-information
/// backward solves can sample their RK4 stages exactly.
struct FilterVariance {
    TimeGrid grid;
    double r0 = 0.0;
    double r_infty = 0.0;
    std::vector<double> r_quarter; // size 4n+1

    double r(int i) const { return r_quarter[4 * static_cast<std::size_t>(i)]; }
    double r_half(int k) const { return r_quarter[2 * static_cast<std::size_t>(k)]; }
    std::vector<double> r_vals() const;
    double eval(double t) const;
    Pchip interp() const;
};

/// Q(t) = 1 - gamma C(t) R(t), the bridge between the two Riccati systems.
struct QPath {
    TimeGrid grid;
    std::vector<double> q_half; // size 2n+1, all strictly positive

    double q(int i) const { return q_half[2 * static_cast<std::size_t>(i)]; }
    double eval(double t) const;
};

/// Analytic fixed point of the filter-variance ODE (positive root of the
/// stationarity quadratic).
double filter_variance_fixed_point(const MarketParams& params);

/// Backward RK4 integration of the homogeneous full-information system with
/// terminal data A(T) = B(T) = C(T) = 0.
/// Throws HorizonBeyondCriticalTime in the tangent regime with T >= T*, and
/// SolutionBlowUp if the integration diverges.
RiccatiSolution solve_full_riccati(const MarketParams& params, const RegimeReport& regime,
                                   const TimeGrid& grid);

/// Forward integration of the scalar variance ODE. r0_override replaces
/// params.r0 (used for the second solve the value-of-information needs).
FilterVariance solve_filter_variance(const MarketParams& params, const TimeGrid& grid,
                                     std::optional<double> r0_override = std::nullopt);

/// Backward RK4 integration of the non-homogeneous partial-information
/// system with time-varying coefficients built from R(t).
RiccatiSolution solve_partial_riccati(const MarketParams& params, const FilterVariance& fv,
                                      const TimeGrid& grid);

/// Partial-information solution obtained algebraically from the full one:
/// Ctilde = C/Q, Btilde = B/Q, Atilde by composite-Simpson quadrature of its
/// ODE right-hand side. Throws QNonPositive if Q fails to stay positive.
std::pair<RiccatiSolution, QPath> via_q_relation(const RiccatiSolution& full,
                                                 const FilterVariance& fv,
                                                 const MarketParams& params);

QPath q_path(const RiccatiSolution& full, const FilterVariance& fv, const MarketParams& params);

/// Sufficient-condition report for the closed-form wealth representations.
struct Admissibility {
    bool full_ok = false;
    bool partial_ok = false;
    bool via_gamma_branch = false; // gamma > 1 short-circuit
    double cond_full_lhs = 0.0;    // 1 - 4 C(0) max(R0, v_T)
    double cond_partial_lhs = 0.0; // same with C(0)/Q(0)
    // Largest horizon at which the full-information condition still holds;
    // empty when it holds for every tested horizon.
    std::optional<double> t_star_star;
};

Admissibility check_admissibility(const RiccatiSolution& full, const RiccatiSolution& partial,
                                  const QPath& q, const MarketParams& params);

/// Largest horizon on which the full-information sufficient condition holds
/// (bisection on T after a forward scan); empty when it holds on the whole
/// scanned range [0, tau_cap], which is always the case for gamma >= 1.
std::optional<double> max_admissible_horizon(const MarketParams& params, double tau_cap);

/// Empirical blow-up scan of C on horizons up to tau_max, in time-to-go
/// form. Returns the horizon at which |C| first exceeds the divergence
/// threshold (refined by step bisection), or nothing if C stays finite.
struct BlowUpReport {
    bool blew_up = false;
    double tau = 0.0;    // empirical blow-up horizon when blew_up
    double c_peak = 0.0; // |C| at the last finite step
};

BlowUpReport detect_blowup(const MarketParams& params, double tau_max);

} // namespace mpr
