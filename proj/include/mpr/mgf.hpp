#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "mpr/riccati.hpp"

namespace mpr {

using Complex = std::complex<double>;

/// Coefficients of the exponential-affine moment generating function of
/// log-wealth, phi_s(t, z) = (lambda0 xi_s)^{-z/gamma} exp(D + E x + H x^2/2),
/// solved backward on [0, t_eval]. The paper states the system for real
/// z > 0; complex z is the analytic continuation integrated with complex
/// arithmetic, with non-convergence reported as MomentExplosion.
struct MgfCoefficients {
    TimeGrid grid; // over [0, t_eval], subgrid of the Riccati grid
    InfoKind kind = InfoKind::FullInfo;
    Complex z;
    double gamma = 0.0;
    double t_eval = 0.0;
    std::vector<Complex> d_vals, e_vals, h_vals; // per node, size grid.n + 1

    Complex d(int i) const { return d_vals[static_cast<std::size_t>(i)]; }
    Complex e(int i) const { return e_vals[static_cast<std::size_t>(i)]; }
    Complex h(int i) const { return h_vals[static_cast<std::size_t>(i)]; }
};

/// Backward solve with boundary D = zA, E = zB, H = zC at t_eval. t_eval is
/// snapped to the nearest node of the Riccati grid so the coefficient
/// functions are sampled at solver-exact stage values. boundary_override
/// restarts the integration from given (D, E, H) terminal data instead,
/// which is how the martingale time-consistency of the system is checked.
MgfCoefficients solve_mgf_full(const MarketParams& params, const RiccatiSolution& full,
                               double t_eval, Complex z,
                               std::optional<std::array<Complex, 3>> boundary_override = {});

MgfCoefficients solve_mgf_partial(const MarketParams& params, const RiccatiSolution& partial,
                                  const FilterVariance& fv, double t_eval, Complex z,
                                  std::optional<std::array<Complex, 3>> boundary_override = {});

/// phi_s(t, z) for the given state-price-density value and state (x or pi).
Complex evaluate_mgf(const MgfCoefficients& coeffs, double s, double xi_value,
                     double state_value, double lambda0);

/// Time-0 moment with the prior integrated out. Full information folds the
/// X_0 dependence of lambda0 into an exp-quadratic and applies the Gaussian
/// quadratic expectation (principal square root); partial information needs
/// no integration since the time-0 observation sigma-field is trivial.
/// `sol` must be the Riccati solution the coefficients were built from.
Complex unconditional_mgf(const MgfCoefficients& coeffs, const MarketParams& params,
                          const RiccatiSolution& sol);

/// Time-0 moment conditional on X_0 = x0 (full information; lambda0 is then
/// evaluated at x0 as well).
Complex conditional_mgf_at_x0(const MgfCoefficients& coeffs, const MarketParams& params,
                              const RiccatiSolution& full, double x0);

} // namespace mpr
