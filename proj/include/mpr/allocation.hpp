#pragma once

#include <cmath>
#include <complex>

#include "mpr/riccati.hpp"

namespace mpr {

/// CRRA utility; gamma = 1 is the logarithmic branch.
inline double utility(double x, double gamma) {
    if (gamma == 1.0) return std::log(x);
    return std::pow(x, 1.0 - gamma) / (1.0 - gamma);
}

namespace detail {
inline double real_part(double v) { return v; }
inline double real_part(std::complex<double> v) { return v.real(); }
} // namespace detail

/// E[exp(a + b eps + c eps^2 / 2)] for eps ~ N(mu, var), valid while
/// Re(1 - c var) > 0. Works for real and complex coefficients (principal
/// square root on the complex branch).
template <class T>
T gaussian_quad_expectation(T a, T b, T c, double mu, double var) {
    if (var == 0.0) return std::exp(a + b * mu + 0.5 * c * mu * mu);
    const T den = 1.0 - c * var;
    if (!(detail::real_part(den) > 0.0))
        throw Error(Errc::DivergentExpectation,
                    "Gaussian quadratic expectation diverges: Re(1 - c var) <= 0");
    return std::exp(a + b * b * var / (2.0 * den) + b * mu / den + c * mu * mu / (2.0 * den)) /
           std::sqrt(den);
}

/// Penalty process of the minimax state price density,
/// nu*(t, x) = -gamma (B(t) + C(t) x) sigma_x. Identically zero under log
/// utility.
double penalty(double t, double x, const RiccatiSolution& full, const MarketParams& params);

/// theta*(t, x) = x / (gamma sigma) + rho (sigma_x / sigma) (B(t) + C(t) x).
double strategy_full(double t, double x, const RiccatiSolution& full, const MarketParams& params);

/// thetatilde*(t, pi) with the filter gain R(t) + rho sigma_x in place of
/// rho sigma_x.
double strategy_partial(double t, double pi, const RiccatiSolution& partial,
                        const FilterVariance& fv, const MarketParams& params);

struct Multipliers {
    double lambda0 = 0.0;       // full information, evaluated at the realized X_0
    double lambda0_tilde = 0.0; // partial information, evaluated at the prior mean
};

Multipliers lagrange_multipliers(const RiccatiSolution& full, const RiccatiSolution& partial,
                                 const MarketParams& params, double x0);

/// Closed-form wealth machinery for one parameter set. Construction is gated
/// on the sufficient admissibility conditions when gamma < 1.
class WealthFormula {
  public:
    WealthFormula(const RiccatiSolution& full, const RiccatiSolution& partial,
                  const MarketParams& params, double x0, const Multipliers& mult);

    double lambda0() const { return mult_.lambda0; }
    double lambda0_tilde() const { return mult_.lambda0_tilde; }
    const MarketParams& params() const { return params_; }

    double wealth_full(double t, double xi_star, double x) const;
    double wealth_partial(double t, double xi_tilde, double pi) const;
    double expected_utility_full(double t, double xi_star, double x) const;
    double expected_utility_partial(double t, double xi_tilde, double pi) const;

    double exponent_full(double t, double x) const;    // A + Bx + C x^2 / 2
    double exponent_partial(double t, double pi) const;

  private:
    MarketParams params_;
    Multipliers mult_;
    Pchip a_, b_, c_;    // full-information coefficients
    Pchip at_, bt_, ct_; // partial-information coefficients
};

/// Throws NotVerified when gamma < 1 and the corresponding sufficient
/// condition (Prop.-style inequality) fails; gamma >= 1 is always admitted.
WealthFormula make_wealth_formula(const RiccatiSolution& full, const RiccatiSolution& partial,
                                  const Admissibility& adm, const MarketParams& params, double x0);

/// Unconditional expected optimal utility (X_0 integrated over the prior).
/// Requires Q(0) > 0 and gamma != 1.
double expected_utility_full_unconditional(const RiccatiSolution& full,
                                           const MarketParams& params);

/// Unconditional expected optimal utility under partial information (the
/// time-0 observation sigma-field is trivial, so no integration is needed).
double expected_utility_partial_unconditional(const RiccatiSolution& partial,
                                              const MarketParams& params);

} // namespace mpr
