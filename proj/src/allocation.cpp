#include "mpr/allocation.hpp"

#include <sstream>

namespace mpr {

double penalty(double t, double x, const RiccatiSolution& full, const MarketParams& params) {
    if (params.log_utility()) return 0.0;
    return -params.gamma * (full.eval_b(t) + full.eval_c(t) * x) * params.sigma_x;
}

double strategy_full(double t, double x, const RiccatiSolution& full, const MarketParams& params) {
    const double myopic = x / (params.gamma * params.sigma);
    if (params.log_utility()) return myopic;
    return myopic +
           params.rho * params.sigma_x / params.sigma * (full.eval_b(t) + full.eval_c(t) * x);
}

double strategy_partial(double t, double pi, const RiccatiSolution& partial,
                        const FilterVariance& fv, const MarketParams& params) {
    const double myopic = pi / (params.gamma * params.sigma);
    if (params.log_utility()) return myopic;
    const double gain = fv.eval(t) + params.rho * params.sigma_x;
    return myopic + gain / params.sigma * (partial.eval_b(t) + partial.eval_c(t) * pi);
}

Multipliers lagrange_multipliers(const RiccatiSolution& full, const RiccatiSolution& partial,
                                 const MarketParams& params, double x0) {
    const double k_full = full.a(0) + full.b(0) * x0 + 0.5 * full.c(0) * x0 * x0;
    const double k_part = partial.a(0) + partial.b(0) * params.pi0 +
                          0.5 * partial.c(0) * params.pi0 * params.pi0;
    Multipliers m;
    m.lambda0 = std::pow(std::exp(k_full) / params.w, params.gamma);
    m.lambda0_tilde = std::pow(std::exp(k_part) / params.w, params.gamma);
    return m;
}

WealthFormula::WealthFormula(const RiccatiSolution& full, const RiccatiSolution& partial,
                             const MarketParams& params, double x0, const Multipliers& mult)
    : params_(params), mult_(mult), a_(full.interp_a()), b_(full.interp_b()),
      c_(full.interp_c()), at_(partial.interp_a()), bt_(partial.interp_b()),
      ct_(partial.interp_c()) {
    (void)x0;
}

double WealthFormula::exponent_full(double t, double x) const {
    return a_(t) + b_(t) * x + 0.5 * c_(t) * x * x;
}

double WealthFormula::exponent_partial(double t, double pi) const {
    return at_(t) + bt_(t) * pi + 0.5 * ct_(t) * pi * pi;
}

double WealthFormula::wealth_full(double t, double xi_star, double x) const {
    return std::pow(mult_.lambda0 * xi_star, -1.0 / params_.gamma) *
           std::exp(exponent_full(t, x));
}

double WealthFormula::wealth_partial(double t, double xi_tilde, double pi) const {
    return std::pow(mult_.lambda0_tilde * xi_tilde, -1.0 / params_.gamma) *
           std::exp(exponent_partial(t, pi));
}

double WealthFormula::expected_utility_full(double t, double xi_star, double x) const {
    const double gamma = params_.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams,
                    "log utility has no power-form expected-utility representation");
    return std::pow(mult_.lambda0 * xi_star, 1.0 - 1.0 / gamma) *
           std::exp(exponent_full(t, x)) / (1.0 - gamma);
}

double WealthFormula::expected_utility_partial(double t, double xi_tilde, double pi) const {
    const double gamma = params_.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams,
                    "log utility has no power-form expected-utility representation");
    return std::pow(mult_.lambda0_tilde * xi_tilde, 1.0 - 1.0 / gamma) *
           std::exp(exponent_partial(t, pi)) / (1.0 - gamma);
}

WealthFormula make_wealth_formula(const RiccatiSolution& full, const RiccatiSolution& partial,
                                  const Admissibility& adm, const MarketParams& params,
                                  double x0) {
    if (params.gamma < 1.0) {
        if (!adm.full_ok) {
            std::ostringstream msg;
            msg << "full-information sufficient condition failed: 1 - 4 C(0) max(R0, v_T) = "
                << adm.cond_full_lhs << " <= 0";
            throw Error(Errc::NotVerified, msg.str());
        }
        if (!adm.partial_ok) {
            std::ostringstream msg;
            msg << "partial-information sufficient condition failed: "
                   "1 - 4 C(0)/Q(0) max(R0, v_T) = "
                << adm.cond_partial_lhs << " <= 0";
            throw Error(Errc::NotVerified, msg.str());
        }
    }
    return WealthFormula(full, partial, params, x0,
                         lagrange_multipliers(full, partial, params, x0));
}

double expected_utility_full_unconditional(const RiccatiSolution& full,
                                           const MarketParams& params) {
    const double gamma = params.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams,
                    "log utility has no power-form expected-utility representation");
    const double c0 = full.c(0);
    const double q0 = 1.0 - gamma * c0 * params.r0;
    if (!(q0 > 0.0)) {
        std::ostringstream msg;
        msg << "Q(0) = " << q0 << " <= 0; the unconditional expected utility does not exist";
        throw Error(Errc::QNonPositive, msg.str());
    }
    const double g = gaussian_quad_expectation(gamma * full.a(0), gamma * full.b(0), gamma * c0,
                                               params.pi0, params.r0);
    return std::pow(params.w, 1.0 - gamma) / (1.0 - gamma) * g;
}

double expected_utility_partial_unconditional(const RiccatiSolution& partial,
                                              const MarketParams& params) {
    const double gamma = params.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams,
                    "log utility has no power-form expected-utility representation");
    const double k = partial.a(0) + partial.b(0) * params.pi0 +
                     0.5 * partial.c(0) * params.pi0 * params.pi0;
    return std::pow(params.w, 1.0 - gamma) / (1.0 - gamma) * std::exp(gamma * k);
}

} // namespace mpr
