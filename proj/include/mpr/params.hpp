#pragma once

#include <optional>

#include "mpr/errors.hpp"

namespace mpr {

/// Model constants. Rates are per year, volatilities per square-root year.
struct MarketParams {
    double r = 0.0;       // risk-free rate
    double sigma = 0.0;   // stock volatility, > 0
    double lambda = 0.0;  // mean-reversion speed of the market price of risk, > 0
    double sigma_x = 0.0; // volatility of the market price of risk, > 0
    double x_bar = 0.0;   // long-run mean of the market price of risk, >= 0
    double rho = 0.0;     // correlation between stock and factor shocks, in [-1, 1]
    double pi0 = 0.0;     // prior mean of X_0
    double r0 = 0.0;      // prior variance of X_0, >= 0
    double horizon = 0.0; // investment horizon T in years, > 0
    double gamma = 0.0;   // relative risk aversion, > 0 (gamma = 1 is log utility)
    double w = 1.0;       // initial wealth, > 0

    bool log_utility() const { return gamma == 1.0; }
};

/// Checks every constraint and returns the validated record, or throws a
/// ValidationError listing all violations at once.
MarketParams validate(const MarketParams& raw);

enum class Regime {
    WellBehavedNormal,
    Tangent,
    WellBehavedHyperbolic,
    LogUtility,
    // rho == rho* with 0 < gamma <= gamma*: outside the four classified cases.
    BoundaryUndetermined,
};

const char* regime_name(Regime regime);

/// Constants of the quadratic Riccati coefficient and the critical values
/// that decide on which horizons the backward system stays finite.
struct RegimeReport {
    double a = 0.0; // (1 - gamma) / gamma^2
    double b = 0.0; // 2(-lambda + ((1 - gamma)/gamma) rho sigma_x)
    double c = 0.0; // sigma_x^2 (rho^2 + gamma (1 - rho^2))
    double delta = 0.0;
    double p = 0.0;
    double q = 0.0;
    double rho_star = 0.0;
    std::optional<double> gamma_star; // defined when rho >= rho_star
    Regime regime = Regime::WellBehavedNormal;
    std::optional<double> eta;    // sqrt(-delta), tangent regime only
    std::optional<double> t_star; // finite blow-up horizon, tangent regime only

    bool log_utility() const { return regime == Regime::LogUtility; }
};

/// Deterministic, pure classification of a validated parameter set.
RegimeReport classify(const MarketParams& params);

} // namespace mpr
