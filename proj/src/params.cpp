#include "mpr/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mpr {

namespace {

bool all_finite(const MarketParams& p) {
    for (double v : {p.r, p.sigma, p.lambda, p.sigma_x, p.x_bar, p.rho, p.pi0, p.r0,
                     p.horizon, p.gamma, p.w}) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string num(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

} // namespace

MarketParams validate(const MarketParams& raw) {
    using K = ParamIssue::Kind;
    std::vector<ParamIssue> issues;
    auto add = [&](K kind, std::string message) {
        issues.push_back(ParamIssue{kind, std::move(message)});
    };

    if (!all_finite(raw)) add(K::NonFinite, "all parameters must be finite");
    if (raw.sigma <= 0.0) add(K::NegativeVolatility, "sigma must be > 0, got " + num(raw.sigma));
    if (raw.sigma_x <= 0.0)
        add(K::NegativeVolatility, "sigma_x must be > 0, got " + num(raw.sigma_x));
    if (raw.lambda <= 0.0)
        add(K::NonPositiveMeanReversion, "lambda must be > 0, got " + num(raw.lambda));
    if (raw.x_bar < 0.0) add(K::NegativeLongRunMean, "x_bar must be >= 0, got " + num(raw.x_bar));
    if (raw.rho < -1.0 || raw.rho > 1.0)
        add(K::CorrelationOutOfRange, "rho must lie in [-1, 1], got " + num(raw.rho));
    if (raw.r0 < 0.0) add(K::NegativePriorVariance, "r0 must be >= 0, got " + num(raw.r0));
    if (raw.horizon <= 0.0)
        add(K::NonPositiveHorizon, "horizon must be > 0, got " + num(raw.horizon));
    if (raw.gamma <= 0.0) add(K::NonPositiveGamma, "gamma must be > 0, got " + num(raw.gamma));
    // Power-utility exponents 1/(1 - gamma) are numerically hopeless right
    // next to 1; the exact value 1 selects the log-utility mode instead.
    if (raw.gamma != 1.0 && std::abs(raw.gamma - 1.0) < 1e-9)
        add(K::GammaTooCloseToOne,
            "gamma within 1e-9 of 1; set gamma = 1 exactly for log utility");
    if (raw.w <= 0.0) add(K::NonPositiveWealth, "w must be > 0, got " + num(raw.w));

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return raw;
}

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::WellBehavedNormal: return "WellBehavedNormal";
        case Regime::Tangent: return "Tangent";
        case Regime::WellBehavedHyperbolic: return "WellBehavedHyperbolic";
        case Regime::LogUtility: return "LogUtility";
        case Regime::BoundaryUndetermined: return "BoundaryUndetermined";
    }
    return "Unknown";
}

RegimeReport classify(const MarketParams& params) {
    const double gamma = params.gamma;
    const double lambda = params.lambda;
    const double sigma_x = params.sigma_x;
    const double rho = params.rho;

    RegimeReport report;
    report.p = lambda * lambda + 2.0 * lambda * rho * sigma_x + sigma_x * sigma_x;
    report.q = 2.0 * lambda * rho * sigma_x + sigma_x * sigma_x;
    report.rho_star = std::max(-sigma_x / (2.0 * lambda), -1.0);

    if (params.log_utility()) {
        // a = 0 collapses the quadratic; A = B = C = 0 identically.
        report.a = 0.0;
        report.b = -2.0 * lambda;
        report.c = sigma_x * sigma_x;
        report.delta = report.b * report.b;
        report.regime = Regime::LogUtility;
        if (rho >= report.rho_star) report.gamma_star = report.q / report.p;
        return report;
    }

    report.a = (1.0 - gamma) / (gamma * gamma);
    report.b = 2.0 * (-lambda + (1.0 - gamma) / gamma * rho * sigma_x);
    report.c = sigma_x * sigma_x * (rho * rho + gamma * (1.0 - rho * rho));
    report.delta = report.b * report.b - 4.0 * report.a * report.c;

    if (rho < report.rho_star) {
        report.regime = Regime::WellBehavedNormal; // case iv: q < 0, delta > 0
        return report;
    }

    const double gamma_star = report.q / report.p;
    report.gamma_star = gamma_star;

    if (gamma > gamma_star) {
        report.regime = Regime::WellBehavedNormal; // case i
    } else if (rho > report.rho_star && gamma < gamma_star) {
        report.regime = Regime::Tangent; // case ii: delta < 0, finite T*
        const double eta = std::sqrt(-report.delta);
        report.eta = eta;
        report.t_star = std::numbers::pi / eta - 2.0 / eta * std::atan(report.b / eta);
    } else if (rho > report.rho_star && gamma == gamma_star) {
        report.regime = Regime::WellBehavedHyperbolic; // case iii: delta = 0, b < 0
    } else {
        // rho == rho* with gamma <= gamma*: the classification is silent.
        report.regime = Regime::BoundaryUndetermined;
    }
    return report;
}

} // namespace mpr
