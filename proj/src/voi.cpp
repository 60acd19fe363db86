#include "mpr/voi.hpp"

#include <cmath>
#include <sstream>

namespace mpr {

InfoValueReport info_values(const MarketParams& params, const RiccatiSolution& full,
                            const RiccatiSolution& partial_at_r0,
                            const RiccatiSolution& partial_at_zero) {
    const double gamma = params.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams,
                    "information values are undefined at log utility (1/(1-gamma) exponent)");

    InfoValueReport rep;
    rep.a0 = full.a(0);
    rep.b0 = full.b(0);
    rep.c0 = full.c(0);
    rep.a0_tilde_r0 = partial_at_r0.a(0);
    rep.a0_tilde_0 = partial_at_zero.a(0);
    rep.q0 = 1.0 - gamma * rep.c0 * params.r0;
    if (!(rep.q0 > 0.0)) {
        std::ostringstream msg;
        msg << "Q(0) = " << rep.q0 << " <= 0";
        throw Error(Errc::QNonPositive, msg.str());
    }

    const double shared = -gamma * gamma * rep.b0 * rep.b0 * params.r0 / (2.0 * rep.q0);
    auto value = [&](double reference) {
        const double base =
            std::sqrt(rep.q0) * std::exp(gamma * (rep.a0_tilde_r0 - reference) + shared);
        // base > 0 by construction, so the signed power is branch-free
        return 1.0 - std::pow(base, 1.0 / (1.0 - gamma));
    };
    rep.v_initial = value(rep.a0_tilde_0);
    rep.v_dynamic = value(rep.a0);
    rep.dw_initial = params.w * rep.v_initial;
    rep.dw_dynamic = params.w * rep.v_dynamic;

    // Certainty equivalents: u(CE w) = E[u(.)], so CE/w = M^{1/(1-gamma)}
    // with E[u] = w^{1-gamma} M / (1-gamma).
    const double pi0 = params.pi0;
    const double k_partial =
        rep.a0_tilde_r0 + rep.b0 * pi0 / rep.q0 + 0.5 * rep.c0 * pi0 * pi0 / rep.q0;
    rep.ce_partial = std::exp(gamma * k_partial / (1.0 - gamma));
    const double k_partial_zero = rep.a0_tilde_0 + rep.b0 * pi0 + 0.5 * rep.c0 * pi0 * pi0;
    rep.ce_partial_r0zero = std::exp(gamma * k_partial_zero / (1.0 - gamma));
    const double m_full =
        std::exp(gamma * rep.a0 +
                 gamma / (2.0 * rep.q0) *
                     (gamma * rep.b0 * rep.b0 * params.r0 + 2.0 * pi0 * rep.b0 +
                      rep.c0 * pi0 * pi0)) /
        std::sqrt(rep.q0);
    rep.ce_full = std::pow(m_full, 1.0 / (1.0 - gamma));
    return rep;
}

InfoValueReport info_value_report(const MarketParams& params) {
    const MarketParams p = validate(params);
    const RegimeReport reg = classify(p);
    const TimeGrid grid = default_grid(p.horizon);
    const RiccatiSolution full = solve_full_riccati(p, reg, grid);
    const FilterVariance fv_r0 = solve_filter_variance(p, grid);
    const FilterVariance fv_0 = solve_filter_variance(p, grid, 0.0);
    const RiccatiSolution partial_r0 = solve_partial_riccati(p, fv_r0, grid);
    const RiccatiSolution partial_0 = solve_partial_riccati(p, fv_0, grid);
    return info_values(p, full, partial_r0, partial_0);
}

double expected_utility_initial_information(const MarketParams& params,
                                            const RiccatiSolution& full,
                                            const RiccatiSolution& partial_at_zero,
                                            double wealth) {
    const double gamma = params.gamma;
    if (gamma == 1.0)
        throw Error(Errc::InvalidParams, "power-utility form needs gamma != 1");
    const double b0 = full.b(0), c0 = full.c(0);
    const double q0 = 1.0 - gamma * c0 * params.r0;
    if (!(q0 > 0.0)) throw Error(Errc::QNonPositive, "Q(0) <= 0");
    const double pi0 = params.pi0;
    const double expo = gamma * partial_at_zero.a(0) +
                        gamma / (2.0 * q0) *
                            (gamma * b0 * b0 * params.r0 + 2.0 * b0 * pi0 + c0 * pi0 * pi0);
    return std::pow(wealth, 1.0 - gamma) / ((1.0 - gamma) * std::sqrt(q0)) * std::exp(expo);
}

const char* sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::R0: return "R0";
        case SweepAxis::Horizon: return "T";
        case SweepAxis::Rho: return "rho";
        case SweepAxis::Gamma: return "gamma";
    }
    return "axis";
}

std::vector<InfoValueReport> voi_sweep(const MarketParams& params, SweepAxis axis,
                                       std::span<const double> values, ExecMode mode) {
    std::vector<InfoValueReport> out(values.size());

    auto compute = [&](std::size_t i) {
        MarketParams p = params;
        switch (axis) {
            case SweepAxis::R0: p.r0 = values[i]; break;
            case SweepAxis::Horizon: p.horizon = values[i]; break;
            case SweepAxis::Rho: p.rho = values[i]; break;
            case SweepAxis::Gamma: p.gamma = values[i]; break;
        }
        try {
            out[i] = info_value_report(p);
        } catch (const Error& e) {
            out[i].admissible = false;
            out[i].flag = std::string(errc_name(e.code())) + ": " + e.what();
        }
        out[i].axis_value = values[i];
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(values.size()); ++i)
            compute(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) compute(i);
    }
    return out;
}

} // namespace mpr
