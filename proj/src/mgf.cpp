#include "mpr/mgf.hpp"

#include "mpr/allocation.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace mpr {

namespace {

constexpr double kExplosionThreshold = 1e8;

using CTriple = std::array<Complex, 3>; // (D, E, H)

bool finite_triple(const CTriple& y) {
    for (const Complex& v : y) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        if (std::abs(v) > kExplosionThreshold) return false;
    }
    return true;
}

[[noreturn]] void throw_explosion(double s, Complex z) {
    std::ostringstream msg;
    msg << "MGF coefficients diverged at s = " << s << " for z = " << z.real();
    if (z.imag() != 0.0) msg << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
    msg << "; the moment does not exist";
    throw Error(Errc::MomentExplosion, msg.str());
}

struct FullMgfRhs {
    const MarketParams& p;
    Complex z;
    double o; // 1 - rho^2

    // B, C sampled from the stored full-information solution.
    CTriple operator()(const CTriple& y, double B, double C) const {
        const double g2 = p.gamma * p.gamma;
        const double sx2 = p.sigma_x * p.sigma_x;
        const Complex zratio = z / p.gamma;
        const Complex d = -(z * z / g2 + zratio) * (1.0 + g2 * sx2 * o * C * C);
        const Complex e = p.lambda - zratio * p.sigma_x * p.rho + z * sx2 * o * C;
        const Complex f = -(z * z + z * p.gamma) * sx2 * o * B * C;
        const Complex g = z * sx2 * o * B - p.lambda * p.x_bar;
        const Complex h = -0.5 * (z * z + z * p.gamma) * sx2 * o * B * B - z * p.r / p.gamma;

        const Complex E = y[1], H = y[2];
        return {h + g * E - 0.5 * sx2 * (H + E * E),
                f + (e - sx2 * H) * E + g * H,
                d + 2.0 * e * H - sx2 * H * H};
    }
};

struct PartialMgfRhs {
    const MarketParams& p;
    Complex z;

    CTriple operator()(const CTriple& y, double R) const {
        const Complex zratio = z / p.gamma;
        const double gain = R + p.rho * p.sigma_x;
        const Complex d = -(z * z / (p.gamma * p.gamma) + zratio);
        const Complex e = p.lambda - zratio * gain;
        const double f = -gain * gain;

        const Complex E = y[1], H = y[2];
        return {-z * p.r / p.gamma - p.lambda * p.x_bar * E + 0.5 * f * (H + E * E),
                (e + f * H) * E - p.lambda * p.x_bar * H,
                d + 2.0 * e * H + f * H * H};
    }
};

// Backward RK4 from node i_end to node 0, one grid cell per step; stages use
// the Riccati half-grid values (indices 2i, 2i-1, 2i-2).
template <class Rhs, class Sampler>
MgfCoefficients integrate_mgf(const TimeGrid& rgrid, int i_end, Rhs rhs, Sampler sample,
                              CTriple boundary, InfoKind kind, Complex z, double gamma) {
    MgfCoefficients out;
    out.grid = TimeGrid{rgrid.t0, rgrid.node(i_end), i_end};
    out.kind = kind;
    out.z = z;
    out.gamma = gamma;
    out.t_eval = out.grid.t1;
    const auto m = static_cast<std::size_t>(i_end);
    out.d_vals.assign(m + 1, Complex{});
    out.e_vals.assign(m + 1, Complex{});
    out.h_vals.assign(m + 1, Complex{});

    CTriple y = boundary;
    out.d_vals[m] = y[0];
    out.e_vals[m] = y[1];
    out.h_vals[m] = y[2];

    const double hs = -rgrid.h();
    for (int i = i_end; i > 0; --i) {
        const CTriple k1 = rhs(y, sample(2 * i));
        CTriple y2;
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k1[j];
        const CTriple k2 = rhs(y2, sample(2 * i - 1));
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k2[j];
        const CTriple k3 = rhs(y2, sample(2 * i - 1));
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + hs * k3[j];
        const CTriple k4 = rhs(y2, sample(2 * i - 2));
        for (int j = 0; j < 3; ++j)
            y[j] += hs / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);

        if (!finite_triple(y)) throw_explosion(rgrid.node(i - 1), z);
        const auto idx = static_cast<std::size_t>(i - 1);
        out.d_vals[idx] = y[0];
        out.e_vals[idx] = y[1];
        out.h_vals[idx] = y[2];
    }
    return out;
}

int snap_t_eval(const TimeGrid& grid, double t_eval) {
    if (!(t_eval > grid.t0) || t_eval > grid.t1 * (1.0 + 1e-12))
        throw Error(Errc::InvalidParams, "t_eval must lie in (0, T]");
    const int i = nearest_node(grid, t_eval);
    return i == 0 ? 1 : i;
}

} // namespace

MgfCoefficients solve_mgf_full(const MarketParams& params, const RiccatiSolution& full,
                               double t_eval, Complex z,
                               std::optional<std::array<Complex, 3>> boundary_override) {
    const int i_end = snap_t_eval(full.grid, t_eval);
    struct BC {
        const RiccatiSolution& s;
        std::pair<double, double> operator()(int k) const {
            return {s.b_half[static_cast<std::size_t>(k)], s.c_half[static_cast<std::size_t>(k)]};
        }
    };
    const FullMgfRhs rhs{params, z, 1.0 - params.rho * params.rho};
    auto rhs_wrap = [&](const CTriple& y, std::pair<double, double> bc) {
        return rhs(y, bc.first, bc.second);
    };
    const auto ke = static_cast<std::size_t>(2 * i_end);
    const CTriple boundary =
        boundary_override
            ? CTriple{(*boundary_override)[0], (*boundary_override)[1], (*boundary_override)[2]}
            : CTriple{z * full.a_half[ke], z * full.b_half[ke], z * full.c_half[ke]};
    return integrate_mgf(full.grid, i_end, rhs_wrap, BC{full}, boundary, InfoKind::FullInfo, z,
                         params.gamma);
}

MgfCoefficients solve_mgf_partial(const MarketParams& params, const RiccatiSolution& partial,
                                  const FilterVariance& fv, double t_eval, Complex z,
                                  std::optional<std::array<Complex, 3>> boundary_override) {
    if (!(partial.grid == fv.grid))
        throw Error(Errc::InvalidParams, "partial solution and filter variance grids differ");
    const int i_end = snap_t_eval(partial.grid, t_eval);
    const PartialMgfRhs rhs{params, z};
    auto rhs_wrap = [&](const CTriple& y, double R) { return rhs(y, R); };
    auto sample = [&](int k) { return fv.r_half(k); };
    const auto ke = static_cast<std::size_t>(2 * i_end);
    const CTriple boundary =
        boundary_override
            ? CTriple{(*boundary_override)[0], (*boundary_override)[1], (*boundary_override)[2]}
            : CTriple{z * partial.a_half[ke], z * partial.b_half[ke], z * partial.c_half[ke]};
    return integrate_mgf(partial.grid, i_end, rhs_wrap, sample, boundary, InfoKind::PartialInfo,
                         z, params.gamma);
}

Complex evaluate_mgf(const MgfCoefficients& coeffs, double s, double xi_value,
                     double state_value, double lambda0) {
    if (!(xi_value > 0.0))
        throw Error(Errc::InvalidParams, "state price density value must be positive");
    if (s < coeffs.grid.t0 - 1e-12 || s > coeffs.t_eval + 1e-12)
        throw Error(Errc::InvalidParams, "s outside [0, t_eval]");

    Complex D, E, H;
    const double pos = (s - coeffs.grid.t0) / coeffs.grid.h();
    const int i = nearest_node(coeffs.grid, s);
    if (std::abs(pos - i) < 1e-9) {
        D = coeffs.d(i);
        E = coeffs.e(i);
        H = coeffs.h(i);
    } else {
        // Off-node query: monotone cubic interpolation, real and imaginary
        // parts separately.
        auto interp = [&](const std::vector<Complex>& v) {
            std::vector<double> re(v.size()), im(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) {
                re[k] = v[k].real();
                im[k] = v[k].imag();
            }
            return Complex{Pchip(coeffs.grid.t0, coeffs.grid.h(), re)(s),
                           Pchip(coeffs.grid.t0, coeffs.grid.h(), im)(s)};
        };
        D = interp(coeffs.d_vals);
        E = interp(coeffs.e_vals);
        H = interp(coeffs.h_vals);
    }

    const Complex prefactor =
        std::exp(-coeffs.z / coeffs.gamma * std::log(lambda0 * xi_value));
    return prefactor * std::exp(D + E * state_value + 0.5 * H * state_value * state_value);
}

Complex unconditional_mgf(const MgfCoefficients& coeffs, const MarketParams& params,
                          const RiccatiSolution& sol) {
    const Complex z = coeffs.z;
    if (coeffs.kind == InfoKind::PartialInfo) {
        const double k = sol.a(0) + sol.b(0) * params.pi0 +
                         0.5 * sol.c(0) * params.pi0 * params.pi0;
        // (lambda0_tilde)^(-z/gamma) = (exp(k)/w)^(-z)
        const Complex pre = std::exp(-z * (k - std::log(params.w)));
        return pre * std::exp(coeffs.d(0) + coeffs.e(0) * params.pi0 +
                              0.5 * coeffs.h(0) * params.pi0 * params.pi0);
    }
    // Full information: lambda0 depends on X_0 through its exponent, so the
    // time-0 moment is exp-quadratic in X_0 with combined coefficients.
    const Complex aq = coeffs.d(0) - z * sol.a(0) + z * std::log(params.w);
    const Complex bq = coeffs.e(0) - z * sol.b(0);
    const Complex cq = coeffs.h(0) - z * sol.c(0);
    return gaussian_quad_expectation(aq, bq, cq, params.pi0, params.r0);
}

Complex conditional_mgf_at_x0(const MgfCoefficients& coeffs, const MarketParams& params,
                              const RiccatiSolution& full, double x0) {
    if (coeffs.kind != InfoKind::FullInfo)
        throw Error(Errc::InvalidParams, "conditional_mgf_at_x0 is a full-information form");
    const Complex z = coeffs.z;
    const Complex aq = coeffs.d(0) - z * full.a(0) + z * std::log(params.w);
    const Complex bq = coeffs.e(0) - z * full.b(0);
    const Complex cq = coeffs.h(0) - z * full.c(0);
    return std::exp(aq + bq * x0 + 0.5 * cq * x0 * x0);
}

} // namespace mpr
