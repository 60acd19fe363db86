#include "mpr/riccati.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace mpr {

namespace {

constexpr double kBlowUpThreshold = 1e8;

using Triple = std::array<double, 3>; // (A, B, C)

struct FullRhs {
    double r_term, lambda_xbar, sigx2, a, b, c;

    explicit FullRhs(const MarketParams& p, const RegimeReport& reg)
        : r_term((p.gamma - 1.0) / p.gamma * p.r),
          lambda_xbar(p.lambda * p.x_bar),
          sigx2(p.sigma_x * p.sigma_x),
          a(reg.a), b(reg.b), c(reg.c) {}

    Triple operator()(const Triple& y) const {
        const double B = y[1], C = y[2];
        return {r_term - B * lambda_xbar - 0.5 * C * sigx2 - 0.5 * c * B * B,
                -C * lambda_xbar - (0.5 * b + c * C) * B,
                -a - b * C - c * C * C};
    }
};

struct PartialRhs {
    double r_term, lambda_xbar, lambda, g1, a_tilde, rho_sigx;

    PartialRhs(const MarketParams& p)
        : r_term((p.gamma - 1.0) / p.gamma * p.r),
          lambda_xbar(p.lambda * p.x_bar),
          lambda(p.lambda),
          g1((p.gamma - 1.0) / p.gamma),
          a_tilde((p.gamma - 1.0) / (p.gamma * p.gamma)),
          rho_sigx(p.rho * p.sigma_x) {}

    // R is the filter variance at the stage time.
    Triple operator()(const Triple& y, double R) const {
        const double B = y[1], C = y[2];
        const double g = R + rho_sigx;
        const double bt = 2.0 * (lambda + g1 * g);
        const double ct = -g * g;
        return {r_term - B * lambda_xbar + 0.5 * ct * (B * B + C),
                -C * lambda_xbar + (0.5 * bt + ct * C) * B,
                a_tilde + bt * C + ct * C * C};
    }
};

bool finite_and_bounded(const Triple& y) {
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    return std::abs(y[2]) <= kBlowUpThreshold;
}

[[noreturn]] void throw_blowup(double t_last, const char* system) {
    std::ostringstream msg;
    msg << system << " Riccati integration diverged; last finite value at t = " << t_last;
    throw Error(Errc::SolutionBlowUp, msg.str());
}

// Backward march over the half grid (2n steps of size h/2). sample(q) must
// return the filter variance at quarter index q for the partial system; the
// full system ignores it. Stores A, B, C on the half grid.
template <class Rhs>
void integrate_backward(const TimeGrid& grid, const Rhs& rhs, const FilterVariance* fv,
                        std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                        const char* label) {
    const int half_n = 2 * grid.n;
    const double hs = -0.5 * grid.h(); // marching step, right to left
    a.assign(half_n + 1, 0.0);
    b.assign(half_n + 1, 0.0);
    c.assign(half_n + 1, 0.0);

    auto eval = [&](const Triple& y, int quarter_index) {
        if constexpr (std::is_same_v<Rhs, FullRhs>) {
            (void)quarter_index;
            return rhs(y);
        } else {
            return rhs(y, fv->r_quarter[static_cast<std::size_t>(quarter_index)]);
        }
    };

    Triple y{0.0, 0.0, 0.0}; // terminal boundary, exact
    for (int k = half_n; k > 0; --k) {
        const int q = 2 * k; // quarter index of the step's start
        const Triple k1 = eval(y, q);
        Triple y2;
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k1[j];
        const Triple k2 = eval(y2, q - 1);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k2[j];
        const Triple k3 = eval(y2, q - 1);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + hs * k3[j];
        const Triple k4 = eval(y2, q - 2);
        for (int j = 0; j < 3; ++j)
            y[j] += hs / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);

        if (!finite_and_bounded(y)) throw_blowup(grid.t0 + k * 0.5 * grid.h(), label);
        a[k - 1] = y[0];
        b[k - 1] = y[1];
        c[k - 1] = y[2];
    }
}

// Coarse comparison run: plain RK4 with step h over the nodes, used only for
// the Richardson error estimate at t = 0.
template <class Rhs>
Triple integrate_backward_coarse(const TimeGrid& grid, const Rhs& rhs, const FilterVariance* fv,
                                 const char* label) {
    const double hs = -grid.h();
    auto eval = [&](const Triple& y, int quarter_index) {
        if constexpr (std::is_same_v<Rhs, FullRhs>) {
            (void)quarter_index;
            return rhs(y);
        } else {
            return rhs(y, fv->r_quarter[static_cast<std::size_t>(quarter_index)]);
        }
    };
    Triple y{0.0, 0.0, 0.0};
    for (int i = grid.n; i > 0; --i) {
        const int q = 4 * i;
        const Triple k1 = eval(y, q);
        Triple y2;
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k1[j];
        const Triple k2 = eval(y2, q - 2);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * hs * k2[j];
        const Triple k3 = eval(y2, q - 2);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + hs * k3[j];
        const Triple k4 = eval(y2, q - 4);
        for (int j = 0; j < 3; ++j)
            y[j] += hs / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
        if (!finite_and_bounded(y)) throw_blowup(grid.t0 + i * grid.h(), label);
    }
    return y;
}

void check_c_shape(const RiccatiSolution& sol, double gamma) {
    // Sign: C and Ctilde are strictly positive for gamma < 1 and strictly
    // negative for gamma > 1. Monotonicity in t holds for the
    // full-information C (autonomous scalar equation); the time-varying
    // coefficients of the filtered system can bend Ctilde away from
    // monotone, so only the sign is enforced there.
    if (gamma == 1.0) return;
    const auto& c = sol.c_half;
    const double sign = gamma < 1.0 ? 1.0 : -1.0;
    const double tol = 1e-12 * (1.0 + std::abs(c.front()));
    const bool check_monotone = sol.kind == InfoKind::FullInfo;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        const bool bad_sign = sign * c[k] <= 0.0;
        const bool bad_slope = check_monotone && sign * (c[k] - c[k + 1]) <= -tol;
        if (bad_sign || bad_slope) {
            std::ostringstream msg;
            msg << "solution violates the sign/shape of C at node " << k
                << " (gamma = " << gamma << ")";
            throw Error(Errc::SolutionBlowUp, msg.str());
        }
    }
}

double max_abs_diff(const Triple& x, const Triple& y) {
    double m = 0.0;
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(x[j] - y[j]));
    return m;
}

} // namespace

std::vector<double> RiccatiSolution::a_vals() const {
    std::vector<double> out(static_cast<std::size_t>(grid.n) + 1);
    for (int i = 0; i <= grid.n; ++i) out[static_cast<std::size_t>(i)] = a(i);
    return out;
}
std::vector<double> RiccatiSolution::b_vals() const {
    std::vector<double> out(static_cast<std::size_t>(grid.n) + 1);
    for (int i = 0; i <= grid.n; ++i) out[static_cast<std::size_t>(i)] = b(i);
    return out;
}
std::vector<double> RiccatiSolution::c_vals() const {
    std::vector<double> out(static_cast<std::size_t>(grid.n) + 1);
    for (int i = 0; i <= grid.n; ++i) out[static_cast<std::size_t>(i)] = c(i);
    return out;
}

Pchip RiccatiSolution::interp_a() const { return Pchip(grid.t0, 0.5 * grid.h(), a_half); }
Pchip RiccatiSolution::interp_b() const { return Pchip(grid.t0, 0.5 * grid.h(), b_half); }
Pchip RiccatiSolution::interp_c() const { return Pchip(grid.t0, 0.5 * grid.h(), c_half); }
double RiccatiSolution::eval_a(double t) const { return interp_a()(t); }
double RiccatiSolution::eval_b(double t) const { return interp_b()(t); }
double RiccatiSolution::eval_c(double t) const { return interp_c()(t); }

std::vector<double> FilterVariance::r_vals() const {
    std::vector<double> out(static_cast<std::size_t>(grid.n) + 1);
    for (int i = 0; i <= grid.n; ++i) out[static_cast<std::size_t>(i)] = r(i);
    return out;
}
Pchip FilterVariance::interp() const { return Pchip(grid.t0, 0.25 * grid.h(), r_quarter); }
double FilterVariance::eval(double t) const { return interp()(t); }

double QPath::eval(double t) const { return Pchip(grid.t0, 0.5 * grid.h(), q_half)(t); }

double filter_variance_fixed_point(const MarketParams& params) {
    const double s = params.lambda + params.rho * params.sigma_x;
    const double disc = s * s + params.sigma_x * params.sigma_x * (1.0 - params.rho * params.rho);
    return -s + std::sqrt(disc);
}

RiccatiSolution solve_full_riccati(const MarketParams& params, const RegimeReport& regime,
                                   const TimeGrid& grid) {
    if (regime.regime == Regime::BoundaryUndetermined)
        throw Error(Errc::UnclassifiedRegime,
                    "rho = rho* with gamma <= gamma*: existence is unclassified");
    if (regime.regime == Regime::Tangent && regime.t_star && grid.t1 >= *regime.t_star) {
        std::ostringstream msg;
        msg << "tangent regime: horizon T = " << grid.t1 << " reaches the critical time T* = "
            << *regime.t_star;
        throw Error(Errc::HorizonBeyondCriticalTime, msg.str());
    }

    RiccatiSolution sol;
    sol.grid = grid;
    sol.kind = InfoKind::FullInfo;
    sol.regime = regime;

    const FullRhs rhs(params, regime);
    integrate_backward(grid, rhs, nullptr, sol.a_half, sol.b_half, sol.c_half, "full-information");

    const Triple coarse = integrate_backward_coarse(grid, rhs, nullptr, "full-information");
    sol.certified_error =
        max_abs_diff(coarse, {sol.a_half[0], sol.b_half[0], sol.c_half[0]}) / 15.0;

    check_c_shape(sol, params.gamma);
    return sol;
}

FilterVariance solve_filter_variance(const MarketParams& params, const TimeGrid& grid,
                                     std::optional<double> r0_override) {
    FilterVariance fv;
    fv.grid = grid;
    fv.r0 = r0_override.value_or(params.r0);
    fv.r_infty = filter_variance_fixed_point(params);

    const double rho_sigx = params.rho * params.sigma_x;
    const double sigx2 = params.sigma_x * params.sigma_x;
    const double two_lambda = 2.0 * params.lambda;
    auto f = [&](double R) {
        const double g = R + rho_sigx;
        return sigx2 - two_lambda * R - g * g;
    };

    const int qn = 4 * grid.n;
    const double hs = 0.25 * grid.h();
    fv.r_quarter.assign(static_cast<std::size_t>(qn) + 1, 0.0);
    double y = fv.r0;
    fv.r_quarter[0] = y;
    for (int k = 0; k < qn; ++k) {
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * hs * k1);
        const double k3 = f(y + 0.5 * hs * k2);
        const double k4 = f(y + hs * k3);
        y += hs / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        fv.r_quarter[static_cast<std::size_t>(k) + 1] = y;
    }
    return fv;
}

RiccatiSolution solve_partial_riccati(const MarketParams& params, const FilterVariance& fv,
                                      const TimeGrid& grid) {
    if (!(fv.grid == grid))
        throw Error(Errc::InvalidParams, "filter-variance grid does not match the request");

    RiccatiSolution sol;
    sol.grid = grid;
    sol.kind = InfoKind::PartialInfo;
    sol.regime = classify(params);

    const PartialRhs rhs(params);
    integrate_backward(grid, rhs, &fv, sol.a_half, sol.b_half, sol.c_half, "partial-information");

    const Triple coarse = integrate_backward_coarse(grid, rhs, &fv, "partial-information");
    sol.certified_error =
        max_abs_diff(coarse, {sol.a_half[0], sol.b_half[0], sol.c_half[0]}) / 15.0;

    check_c_shape(sol, params.gamma);
    return sol;
}

QPath q_path(const RiccatiSolution& full, const FilterVariance& fv, const MarketParams& params) {
    if (!(full.grid == fv.grid))
        throw Error(Errc::InvalidParams, "Q path needs matching grids");
    QPath q;
    q.grid = full.grid;
    const std::size_t m = full.c_half.size();
    q.q_half.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double qk = 1.0 - params.gamma * full.c_half[k] * fv.r_quarter[2 * k];
        if (!(qk > 0.0)) {
            std::ostringstream msg;
            msg << "Q(t) = " << qk << " at t = " << full.grid.t0 + 0.5 * full.grid.h() * k
                << "; the Q-relation requires strict positivity";
            throw Error(Errc::QNonPositive, msg.str());
        }
        q.q_half[k] = qk;
    }
    return q;
}

std::pair<RiccatiSolution, QPath> via_q_relation(const RiccatiSolution& full,
                                                 const FilterVariance& fv,
                                                 const MarketParams& params) {
    if (full.kind != InfoKind::FullInfo)
        throw Error(Errc::InvalidParams, "via_q_relation expects a full-information solution");
    QPath q = q_path(full, fv, params);

    RiccatiSolution tilde;
    tilde.grid = full.grid;
    tilde.kind = InfoKind::PartialInfo;
    tilde.regime = full.regime;
    tilde.certified_error = full.certified_error;

    const std::size_t m = full.c_half.size();
    tilde.b_half.resize(m);
    tilde.c_half.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        tilde.b_half[k] = full.b_half[k] / q.q_half[k];
        tilde.c_half[k] = full.c_half[k] / q.q_half[k];
    }

    // Atilde by quadrature of its ODE right-hand side, backward from 0 at T.
    const double h = full.grid.h();
    const double rho_sigx = params.rho * params.sigma_x;
    const double r_term = (params.gamma - 1.0) / params.gamma * params.r;
    const double lambda_xbar = params.lambda * params.x_bar;
    std::vector<double> f(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double g = fv.r_quarter[2 * k] + rho_sigx;
        const double ct = -g * g;
        const double B = tilde.b_half[k], C = tilde.c_half[k];
        f[k] = r_term - B * lambda_xbar + 0.5 * ct * (B * B + C);
    }
    tilde.a_half.assign(m, 0.0);
    for (int i = full.grid.n - 1; i >= 0; --i) {
        const std::size_t k = 2 * static_cast<std::size_t>(i);
        const double right = tilde.a_half[k + 2];
        // node value: Simpson over the whole cell; midpoint: quadratic fit
        // integrated over the right half-cell.
        tilde.a_half[k] = right - simpson_cell(f[k], f[k + 1], f[k + 2], h);
        tilde.a_half[k + 1] = right - h / 24.0 * (-f[k] + 8.0 * f[k + 1] + 5.0 * f[k + 2]);
    }
    return {std::move(tilde), std::move(q)};
}

namespace {

// Time-to-go form of the C equation: Chat' = a + b Chat + c Chat^2,
// Chat(0) = 0, with C(0) on horizon T equal to Chat(T).
struct CHat {
    double a, b, c;
    double operator()(double y) const { return a + b * y + c * y * y; }
};

double rk4_scalar_step(const CHat& f, double y, double h) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
}

} // namespace

std::optional<double> max_admissible_horizon(const MarketParams& params, double tau_cap) {
    if (params.gamma > 1.0 || params.log_utility()) return std::nullopt;

    const RegimeReport reg = classify(params);
    const double lambda = params.lambda;
    const double v_inf = params.sigma_x * params.sigma_x / (2.0 * lambda);
    auto v_max = [&](double horizon) {
        const double decay = std::exp(-2.0 * lambda * horizon);
        return std::max(params.r0, params.r0 * decay + v_inf * (1.0 - decay));
    };

    const CHat f{reg.a, reg.b, reg.c};
    if (reg.t_star) tau_cap = std::min(tau_cap, *reg.t_star * (1.0 - 1e-9));

    const int scan_steps = 4000;
    const double hs = tau_cap / scan_steps;
    double tau = 0.0, y = 0.0;
    double g_prev = 1.0; // condition value at tau = 0 is 1 > 0
    for (int i = 0; i < scan_steps; ++i) {
        const double y_next = rk4_scalar_step(f, y, hs);
        const double tau_next = tau + hs;
        if (!std::isfinite(y_next) || std::abs(y_next) > kBlowUpThreshold) {
            return tau; // condition necessarily fails past blow-up
        }
        const double g_next = 1.0 - 4.0 * y_next * v_max(tau_next);
        if (g_prev > 0.0 && g_next <= 0.0) {
            // bisect within [tau, tau_next], re-integrating from (tau, y)
            double lo = 0.0, hi = hs;
            for (int it = 0; it < 60; ++it) {
                const double midpt = 0.5 * (lo + hi);
                double ym = y;
                const int sub = 16;
                for (int s = 0; s < sub; ++s) ym = rk4_scalar_step(f, ym, midpt / sub);
                const double gm = 1.0 - 4.0 * ym * v_max(tau + midpt);
                (gm > 0.0 ? lo : hi) = midpt;
            }
            return tau + 0.5 * (lo + hi);
        }
        y = y_next;
        tau = tau_next;
        g_prev = g_next;
    }
    return std::nullopt; // holds on the whole scanned range
}

Admissibility check_admissibility(const RiccatiSolution& full, const RiccatiSolution& partial,
                                  const QPath& q, const MarketParams& params) {
    const double gamma = params.gamma;
    const double lambda = params.lambda;
    const double T = full.grid.t1;
    const double v_inf = params.sigma_x * params.sigma_x / (2.0 * lambda);
    const double decay = std::exp(-2.0 * lambda * T);
    const double v_max = std::max(params.r0, params.r0 * decay + v_inf * (1.0 - decay));

    Admissibility rep;
    rep.via_gamma_branch = gamma > 1.0;
    rep.cond_full_lhs = 1.0 - 4.0 * full.c(0) * v_max;
    rep.cond_partial_lhs = 1.0 - 4.0 * full.c(0) / q.q(0) * v_max;
    (void)partial;
    rep.full_ok = rep.via_gamma_branch || rep.cond_full_lhs > 0.0;
    rep.partial_ok = rep.via_gamma_branch || rep.cond_partial_lhs > 0.0;
    rep.t_star_star = max_admissible_horizon(params, std::max(2.0 * T, 50.0));
    return rep;
}

BlowUpReport detect_blowup(const MarketParams& params, double tau_max) {
    const RegimeReport reg = classify(params);
    const CHat f{reg.a, reg.b, reg.c};

    BlowUpReport rep;
    double tau = 0.0, y = 0.0;
    double hs = std::min(2.5e-4, tau_max / 1000.0);
    int guard = 0;
    while (tau < tau_max && guard++ < 50'000'000) {
        const double y_next = rk4_scalar_step(f, y, hs);
        if (!std::isfinite(y_next) || std::abs(y_next) > kBlowUpThreshold) {
            if (hs < 1e-12) {
                rep.blew_up = true;
                rep.tau = tau;
                rep.c_peak = std::abs(y);
                return rep;
            }
            hs *= 0.5; // refine the step to localize the divergence
            continue;
        }
        y = y_next;
        tau += hs;
    }
    rep.c_peak = std::abs(y);
    return rep;
}

} // namespace mpr
