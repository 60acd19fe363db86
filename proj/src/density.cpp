#include "mpr/density.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>

namespace mpr {

namespace {

Complex cf_point(const MarketParams& params, const RiccatiSolution& sol,
                 const FilterVariance* fv, Conditioning cond, double x0, Complex z) {
    MgfCoefficients coeffs =
        sol.kind == InfoKind::FullInfo
            ? solve_mgf_full(params, sol, sol.grid.t1, z)
            : solve_mgf_partial(params, sol, *fv, sol.grid.t1, z);
    if (cond == Conditioning::ConditionalOnX0) {
        if (sol.kind != InfoKind::FullInfo)
            throw Error(Errc::InvalidParams,
                        "conditioning on X0 applies to the full-information distribution");
        return conditional_mgf_at_x0(coeffs, params, sol, x0);
    }
    return unconditional_mgf(coeffs, params, sol);
}

} // namespace

std::vector<Complex> cf_curve(const MarketParams& params, const RiccatiSolution& sol,
                              const FilterVariance* fv, Conditioning cond, double x0,
                              double alpha, std::span<const double> u_grid, ExecMode mode) {
    std::vector<Complex> out(u_grid.size());
    std::exception_ptr first_error = nullptr;

    auto eval = [&](std::size_t j) {
        try {
            out[j] = cf_point(params, sol, fv, cond, x0, Complex{alpha, u_grid[j]});
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "characteristic function failed at u = " << u_grid[j] << ": " << e.what();
            throw Error(e.code() == Errc::DivergentExpectation ? Errc::MomentExplosion : e.code(),
                        msg.str());
        }
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long j = 0; j < static_cast<long>(u_grid.size()); ++j) {
            if (first_error) continue;
            try {
                eval(static_cast<std::size_t>(j));
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        }
    } else {
        for (std::size_t j = 0; j < u_grid.size(); ++j) eval(j);
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

double wealth_moment(const MarketParams& params, const RiccatiSolution& sol,
                     const FilterVariance* fv, Conditioning cond, double x0, double z) {
    return cf_point(params, sol, fv, cond, x0, Complex{z, 0.0}).real();
}

WealthDistribution invert_to_density(const MarketParams& params, const RiccatiSolution& sol,
                                     const FilterVariance* fv, Conditioning cond, double x0,
                                     const InversionSpec& ispec, const WealthGridSpec& wspec,
                                     ExecMode mode) {
    if (sol.kind == InfoKind::PartialInfo && fv == nullptr)
        throw Error(Errc::InvalidParams, "partial-information inversion needs the filter variance");

    // Tail gate, with optional doubling of u_max at fixed spacing.
    double u_max = ispec.u_max;
    double tail = std::abs(cf_point(params, sol, fv, cond, x0, Complex{ispec.alpha, u_max}));
    if (ispec.auto_extend) {
        while (tail > ispec.tail_tol && 2.0 * u_max <= ispec.u_max_cap) {
            u_max *= 2.0;
            tail = std::abs(cf_point(params, sol, fv, cond, x0, Complex{ispec.alpha, u_max}));
        }
    }
    if (tail > ispec.tail_tol) {
        std::ostringstream msg;
        msg << "Fourier tail |phi(alpha + i " << u_max << ")| = " << tail
            << " exceeds the tolerance " << ispec.tail_tol;
        throw Error(Errc::GridTooCoarse, msg.str());
    }
    const int n_u = static_cast<int>(std::lround(ispec.n_u * u_max / ispec.u_max));

    std::vector<double> us(static_cast<std::size_t>(n_u) + 1);
    const double du = u_max / n_u;
    for (int j = 0; j <= n_u; ++j) us[static_cast<std::size_t>(j)] = j * du;
    const std::vector<Complex> phi = cf_curve(params, sol, fv, cond, x0, ispec.alpha, us, mode);

    // Wealth grid from the log-wealth cumulants at small real z.
    const double dz = 0.02;
    const double k_plus = std::log(wealth_moment(params, sol, fv, cond, x0, dz));
    const double k_minus = std::log(wealth_moment(params, sol, fv, cond, x0, -dz));
    const double y_mean = (k_plus - k_minus) / (2.0 * dz);
    const double y_sd = std::sqrt(std::max(1e-12, (k_plus + k_minus) / (dz * dz)));
    const double y_lo = y_mean - wspec.span_sd * y_sd;
    const double y_hi = y_mean + wspec.span_sd * y_sd;

    WealthDistribution dist;
    dist.info_kind = sol.kind;
    dist.conditioning = cond;
    dist.x0 = x0;
    dist.tail_mag = tail;
    dist.u_max_used = u_max;

    const int n_w = wspec.n_w;
    dist.w_grid.resize(static_cast<std::size_t>(n_w) + 1);
    dist.pdf_vals.resize(static_cast<std::size_t>(n_w) + 1);
    const double dy = (y_hi - y_lo) / n_w;

    // f_Y(y) = e^{-alpha y} / pi * Re sum_j w_j e^{-i u_j y} phi_j du,
    // evaluated with an incremental phase rotation per y.
    std::vector<double> f_y(static_cast<std::size_t>(n_w) + 1);
    auto invert_at = [&](int k) {
        const double y = y_lo + k * dy;
        const Complex rot = std::exp(Complex{0.0, -du * y});
        Complex phase{1.0, 0.0};
        double acc = 0.5 * phi[0].real(); // trapezoid half-weight at u = 0
        for (int j = 1; j <= n_u; ++j) {
            phase *= rot;
            const double wj = (j == n_u) ? 0.5 : 1.0;
            acc += wj * (phase * phi[static_cast<std::size_t>(j)]).real();
        }
        f_y[static_cast<std::size_t>(k)] = std::exp(-ispec.alpha * y) / std::numbers::pi * acc * du;
    };
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k <= n_w; ++k) invert_at(k);
    } else {
        for (int k = 0; k <= n_w; ++k) invert_at(k);
    }

    // Change of variables to wealth, raw mass, clipping.
    double raw_mass = 0.0, clipped = 0.0;
    for (int k = 0; k <= n_w; ++k) {
        const double y = y_lo + k * dy;
        dist.w_grid[static_cast<std::size_t>(k)] = std::exp(y);
        const double fy = f_y[static_cast<std::size_t>(k)];
        const double weight = (k == 0 || k == n_w) ? 0.5 : 1.0;
        raw_mass += weight * fy * dy;
        if (fy < 0.0) clipped += weight * (-fy) * dy;
        // pdf in wealth units: f_W(w) = f_Y(ln w) / w
        dist.pdf_vals[static_cast<std::size_t>(k)] = std::max(fy, 0.0) / std::exp(y);
    }
    dist.raw_mass = raw_mass;
    dist.clipped_mass = clipped;
    if (clipped > 1e-3) {
        std::ostringstream msg;
        msg << "clipped negative pdf mass " << clipped << " exceeds 1e-3; refine the u-grid";
        throw Error(Errc::GridTooCoarse, msg.str());
    }

    // Renormalize the clipped pdf and accumulate the cdf by trapezoid.
    dist.cdf_vals.assign(dist.pdf_vals.size(), 0.0);
    for (std::size_t k = 1; k < dist.pdf_vals.size(); ++k) {
        const double dw = dist.w_grid[k] - dist.w_grid[k - 1];
        dist.cdf_vals[k] = dist.cdf_vals[k - 1] +
                           0.5 * (dist.pdf_vals[k] + dist.pdf_vals[k - 1]) * dw;
    }
    const double total = dist.cdf_vals.back();
    if (!(total > 0.0))
        throw Error(Errc::GridTooCoarse, "inverted density carries no positive mass");
    for (std::size_t k = 0; k < dist.pdf_vals.size(); ++k) {
        dist.pdf_vals[k] /= total;
        dist.cdf_vals[k] /= total;
    }

    const double m1 = wealth_moment(params, sol, fv, cond, x0, 1.0);
    const double m2 = wealth_moment(params, sol, fv, cond, x0, 2.0);
    dist.mean = m1;
    dist.variance = m2 - m1 * m1;
    return dist;
}

std::vector<FrontierPoint> frontier(const MarketParams& params, std::span<const double> gammas,
                                    InfoKind kind, ExecMode mode) {
    std::vector<FrontierPoint> out(gammas.size());

    auto compute = [&](std::size_t i) {
        FrontierPoint& pt = out[i];
        pt.gamma = gammas[i];
        pt.info_kind = kind;
        try {
            MarketParams p = params;
            p.gamma = gammas[i];
            p = validate(p);
            const RegimeReport reg = classify(p);
            const TimeGrid grid = default_grid(p.horizon);
            const RiccatiSolution full = solve_full_riccati(p, reg, grid);
            const FilterVariance fv = solve_filter_variance(p, grid);
            RiccatiSolution sol = full;
            if (kind == InfoKind::PartialInfo) sol = solve_partial_riccati(p, fv, grid);
            if (p.gamma < 1.0) {
                const RiccatiSolution partial =
                    kind == InfoKind::PartialInfo ? sol : solve_partial_riccati(p, fv, grid);
                const QPath q = q_path(full, fv, p);
                const Admissibility adm = check_admissibility(full, partial, q, p);
                const bool ok = kind == InfoKind::FullInfo ? adm.full_ok : adm.partial_ok;
                if (!ok) {
                    pt.admissible = false;
                    pt.flag = "sufficient admissibility condition failed";
                    return;
                }
            }
            const FilterVariance* fvp = kind == InfoKind::PartialInfo ? &fv : nullptr;
            const double m1 =
                wealth_moment(p, sol, fvp, Conditioning::Unconditional, p.pi0, 1.0);
            const double m2 =
                wealth_moment(p, sol, fvp, Conditioning::Unconditional, p.pi0, 2.0);
            pt.mean_return = std::pow(m1 / p.w, 1.0 / p.horizon) - 1.0;
            pt.std_return = std::sqrt(std::max(0.0, m2 - m1 * m1)) / p.w /
                            std::sqrt(p.horizon);
        } catch (const Error& e) {
            pt.admissible = false;
            pt.flag = std::string(errc_name(e.code())) + ": " + e.what();
        }
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(gammas.size()); ++i)
            compute(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < gammas.size(); ++i) compute(i);
    }
    return out;
}

namespace {

double interp_cdf(const WealthDistribution& d, double w) {
    const auto& ws = d.w_grid;
    if (w <= ws.front()) return 0.0;
    if (w >= ws.back()) return 1.0;
    const auto it = std::upper_bound(ws.begin(), ws.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - ws.begin()) - 1;
    const double frac = (w - ws[i]) / (ws[i + 1] - ws[i]);
    return d.cdf_vals[i] + frac * (d.cdf_vals[i + 1] - d.cdf_vals[i]);
}

} // namespace

DominanceReport stochastic_dominance_check(const WealthDistribution& a,
                                           const WealthDistribution& b) {
    const double lo = std::max(a.w_grid.front(), b.w_grid.front());
    const double hi = std::min(a.w_grid.back(), b.w_grid.back());
    DominanceReport rep;
    const int n = 4000;
    for (int k = 0; k <= n; ++k) {
        const double w = lo * std::pow(hi / lo, static_cast<double>(k) / n);
        const double diff = interp_cdf(a, w) - interp_cdf(b, w);
        rep.max_violation_ab = std::max(rep.max_violation_ab, diff);
        rep.max_violation_ba = std::max(rep.max_violation_ba, -diff);
    }
    return rep;
}

double ks_distance(const WealthDistribution& dist, std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = interp_cdf(dist, samples[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = (static_cast<double>(i) + 1.0) / n;
        ks = std::max({ks, std::abs(f - lo), std::abs(f - hi)});
    }
    return ks;
}

} // namespace mpr
