#pragma once

#include <span>
#include <vector>

#include "mpr/mc.hpp"
#include "mpr/mgf.hpp"

namespace mpr {

/// Damped-transform inversion grid. The damped characteristic function of
/// log-wealth decays only polynomially (quadratic Gaussian functional), so
/// the tail gate usually needs u_max well beyond the 200 default;
/// auto_extend doubles u_max (keeping the spacing) until the gate passes.
struct InversionSpec {
    double u_max = 200.0;
    int n_u = 16384;
    double alpha = 1.0;     // damping: CF evaluated at z = alpha + iu
    double tail_tol = 1e-8; // GridTooCoarse when |phi(alpha + i u_max)| exceeds this
    bool auto_extend = false;
    double u_max_cap = 65536.0;
};

struct WealthGridSpec {
    int n_w = 1200;
    double span_sd = 8.0; // y-range: mean +- span_sd * sd of ln W_T
};

enum class Conditioning { Unconditional, ConditionalOnX0 };

struct WealthDistribution {
    std::vector<double> w_grid;   // strictly increasing wealth abscissae
    std::vector<double> pdf_vals; // clipped at 0 and renormalized
    std::vector<double> cdf_vals; // monotone, ends at 1
    double mean = 0.0;            // from phi(1), never from the numerical pdf
    double variance = 0.0;        // from phi(2) - phi(1)^2
    InfoKind info_kind = InfoKind::FullInfo;
    Conditioning conditioning = Conditioning::Unconditional;
    double x0 = 0.0;
    // Diagnostics: the invariants are checked on these raw values.
    double raw_mass = 0.0;     // integral of the pdf before clipping
    double clipped_mass = 0.0; // mass removed by clipping negative lobes
    double tail_mag = 0.0;     // |phi(alpha + i u_max)| actually reached
    double u_max_used = 0.0;
};

/// Damped CF curve z = alpha + i u over a u-grid; one backward MGF solve per
/// point, independent and parallel. fv may be null for full information.
std::vector<Complex> cf_curve(const MarketParams& params, const RiccatiSolution& sol,
                              const FilterVariance* fv, Conditioning cond, double x0,
                              double alpha, std::span<const double> u_grid,
                              ExecMode mode = ExecMode::Parallel);

/// Real-z moment E[(W_T)^z] under the requested conditioning.
double wealth_moment(const MarketParams& params, const RiccatiSolution& sol,
                     const FilterVariance* fv, Conditioning cond, double x0, double z);

WealthDistribution invert_to_density(const MarketParams& params, const RiccatiSolution& sol,
                                     const FilterVariance* fv, Conditioning cond, double x0,
                                     const InversionSpec& ispec = {},
                                     const WealthGridSpec& wspec = {},
                                     ExecMode mode = ExecMode::Parallel);

struct FrontierPoint {
    double gamma = 0.0;
    double mean_return = 0.0; // annualized geometric mean, (E[W_T]/w)^{1/T} - 1
    double std_return = 0.0;  // sd(W_T/w) / sqrt(T)
    InfoKind info_kind = InfoKind::FullInfo;
    bool admissible = true;
    std::string flag; // reason when not admissible
};

std::vector<FrontierPoint> frontier(const MarketParams& params, std::span<const double> gammas,
                                    InfoKind kind, ExecMode mode = ExecMode::Parallel);

struct DominanceReport {
    double max_violation_ab = 0.0; // max over the common grid of (cdf_a - cdf_b)+
    double max_violation_ba = 0.0;
    bool a_dominates_b(double tol = 0.0) const { return max_violation_ab <= tol; }
};

/// First-order stochastic dominance of a over b means cdf_a <= cdf_b
/// pointwise; both cdfs are re-interpolated onto a common wealth grid.
DominanceReport stochastic_dominance_check(const WealthDistribution& a,
                                           const WealthDistribution& b);

/// Kolmogorov-Smirnov distance between the inverted cdf and an empirical
/// sample (sorted internally).
double ks_distance(const WealthDistribution& dist, std::vector<double> samples);

} // namespace mpr
