#include "mpr/csv.hpp"

#include <iomanip>

#include "mpr/filter.hpp"

namespace mpr {

namespace {

std::ostream& prep(std::ostream& out) {
    out << std::setprecision(12);
    return out;
}

} // namespace

void write_riccati_csv(std::ostream& out, const RiccatiSolution& sol) {
    prep(out) << "t,A,B,C\n";
    for (int i = 0; i <= sol.grid.n; ++i)
        out << sol.grid.node(i) << ',' << sol.a(i) << ',' << sol.b(i) << ',' << sol.c(i)
            << '\n';
}

void write_riccati_csv(std::ostream& out, const RiccatiSolution& sol, const FilterVariance& fv,
                       const QPath& q) {
    prep(out) << "t,A,B,C,R,Q\n";
    for (int i = 0; i <= sol.grid.n; ++i)
        out << sol.grid.node(i) << ',' << sol.a(i) << ',' << sol.b(i) << ',' << sol.c(i) << ','
            << fv.r(i) << ',' << q.q(i) << '\n';
}

void write_filter_csv(std::ostream& out, const FilterPath& path) {
    prep(out) << "t,pi,R,dI\n";
    for (int i = 0; i <= path.grid.n; ++i) {
        out << path.grid.node(i) << ',' << path.pi_vals[static_cast<std::size_t>(i)] << ','
            << path.fv.r(i) << ',';
        if (i < path.grid.n) out << path.innov_increments[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

void write_density_csv(std::ostream& out, const WealthDistribution& dist) {
    prep(out) << "w,pdf,cdf\n";
    for (std::size_t k = 0; k < dist.w_grid.size(); ++k)
        out << dist.w_grid[k] << ',' << dist.pdf_vals[k] << ',' << dist.cdf_vals[k] << '\n';
}

void write_frontier_csv(std::ostream& out, std::span<const FrontierPoint> points) {
    prep(out) << "gamma,mean_return,std_return,admissible,flag\n";
    for (const FrontierPoint& p : points) {
        out << p.gamma << ',';
        if (p.admissible)
            out << p.mean_return << ',' << p.std_return;
        else
            out << ',';
        out << ',' << (p.admissible ? 1 : 0) << ',' << p.flag << '\n';
    }
}

void write_voi_csv(std::ostream& out, const char* axis_name,
                   std::span<const InfoValueReport> reports) {
    prep(out) << axis_name
              << ",v_initial,v_dynamic,ratio,dw_initial,dw_dynamic,ce_partial,"
                 "ce_partial_r0zero,ce_full,a0,a0_tilde_r0,a0_tilde_0,b0,c0,q0,admissible,flag\n";
    for (const InfoValueReport& r : reports) {
        out << r.axis_value << ',';
        if (r.admissible) {
            out << r.v_initial << ',' << r.v_dynamic << ','
                << (r.v_initial > 0.0 ? r.v_dynamic / r.v_initial : 0.0) << ',' << r.dw_initial
                << ',' << r.dw_dynamic << ',' << r.ce_partial << ',' << r.ce_partial_r0zero
                << ',' << r.ce_full << ',' << r.a0 << ',' << r.a0_tilde_r0 << ','
                << r.a0_tilde_0 << ',' << r.b0 << ',' << r.c0 << ',' << r.q0;
        } else {
            out << ",,,,,,,,,,,,,";
        }
        out << ',' << (r.admissible ? 1 : 0) << ',' << r.flag << '\n';
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace mpr
