#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mpr {

/// Uniform partition of [t0, t1] into n intervals.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    int n = 1;

    double h() const { return (t1 - t0) / n; }
    double node(int i) const { return t0 + i * h(); }
    double mid(int i) const { return t0 + (i + 0.5) * h(); }
    int size() const { return n + 1; }

    bool operator==(const TimeGrid&) const = default;
};

/// Grid used by every Riccati-type solve: n >= max(2000, 400 T) intervals.
TimeGrid default_grid(double horizon);

/// Index of the node whose time is nearest to t; t must lie inside the grid
/// up to roundoff.
int nearest_node(const TimeGrid& grid, double t);

/// Monotone (Fritsch-Carlson) cubic interpolant on a uniform grid. C^1,
/// shape-preserving, exact on nodes.
class Pchip {
  public:
    Pchip() = default;
    Pchip(double t0, double step, std::span<const double> values);

    double operator()(double t) const;
    double t0() const { return t0_; }
    double t1() const { return t0_ + step_ * (static_cast<double>(values_.size()) - 1.0); }

  private:
    double t0_ = 0.0;
    double step_ = 1.0;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

/// Composite Simpson value of one interval [t_i, t_i+1] from endpoint and
/// midpoint samples of the integrand.
inline double simpson_cell(double f_left, double f_mid, double f_right, double h) {
    return h / 6.0 * (f_left + 4.0 * f_mid + f_right);
}

} // namespace mpr
