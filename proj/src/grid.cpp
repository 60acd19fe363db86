#include "mpr/grid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mpr {

TimeGrid default_grid(double horizon) {
    const int n = std::max(2000, static_cast<int>(std::ceil(400.0 * horizon)));
    return TimeGrid{0.0, horizon, n};
}

int nearest_node(const TimeGrid& grid, double t) {
    const int i = static_cast<int>(std::lround((t - grid.t0) / grid.h()));
    return std::clamp(i, 0, grid.n);
}

Pchip::Pchip(double t0, double step, std::span<const double> values)
    : t0_(t0), step_(step), values_(values.begin(), values.end()) {
    const std::size_t m = values_.size();
    if (m < 2) throw std::invalid_argument("Pchip needs at least two points");
    slopes_.resize(m);

    // Secants on a uniform grid; Fritsch-Carlson limited slopes.
    std::vector<double> d(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) d[i] = (values_[i + 1] - values_[i]) / step_;

    auto limited = [](double d0, double d1) {
        if (d0 == 0.0 || d1 == 0.0 || (d0 > 0) != (d1 > 0)) return 0.0;
        return 2.0 * d0 * d1 / (d0 + d1); // harmonic mean, uniform spacing
    };
    for (std::size_t i = 1; i + 1 < m; ++i) slopes_[i] = limited(d[i - 1], d[i]);

    // One-sided endpoint slopes with the usual shape clamp.
    auto endpoint = [](double d0, double d1) {
        double s = 1.5 * d0 - 0.5 * d1;
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
    };
    slopes_.front() = (m == 2) ? d.front() : endpoint(d[0], d[1]);
    slopes_.back() = (m == 2) ? d.back() : endpoint(d[m - 2], d[m - 3]);
}

double Pchip::operator()(double t) const {
    const std::size_t m = values_.size();
    double x = (t - t0_) / step_;
    double cell = std::floor(x);
    cell = std::clamp(cell, 0.0, static_cast<double>(m) - 2.0);
    const auto i = static_cast<std::size_t>(cell);
    const double u = x - cell;

    const double y0 = values_[i], y1 = values_[i + 1];
    const double m0 = slopes_[i] * step_, m1 = slopes_[i + 1] * step_;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
           (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
}

} // namespace mpr
