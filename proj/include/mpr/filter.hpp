#pragma once

#include <vector>

#include "mpr/riccati.hpp"

namespace mpr {

struct PricePath {
    TimeGrid grid;
    std::vector<double> s_vals; // strictly positive, size n+1
};

/// Validates positivity; throws NonPositivePrice otherwise.
PricePath make_price_path(const TimeGrid& grid, std::vector<double> s_vals);

struct FilterPath {
    TimeGrid grid;
    std::vector<double> pi_vals;          // conditional mean, size n+1
    std::vector<double> innov_increments; // innovation increments dI, size n
    FilterVariance fv;
};

/// One filter update over [t, t+dt]: extracts the innovation increment from
/// the log-price increment and advances pi by Euler-Maruyama with the gain
/// frozen at the left endpoint. Shared by run_filter and the Monte Carlo
/// engine so both see the identical discrete filter.
struct FilterStep {
    double dt;
    double r_rate, sigma, lambda, x_bar, rho_sigma_x;

    FilterStep(const MarketParams& p, double dt_)
        : dt(dt_), r_rate(p.r), sigma(p.sigma), lambda(p.lambda), x_bar(p.x_bar),
          rho_sigma_x(p.rho * p.sigma_x) {}

    double innovation(double dlog_s, double pi) const {
        return (dlog_s - (r_rate + sigma * pi - 0.5 * sigma * sigma) * dt) / sigma;
    }
    double advance(double pi, double r_left, double d_innov) const {
        return pi - lambda * (pi - x_bar) * dt + (r_left + rho_sigma_x) * d_innov;
    }
};

/// Kalman-Bucy filter discretized on the price grid. R(t) comes from the
/// deterministic variance ODE, never from the data.
FilterPath run_filter(const MarketParams& params, const PricePath& prices,
                      const FilterVariance& fv);

/// Convenience overload solving the variance ODE on the price grid.
FilterPath run_filter(const MarketParams& params, const PricePath& prices);

} // namespace mpr
