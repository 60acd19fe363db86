#include "mpr/filter.hpp"

#include <cmath>
#include <sstream>

namespace mpr {

PricePath make_price_path(const TimeGrid& grid, std::vector<double> s_vals) {
    if (s_vals.size() != static_cast<std::size_t>(grid.n) + 1)
        throw Error(Errc::InvalidParams, "price path length does not match its grid");
    for (std::size_t i = 0; i < s_vals.size(); ++i) {
        if (!(s_vals[i] > 0.0) || !std::isfinite(s_vals[i])) {
            std::ostringstream msg;
            msg << "price at node " << i << " is " << s_vals[i] << "; prices must be positive";
            throw Error(Errc::NonPositivePrice, msg.str());
        }
    }
    return PricePath{grid, std::move(s_vals)};
}

FilterPath run_filter(const MarketParams& params, const PricePath& prices,
                      const FilterVariance& fv) {
    if (!(prices.grid == fv.grid))
        throw Error(Errc::InvalidParams, "price grid does not match the filter-variance grid");

    const int n = prices.grid.n;
    const FilterStep step(params, prices.grid.h());

    FilterPath path;
    path.grid = prices.grid;
    path.fv = fv;
    path.pi_vals.resize(static_cast<std::size_t>(n) + 1);
    path.innov_increments.resize(static_cast<std::size_t>(n));

    double pi = params.pi0;
    path.pi_vals[0] = pi;
    for (int i = 0; i < n; ++i) {
        const double dlog_s = std::log(prices.s_vals[static_cast<std::size_t>(i) + 1] /
                                       prices.s_vals[static_cast<std::size_t>(i)]);
        const double di = step.innovation(dlog_s, pi);
        pi = step.advance(pi, fv.r(i), di);
        path.innov_increments[static_cast<std::size_t>(i)] = di;
        path.pi_vals[static_cast<std::size_t>(i) + 1] = pi;
    }
    return path;
}

FilterPath run_filter(const MarketParams& params, const PricePath& prices) {
    return run_filter(params, prices, solve_filter_variance(params, prices.grid));
}

} // namespace mpr
