#pragma once

#include "mpr/params.hpp"

namespace mpr::testing {

/// Yearly parameter set from the numerical study (U.S. stock market
/// estimates); rho defaults to the estimate behind the density and frontier
/// figures.
inline MarketParams table1(double rho = -0.93) {
    MarketParams p;
    p.r = 0.034;
    p.sigma = 0.144;
    p.lambda = 0.19;
    p.sigma_x = 0.1875;
    p.x_bar = 0.3958;
    p.rho = rho;
    p.pi0 = 0.3958;
    p.r0 = 0.09;
    p.horizon = 5.0;
    p.gamma = 5.0;
    p.w = 1.0;
    return p;
}

/// Simple bracketing Brent root finder for the oracle cross-checks.
template <class F>
double brent(F f, double a, double b, double tol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa * fb > 0.0) throw std::runtime_error("brent: root not bracketed");
    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa, s = b, fs = fb, d = 0.0;
    bool mflag = true;
    for (int i = 0; i < max_iter && std::abs(b - a) > tol && fb != 0.0; ++i) {
        if (fa != fc && fb != fc) {
            s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        const double lo = (3.0 * a + b) / 4.0;
        const bool cond = !((s > std::min(lo, b) && s < std::max(lo, b))) ||
                          (mflag && std::abs(s - b) >= std::abs(b - c) / 2.0) ||
                          (!mflag && std::abs(s - b) >= std::abs(c - d) / 2.0);
        if (cond) {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa * fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
    }
    return b;
}

} // namespace mpr::testing
