#pragma once

#include <cmath>
#include <functional>

#include "heatobs/certified.hpp"

namespace heatobs {

// Adaptive Simpson quadrature on [a,b] with absolute tolerance `tol`.
// Returns value plus an error certificate of the usual |S2-S1|/15 form,
// accumulated over the accepted subintervals.
template <typename F>
Certified adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    struct Rec {
        F& f;
        double acc_err = 0;
        int max_depth;
        double run(double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double h6 = (b - a) / 12.0;
            double left = h6 * (fa + 4 * flm + fm);
            double right = h6 * (fm + 4 * frm + fb);
            double delta = left + right - whole;
            if (depth >= max_depth || std::abs(delta) <= 15 * tol) {
                acc_err += std::abs(delta) / 15.0;
                return left + right + delta / 15.0;
            }
            return run(a, lm, m, fa, flm, fm, left, tol / 2, depth + 1) +
                   run(m, rm, b, fm, frm, fb, right, tol / 2, depth + 1);
        }
    };
    if (a == b) return {0.0, 0.0};
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    Rec rec{f, 0.0, max_depth};
    double v = rec.run(a, m, b, fa, fm, fb, whole, tol, 0);
    return {v, rec.acc_err};
}

// integral over [-h,h] of exp(-sigma xi^2) cos(delta xi) dxi.  sigma >= 0.
inline Certified gauss_cos_band(double sigma, double delta, double h, double rel_tol = 1e-13) {
    if (h <= 0) return {0.0, 0.0};
    if (sigma == 0.0) {
        if (delta == 0.0) return {2 * h, 0.0};
        return {2 * std::sin(delta * h) / delta, 0.0};
    }
    // Integrand is even; effective support is min(h, a few sigma-widths).
    double reach = 8.0 / std::sqrt(sigma);
    double b = std::min(h, reach);
    double scale = std::min(2 * b, std::sqrt(M_PI / sigma));
    auto f = [&](double t) { return std::exp(-sigma * t * t) * std::cos(delta * t); };
    Certified core = adaptive_simpson(f, 0.0, b, rel_tol * scale);
    Certified r = core * 2.0;
    if (b < h) {
        // omitted wings |xi| in (b,h]: bounded by the Gaussian tail mass
        double wing = std::sqrt(M_PI / sigma) * std::erfc(std::sqrt(sigma) * b);
        r.cert += wing;
    }
    return r;
}

// integral over |xi| > h of exp(-sigma xi^2) cos(delta xi) dxi.  sigma > 0.
// Computed directly on the tail region so the tiny result keeps full
// relative accuracy (no cancellation against the O(1) band part).
inline Certified gauss_cos_tail(double sigma, double delta, double h, double rel_tol = 1e-13) {
    double peak = std::exp(-sigma * h * h);
    if (peak == 0.0) return {0.0, 0.0};
    // length L with exp(-sigma((h+L)^2 - h^2)) ~ 1e-20 relative
    double L = (std::sqrt(sigma * h * h + 46.0) - std::sqrt(sigma) * h) / std::sqrt(sigma);
    double scale = peak * std::min(L, 0.5 * std::sqrt(M_PI / sigma));
    auto f = [&](double t) { return std::exp(-sigma * t * t) * std::cos(delta * t); };
    Certified half = adaptive_simpson(f, h, h + L, rel_tol * scale);
    double beyond = 0.5 * std::sqrt(M_PI / sigma) * std::erfc(std::sqrt(sigma) * (h + L));
    Certified r = half * 2.0;
    r.cert += 2 * beyond;
    return r;
}

// integral over xi > h of exp(-sigma xi^2) dxi.
inline double gauss_tail_mass(double sigma, double h) {
    return 0.5 * std::sqrt(M_PI / sigma) * std::erfc(std::sqrt(sigma) * h);
}

}  // namespace heatobs
