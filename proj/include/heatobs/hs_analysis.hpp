#pragma once

#include <cstdint>
#include <vector>

#include "heatobs/gaussian_field.hpp"
#include "heatobs/observability.hpp"
#include "heatobs/report.hpp"
#include "heatobs/sinc_basis.hpp"
#include "heatobs/spectral_field.hpp"

namespace heatobs {

// Smooth tensor cutoff: 1 on Q_1(0), 0 off Q_2(0), built from the standard
// exp(-1/(1-t^2)) profile.  cutoff_1d(k, t) is the k-th derivative of the 1-D
// factor (k <= 6, exact code-generated expressions on the transition).
double cutoff_1d(int k, double t);
double cutoff_value(int dim, const Vec& x);
// (1 - Laplacian)^m applied to the tensor cutoff, m <= 3.
double cutoff_poly_laplacian(int dim, int m, const Vec& x);

// integral over the complement of Q_{pi N} of (1+|xi|^2)^s |f^hat|^2, by slab
// decomposition so the possibly denormal result keeps relative accuracy.
// N = 0 gives the full-space integral (the squared H^s norm).
Certified gaussian_hs_weighted_sq(const GaussianMixtureField& f, double s, double N);

// Sampling-series residual of f against the H^s out-of-band bound
//   ||f - sum f(n/N) f_{N,n}|| <= C (1+N^{-d/2}) (out-of-band H^s mass)^{1/2}.
// Mixture overload: exact closed-form split; spectral overload: grid pipeline.
BoundReport hs_residual(const GaussianMixtureField& f, double N, double s,
                        double C = 1.0);
BoundReport hs_residual(const SpectralGridField& f, double N, double s, double C = 1.0);

// Per-cube sup norms over Q_r(rn): dense m^d sub-sampling, gradient-based sup
// interval per cube, Gaussian-envelope bound on the omitted cubes.
struct LocalSupProfile {
    double r = 1.0;
    int max_index = 0;
    std::vector<Index> indices;
    std::vector<double> values;  // sampled sup per cube (lower end of interval)
    std::vector<double> certs;   // per-cube interval width r sqrt(d)/m * sup|grad|
    double tail = 0.0;           // l2 bound on the omitted cubes' sups

    double l2() const;
};

LocalSupProfile local_sup_profile(const GaussianMixtureField& f, double r,
                                  int max_index = -1, int m = 16);
// measured = profile l2, bound_rhs = C (1 + r^{-d/2}) ||f||_{H^s}.
BoundReport local_sup_report(const GaussianMixtureField& f, double r, double s,
                             double C = 1.0, int m = 16);

// ||phi f||_{H^s}^2 <= 4^s (||((1-Lap)^{[s]+1} phi) f||^2 + ||phi <D>^s f||^2),
// d = 1 only, 0 < s < 3 (derivatives of the cutoff up to order 6).
BoundReport commutator_inequality_check(const GaussianMixtureField& f, double s);

// Heat local bounds at (T, r): l2 of cube sups of u(T), of |grad u(T)|, and of
// the samples u(T, rn), each against its (1+(T r^{-2})^{d/4}) T^{-d/4} form
// (extra T^{-1/2} for the gradient).  measured = worst ratio, bound_rhs = C.
BoundReport heat_local_bounds(const GaussianMixtureField& u0, double T, double r,
                              double C = 1.0, int m = 16);

// Band-limited perturbation stability: measured = l2 of f(lambda_n) - f(n/N)
// over the lattice, bound_rhs = C eps pi d e^{pi d} N^{d/2} ||f||.
BoundReport perturbed_bandlimited_gap(const SincSeries& f, double eps, PerturbRule rule,
                                      double C = 1.0, std::uint64_t seed = 0);

}  // namespace heatobs
