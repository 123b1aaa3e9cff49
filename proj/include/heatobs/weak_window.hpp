#pragma once

#include <array>
#include <functional>
#include <string>

#include "heatobs/certified.hpp"
#include "heatobs/gaussian_field.hpp"
#include "heatobs/report.hpp"

namespace heatobs {

// One finite-window reconstruction experiment: keep only lattice samples with
// |n/N| < r (strict, Euclidean) and measure the resulting residual.
struct WindowedExperiment {
    double T = 1.0;
    double N = 1.0;
    double r = 1.0;
    int k = 1;  // weight order entering the right-hand side
    GaussianMixtureField u0 = GaussianMixtureField::zero(1);
};

// ||u(T) - sum_{n in window} u(T,n/N) f_{N,n}||: the full-lattice residual
// plus the window-excluded sampling mass, combined exactly.
Certified windowed_residual_norm(const GaussianMixtureField& u0, double T, double N,
                                 const std::function<bool(const Index&)>& in_window);

// Finite-window reconstruction bound (k=1 uses the r^{-1} form; other k the
// general statement with its factorial constant).
BoundReport windowed_residual(const WindowedExperiment& exp, double C = 1.0);

// measured = integral (1+|x|)^{2k} |D^alpha u(T,x)|^2 dx, asserted against
// (2d)^{k+1} (6^k (|alpha|+k)!)^2 (1+T)^k T^{-|alpha|} * same weighted norm of
// u0.  rel_tol governs the quadrature of the measured side.
BoundReport moment_growth_check(const GaussianMixtureField& u0, double T,
                                const std::array<int, kMaxDim>& alpha, int k,
                                double rel_tol = 1e-6);

// Named growth classes for the impossibility sweep.
std::function<double(double)> growth_function(const std::string& name);

// Center offset L_N of the escaping Gaussian, given G_N = G(N).
double counterexample_center(int dim, double T, double N, double G_N);

// u_N(0) = term(1, (L_N, 0, ...), 1): unit-width Gaussian placed so the window
// |n| <= G(N) captures less than half of the evolved solution's norm.
GaussianMixtureField counterexample_field(int dim, double T, double N,
                                          const std::function<double(double)>& G);

// measured = || u_N(T) - sum_{|n| <= G(N)} u_N(T,n/N) f_{N,n} ||; bound_rhs is
// the *lower* threshold (1/2)(8 pi)^{-d/4}(T+1)^{-d/4} (policy assert=lower).
// params carry the window-sum norm and its upper bound of the same value.
BoundReport counterexample_gap(int dim, double T, double N,
                               const std::function<double(double)>& G);

}  // namespace heatobs
