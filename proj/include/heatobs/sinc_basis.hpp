#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "heatobs/gaussian_field.hpp"
#include "heatobs/geometry.hpp"
#include "heatobs/report.hpp"
#include "heatobs/spectral_field.hpp"

namespace heatobs {

// f_{N,n}(x) = prod_j sin(pi(N x_j - n_j)) / (pi(N x_j - n_j)).
double sinc_eval(double N, const Index& n, const Vec& x);

// Fourier transform of f_{N,n}: (2 pi)^{-d/2} N^{-d} e^{-i (n/N).xi} on the
// closed cube Q_{pi N}(0), zero outside.
std::complex<double> sinc_fourier(double N, const Index& n, const Vec& xi);

// Visit every n in the cube sup|n_j| <= M.
void for_each_index(int dim, int M, const std::function<void(const Index&)>& fn);

enum class LatticeShape { full_adaptive, cube, ball };

struct LatticeIndexSet {
    int dim = 1;
    double N = 1.0;
    LatticeShape shape = LatticeShape::cube;
    double radius = 0.0;   // cube: max index; ball: r with |n/N| < r strict
    std::vector<Index> members;
    double tail_bound = 0.0;  // full_adaptive: certified l2 mass of omitted samples

    static LatticeIndexSet cube_set(int dim, double N, int max_index);
    static LatticeIndexSet ball_set(int dim, double N, double r);
    // Grow a cube until env(max_index), a certified l2 bound on the omitted
    // sample mass, drops below tol.
    static LatticeIndexSet adaptive(int dim, double N,
                                    const std::function<double(int)>& env, double tol,
                                    int max_radius = 4096);
};

// Certified l2 bound on the samples {mix(n/N)} with sup|n_j| > M, from the
// Gaussian spatial envelope (integral comparison per axis).
double mixture_sample_tail(const GaussianMixtureField& mix, double N, int M);

struct SampleVector {
    LatticeIndexSet set;
    std::vector<double> values;
    double tail_bound = 0.0;

    double l2() const;
};

// Take samples g(n/N) over the index set using the Gaussian closed form.
SampleVector sample_mixture(const GaussianMixtureField& mix, const LatticeIndexSet& set);
// Same via spectral point_value (real part; imaginary residue goes to caller).
SampleVector sample_spectral(const SpectralGridField& f, const LatticeIndexSet& set);

// Finite sinc series sum_n a_n f_{N,n} with exact spectral form
// (2 pi)^{-d/2} N^{-d} sum a_n e^{-i(n/N).xi} on Q_{pi N}(0).
class SincSeries {
public:
    SincSeries(double N, SampleVector samples);

    double N() const { return N_; }
    const SampleVector& samples() const { return s_; }
    int dim() const { return s_.set.dim; }

    double evaluate(const Vec& x) const;
    std::complex<double> fourier_at(const Vec& xi) const;
    // ||series|| = N^{-d/2} ||a||_l2; certificate N^{-d/2} * sample tail
    Certified l2_norm() const;
    // Exact coefficients on a grid aligned with N; support_cut is set so norms
    // treat the cube restriction exactly.
    SpectralGridField to_spectral(const FrequencyGrid& grid) const;

private:
    double N_;
    SampleVector s_;
};

inline SincSeries synthesize(double N, SampleVector samples) {
    return SincSeries(N, std::move(samples));
}

// Theorem check: for band-limited f (high part below tol), reconstruction
// residual ||f - sum f(n/N) f_{N,n}|| and the sampling Parseval defect
// | ||f||^2 - N^{-d} sum |f(n/N)|^2 |, both with certificates.
BoundReport shannon_check(const SpectralGridField& f, double N, double sample_tol = 1e-8);

}  // namespace heatobs
