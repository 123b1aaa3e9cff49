#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "heatobs/certified.hpp"
#include "heatobs/geometry.hpp"

namespace heatobs {

// Which side of the Fourier transform a cube truncation refers to.
enum class Side { spatial, fourier };

// One isotropic Gaussian bump:
//   x -> amplitude * (4 pi width)^(-d/2) * exp(-|x-center|^2 / (4 width)).
// Heat flow by time t maps width -> width + t with amplitude and center fixed,
// which is what makes this family closed under every operation we need.
struct GaussianTerm {
    double amplitude = 0.0;
    Vec center;
    double width = 1.0;
};

class GaussianMixtureField {
public:
    GaussianMixtureField(int dim, std::vector<GaussianTerm> terms);
    static GaussianMixtureField zero(int dim) { return GaussianMixtureField(dim, {}); }
    static GaussianMixtureField single(double amplitude, const Vec& center, double width);

    int dim() const { return dim_; }
    const std::vector<GaussianTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double evaluate(const Vec& x) const;
    std::complex<double> fourier_at(const Vec& xi) const;
    GaussianMixtureField heat_evolve(double t) const;
    GaussianMixtureField operator+(const GaussianMixtureField& o) const;
    GaussianMixtureField operator*(double a) const;

    // Exact pairwise Gaussian product-integral formula.
    double inner_product(const GaussianMixtureField& g) const;
    double l2_norm() const;

    // (integral (1+|x|)^(2k) |f|^2 dx)^(1/2) by adaptive tensor quadrature.
    Certified weighted_l2_norm(int k, double tol = 1e-10) const;

    // Certified upper bound on the L2 mass outside the centered cube of
    // half-width h, on the designated side of the transform.
    double tail_l2_outside_cube(double halfwidth, Side side = Side::spatial) const;

    // Partial derivative D^alpha f(x); alpha per-axis orders.
    double derivative(const std::array<int, kMaxDim>& alpha, const Vec& x) const;
    Vec gradient(const Vec& x) const;
    // sup over the cube Q_r(center) of |grad f|, certified upper bound.
    double gradient_sup_bound(const Vec& center, double r) const;

    std::string serialize() const;
    static GaussianMixtureField deserialize(const std::string& text);

private:
    int dim_;
    std::vector<GaussianTerm> terms_;
};

}  // namespace heatobs
