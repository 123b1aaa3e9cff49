#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "heatobs/certified.hpp"
#include "heatobs/gaussian_field.hpp"
#include "heatobs/geometry.hpp"

namespace heatobs {

// Uniform tensor-product frequency grid, symmetric about 0, with trapezoid
// weights.  Grids are always built from a band density N so that the cube
// boundaries +-pi N land exactly on nodes; band projectors are then exact
// restrictions instead of smeared cutoffs.
struct FrequencyGrid {
    int dim = 1;
    double h = 1.0;       // per-axis node spacing
    int half_cells = 1;   // nodes at i*h for |i| <= half_cells

    // Coverage Xi = pi N * bands; bands defaults to max(4, ceil(6/sqrt(T N^2)))
    // so that e^{-T Xi^2} undercuts target tolerances for heat-evolved data.
    static FrequencyGrid for_band(int dim, double N, int cells_per_band = 8,
                                  int bands = 0, double T = 1.0);

    double coverage() const { return half_cells * h; }
    int nodes_per_axis() const { return 2 * half_cells + 1; }
    std::int64_t total_nodes() const;
    Vec node(std::int64_t flat) const;
    double weight(std::int64_t flat) const;  // product of per-axis trapezoid weights
    // true when +-pi N coincides with grid nodes and lies inside coverage
    bool aligned(double N) const;
    FrequencyGrid refined() const { return {dim, h / 2, half_cells * 2}; }
    bool operator==(const FrequencyGrid& o) const = default;
};

enum class Band { low, high };

// Samples of a Fourier transform on a FrequencyGrid plus a certified bound on
// the L2 mass beyond the coverage cube.  All operators are node-wise
// multipliers, so they commute exactly.
class SpectralGridField {
public:
    SpectralGridField(FrequencyGrid grid, std::vector<std::complex<double>> coeffs,
                      double tail_bound, bool tail_certified = true);
    static SpectralGridField zero(const FrequencyGrid& grid);
    static SpectralGridField from_gaussian(const GaussianMixtureField& mix,
                                           const FrequencyGrid& grid);

    const FrequencyGrid& grid() const { return grid_; }
    // Halfwidth of the known Fourier support cube (0 = full coverage).  Set by
    // low band projections; quadrature then half-weights nodes on the cut so
    // the restricted integral is an exact trapezoid rule.
    double support_cut() const { return support_cut_; }
    const std::vector<std::complex<double>>& coeffs() const { return c_; }
    std::complex<double> coeff(std::int64_t flat) const { return c_[size_t(flat)]; }
    double tail_bound() const { return tail_; }
    bool tail_certified() const { return tail_ok_; }

    SpectralGridField apply_heat_multiplier(double t) const;
    SpectralGridField band_project(double N, Band part) const;
    SpectralGridField bessel_apply(double s) const;
    SpectralGridField operator+(const SpectralGridField& o) const;
    SpectralGridField operator-(const SpectralGridField& o) const;
    SpectralGridField operator*(double a) const;

    // Quadrature norms; certificate = Richardson comparison against the
    // stride-2 coarsening plus the tail bound.
    Certified l2_norm() const;
    Certified hs_norm(double s) const;

    // Direct non-uniform inverse transform quadrature at x.
    std::complex<double> point_value(const Vec& x) const;

    void to_csv(std::ostream& os) const;
    static SpectralGridField from_csv(std::istream& is);

private:
    double quad_weight(std::int64_t flat) const;

    FrequencyGrid grid_;
    std::vector<std::complex<double>> c_;
    double tail_ = 0.0;
    bool tail_ok_ = true;
    double support_cut_ = 0.0;
};

// Adaptive driver: task(level) for level = 0,1,... until two successive values
// differ by less than tol; certificate = last difference + last task cert.
template <typename Task>
Certified refine_until(Task&& task, double tol, int max_doublings = 6) {
    Certified prev = task(0);
    for (int level = 1; level <= max_doublings; ++level) {
        Certified cur = task(level);
        double diff = std::abs(cur.value - prev.value);
        Certified out{cur.value, diff + cur.cert, cur.certified};
        if (diff < tol) return out;
        prev = cur;
    }
    throw CertificationError("refine_until: no convergence within doubling budget",
                             {prev.value, prev.cert, false});
}

}  // namespace heatobs
