#pragma once

#include <array>
#include <cstdint>

#include "heatobs/certified.hpp"
#include "heatobs/geometry.hpp"
#include "heatobs/kernels.hpp"

namespace heatobs {

// Tensor-product trapezoid rule over a box, refined by doubling the per-axis
// node count until two successive values agree to `tol`.  The certificate is
// the last successive difference; box-truncation error is the caller's to add.
template <typename F>
Certified integrate_box(int dim, const std::array<double, kMaxDim>& lo,
                        const std::array<double, kMaxDim>& hi, F&& f, double tol,
                        int n0 = 32, int max_doublings = 6, double rel_tol = 0.0) {
    auto level_value = [&](int n_cells) {
        std::array<int, kMaxDim> npts{1, 1, 1};
        std::array<double, kMaxDim> h{0, 0, 0};
        double cell = 1.0;
        for (int a = 0; a < dim; ++a) {
            npts[size_t(a)] = n_cells + 1;
            h[size_t(a)] = (hi[size_t(a)] - lo[size_t(a)]) / n_cells;
            cell *= h[size_t(a)];
        }
        std::int64_t total = 1;
        for (int a = 0; a < dim; ++a) total *= npts[size_t(a)];
        double s = parallel_sum(total, [&](std::int64_t flat) {
            Vec x = Vec::zero(dim);
            double w = 1.0;
            std::int64_t rem = flat;
            for (int a = dim - 1; a >= 0; --a) {
                int i = int(rem % npts[size_t(a)]);
                rem /= npts[size_t(a)];
                x[a] = lo[size_t(a)] + i * h[size_t(a)];
                if (i == 0 || i == npts[size_t(a)] - 1) w *= 0.5;
            }
            return w * f(x);
        });
        return cell * s;
    };

    double prev = level_value(n0);
    int n = n0;
    double diff = 0;
    for (int pass = 0; pass < max_doublings; ++pass) {
        n *= 2;
        double cur = level_value(n);
        diff = std::abs(cur - prev);
        prev = cur;
        if (diff < tol + rel_tol * std::abs(cur)) return {cur, diff};
    }
    return {prev, diff, false};
}

}  // namespace heatobs
