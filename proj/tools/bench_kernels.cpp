// Times the parallel data kernels against their serial reference twins on the
// workloads the library actually runs: spectral quadrature sums and lattice
// point-value evaluation.  Reports throughput and the serial/parallel result
// agreement so a regression in either shows up here first.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "heatobs/gaussian_field.hpp"
#include "heatobs/kernels.hpp"
#include "heatobs/spectral_field.hpp"

using namespace heatobs;
using clk = std::chrono::steady_clock;

namespace {

double seconds(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = clk::now();
        f();
        best = std::min(best, seconds(t0, clk::now()));
    }
    return best;
}

void bench_case(const char* name, std::int64_t n, double serial_s, double parallel_s,
                double rel_diff) {
    std::printf("%-28s n=%-10lld serial %8.2f ms  parallel %8.2f ms  speedup %5.2fx"
                "  rel diff %.2e\n",
                name, static_cast<long long>(n), 1e3 * serial_s, 1e3 * parallel_s,
                serial_s / parallel_s, rel_diff);
}

}  // namespace

int main(int argc, char** argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : hardware_threads();
    set_threads(threads);
    std::printf("threads: %d\n", threads);

    // quadrature-style reduction: Gaussian weights over a flat node range
    {
        std::int64_t n = 1 << 24;
        auto term = [](std::int64_t i) {
            double xi = -20.0 + 40.0 * double(i) / double(1 << 24);
            return std::exp(-xi * xi) * std::cos(0.37 * xi);
        };
        double sref = 0, spar = 0;
        double ts = time_best_of(3, [&] { sref = serial_sum(n, term); });
        double tp = time_best_of(3, [&] { spar = parallel_sum(n, term); });
        bench_case("reduction (quadrature sum)", n, ts, tp,
                   std::abs(sref - spar) / std::abs(sref));
    }

    // map-style fill: heat multiplier applied node-wise on a d=2 grid
    {
        auto g = GaussianMixtureField::single(1.0, Vec::of(0.3, -0.2), 0.8);
        auto grid = FrequencyGrid::for_band(2, 2.0, 64, 4);
        auto f = SpectralGridField::from_gaussian(g, grid);
        std::int64_t n = grid.total_nodes();
        std::vector<std::complex<double>> out_s(static_cast<size_t>(n));
        std::vector<std::complex<double>> out_p(static_cast<size_t>(n));
        auto body = [&](std::vector<std::complex<double>>& out) {
            return [&, t = 0.37](std::int64_t i) {
                Vec xi = grid.node(i);
                out[size_t(i)] = f.coeff(i) * std::exp(-t * xi.norm_sq());
            };
        };
        double ts = time_best_of(3, [&] { serial_for(n, body(out_s)); });
        double tp = time_best_of(3, [&] { parallel_for(n, body(out_p)); });
        double diff = 0;
        for (size_t i = 0; i < size_t(n); ++i)
            diff = std::max(diff, std::abs(out_s[i] - out_p[i]));
        bench_case("map (heat multiplier)", n, ts, tp, diff);
    }

    // end-to-end library call dominated by the parallel kernels
    {
        auto g = GaussianMixtureField::single(1.0, Vec::of(0.3, -0.2), 0.8);
        auto grid = FrequencyGrid::for_band(2, 2.0, 64, 4);
        auto f = SpectralGridField::from_gaussian(g, grid);
        double v1 = 0, vt = 0;
        set_threads(1);
        double ts = time_best_of(3, [&] { v1 = f.l2_norm().value; });
        set_threads(threads);
        double tp = time_best_of(3, [&] { vt = f.l2_norm().value; });
        bench_case("spectral l2_norm", grid.total_nodes(), ts, tp,
                   std::abs(v1 - vt) / std::abs(v1));
    }
    return 0;
}
