#include <cmath>
#include <complex>

#include "doctest.h"
#include "heatobs/impulse_control.hpp"
#include "heatobs/quad1d.hpp"

using namespace heatobs;

namespace {

GaussianMixtureField trial_mixture(int dim, std::uint64_t seed) {
    auto mix01 = [&seed]() {
        seed += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = seed;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return double(z >> 11) * 0x1.0p-53;
    };
    std::vector<GaussianTerm> terms;
    int count = 1 + int(mix01() * 2.999);
    for (int t = 0; t < count; ++t) {
        Vec c = Vec::zero(dim);
        for (int a = 0; a < dim; ++a) c[a] = 3 * (mix01() - 0.5);
        terms.push_back({mix01() - 0.3, c, 0.4 + 1.6 * mix01()});
    }
    return GaussianMixtureField(dim, terms);
}

}  // namespace

TEST_CASE("feedback on the scaled basis function returns the unit impulse") {
    for (double N : {1.0, 2.0}) {
        LatticeIndexSet set = LatticeIndexSet::cube_set(1, N, 3);
        SampleVector sv{LatticeIndexSet::cube_set(1, N, 0), {std::pow(N, 0.5)}, 0.0};
        auto series = synthesize(N, sv);
        auto grid = FrequencyGrid::for_band(1, N, 64, 4);
        auto v = feedback_gain(series.to_spectral(grid), N, set);
        double want = std::pow(N, -0.5);
        for (size_t i = 0; i < v.values.size(); ++i) {
            double expect = (set.members[i][0] == 0) ? -want : 0.0;
            CHECK(std::abs(v.values[i] - expect) <= 1e-8 * want);
        }
        CHECK(v.l2() == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("feedback operator norm never exceeds N^{-d/2}") {
    for (double N : {1.0, 2.0}) {
        for (std::uint64_t s = 1; s <= 20; ++s) {
            auto g = trial_mixture(1, s);
            auto v = feedback_gain(g, N);
            CHECK(v.l2() <= std::pow(N, -0.5) * g.l2_norm() * (1 + 1e-9) + v.tail_bound);
        }
    }
    auto g2 = trial_mixture(2, 7);
    auto v2 = feedback_gain(g2, 1.5);
    CHECK(v2.l2() <= std::pow(1.5, -1.0) * g2.l2_norm() * (1 + 1e-9) + v2.tail_bound);
}

TEST_CASE("pure high-band input produces no feedback") {
    double N = 1.0;
    auto g = GaussianMixtureField::single(1.0, Vec::of(0.0), 0.2);
    auto grid = FrequencyGrid::for_band(1, N, 64, 6, 0.2);
    auto high = SpectralGridField::from_gaussian(g, grid).band_project(N, Band::high);
    auto v = feedback_gain(high, N, LatticeIndexSet::cube_set(1, N, 4));
    for (double x : v.values) CHECK(std::abs(x) <= 1e-8);
}

TEST_CASE("mixture feedback matches the spectral-quadrature route") {
    double N = 1.5;
    auto g = trial_mixture(1, 42);
    auto set = LatticeIndexSet::cube_set(1, N, 5);
    auto vm = feedback_gain(g, N, set);
    auto grid = FrequencyGrid::for_band(1, N, 64, 6, 0.4);
    auto vs = feedback_gain(SpectralGridField::from_gaussian(g, grid), N, set);
    for (size_t i = 0; i < vm.values.size(); ++i)
        CHECK(std::abs(vm.values[i] - vs.values[i]) <= 1e-6);
}

TEST_CASE("comb_evolve closed form") {
    double N = 2.0, t = 0.3;
    ControlVector v{LatticeIndexSet::cube_set(1, N, 1), {0.0, 1.0, 0.0}, 0.0};
    auto field = comb_evolve(v, t);
    CHECK(field.l2_norm() == doctest::Approx(std::pow(8 * M_PI * t, -0.25)).epsilon(1e-13));

    // linearity
    ControlVector w{v.set, {0.5, -1.0, 2.0}, 0.0};
    ControlVector vw{v.set, {0.5, 0.0, 2.0}, 0.0};  // vw = w + v
    auto lhs = comb_evolve(w, t) + comb_evolve(v, t);
    auto rhs = comb_evolve(vw, t);
    Vec x = Vec::of(0.37);
    CHECK(lhs.evaluate(x) == doctest::Approx(rhs.evaluate(x)).epsilon(1e-12));
    CHECK((comb_evolve(v, t) * 2.0).evaluate(x) ==
          doctest::Approx(comb_evolve(ControlVector{v.set, {0.0, 2.0, 0.0}, 0.0}, t)
                              .evaluate(x))
              .epsilon(1e-12));

    // Fourier transform: (2 pi)^{-d/2} e^{-t xi^2} sum v_n e^{-i (n/N) xi}
    double xi = 1.7;
    std::complex<double> sum = 0;
    for (size_t i = 0; i < w.values.size(); ++i) {
        double pos = w.set.members[i][0] / N;
        sum += w.values[i] * std::exp(std::complex<double>(0, -pos * xi));
    }
    auto want = std::pow(2 * M_PI, -0.5) * std::exp(-t * xi * xi) * sum;
    auto got = comb_evolve(w, t).fourier_at(Vec::of(xi));
    CHECK(std::abs(got - want) <= 1e-13);

    CHECK_THROWS_AS(comb_evolve(v, 0.0), InputError);
}

TEST_CASE("sobolev norm of a single site: exact value and translation invariance") {
    double N = 1.0;
    ControlVector v0{LatticeIndexSet::cube_set(1, N, 0), {1.0}, 0.0};
    auto rep = control_sobolev_norm(v0, 1.0);
    // (2 pi)^{-1} integral (1+xi^2)^{-1} = 1/2
    CHECK(rep.measured == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(rep.holds());

    ControlVector v1{LatticeIndexSet::cube_set(1, N, 1), {0.0, 0.0, 1.0}, 0.0};
    auto rep1 = control_sobolev_norm(v1, 1.0);
    CHECK(rep1.measured == doctest::Approx(rep.measured).epsilon(1e-12));

    CHECK_THROWS_AS(control_sobolev_norm(v0, 0.5), InputError);
}

TEST_CASE("sobolev norm matches a direct quadrature oracle") {
    double N = 2.0;
    ControlVector v{LatticeIndexSet::cube_set(1, N, 1), {0.7, -0.2, 1.1}, 0.0};
    double sup_sq = 4.0;  // |sum v_n e^{-i pos xi}|^2 <= (sum |v_n|)^2
    for (double s : {1.0, 1.8}) {
        auto rep = control_sobolev_norm(v, s);
        auto f = [&](double xi) {
            std::complex<double> sum = 0;
            for (size_t i = 0; i < v.values.size(); ++i) {
                double pos = v.set.members[i][0] / N;
                sum += v.values[i] * std::exp(std::complex<double>(0, -pos * xi));
            }
            return std::pow(1 + xi * xi, -s) * std::norm(sum);
        };
        double R = 2e4;
        Certified quad = adaptive_simpson(f, -R, R, 1e-7);
        double tail = 2 * std::pow(R, 1 - 2 * s) / (2 * s - 1) * sup_sq;
        double oracle_sq = quad.value / (2 * M_PI);
        double slack = (quad.cert + tail) / (2 * M_PI) + 1e-6 * oracle_sq;
        CHECK(std::abs(rep.measured * rep.measured - oracle_sq) <= slack);
        CHECK(rep.holds());
    }
}

TEST_CASE("closed loop beats the uncontrolled norm and decays along the N ladder") {
    ClosedLoopRun run;
    run.y0 = GaussianMixtureField::single(1.0, Vec::of(0.3), 0.6);
    run.T = 1.0;
    run.tau = 0.25;
    double prev = 1e300;
    for (double N : {1.0, 2.0, 4.0}) {
        run.N = N;
        auto rep = closed_loop_final(run);
        CHECK(rep.measured < rep.params.at("uncontrolled"));
        // strict decay until the closed-form cancellation roundoff floor
        CHECK(rep.params.at("ratio") < std::max(0.5 * prev, 1e-6));
        prev = rep.params.at("ratio");
        // rate: log(measured/||y0||) + (T - tau) N^2 stays bounded above
        CHECK(std::log(rep.params.at("ratio")) + (run.T - run.tau) * N * N <= 2.0);
    }
}

TEST_CASE("closed loop at the threshold N reaches the eps target") {
    ClosedLoopRun run;
    run.y0 = GaussianMixtureField::single(1.0, Vec::of(0.0), 0.6);
    run.T = 1.0;
    run.tau = 0.25;
    run.eps = 0.1;
    run.C1 = 1.0;
    run.N = run.C1 * std::sqrt((1 / (run.T - run.tau)) * (1 + std::log(10.0)));
    auto rep = closed_loop_final(run);
    CHECK(rep.params.at("threshold_ok") == 1.0);
    CHECK(rep.measured + rep.certificate <= rep.bound_rhs);
    CHECK(rep.holds());
}

TEST_CASE("duality gap vanishes across random pairs") {
    double T = 1.0, tau = 0.3, N = 1.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        auto y0 = trial_mixture(1, 100 + s);
        auto u0 = trial_mixture(1, 200 + s);
        CHECK(duality_gap(y0, u0, T, tau, N) < 1e-6);
        CHECK(duality_gap(y0, u0, T, T - tau, N) < 1e-6);  // swap tau <-> T - tau
    }
    CHECK(duality_gap(GaussianMixtureField::zero(1), trial_mixture(1, 3), T, tau, N) ==
          0.0);
}

TEST_CASE("windowed closed loop: wide window matches the full run, weight contracts") {
    ClosedLoopRun run;
    run.y0 = GaussianMixtureField::single(1.0, Vec::of(0.2), 0.5);
    run.T = 1.0;
    run.tau = 0.25;
    run.N = 2.0;
    run.r = 40.0;
    auto wide = windowed_closed_loop(run);
    // 1e-12 slack: at N=2 the exact norm cancels down to the roundoff floor
    CHECK(wide.measured <= wide.params.at("unweighted") * (1 + 1e-9) + 1e-12);

    auto full = closed_loop_final(run);
    CHECK(std::abs(wide.params.at("unweighted") - full.measured) <=
          1e-6 * (full.measured + 1e-6));

    run.r = 2.0;
    auto narrow = windowed_closed_loop(run);
    CHECK(narrow.measured <= narrow.params.at("unweighted") * (1 + 1e-9) + 1e-12);
    CHECK(narrow.params.at("r_threshold") > 0);

    run.r = 0.0;
    CHECK_THROWS_AS(windowed_closed_loop(run), InputError);
}
