#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "heatobs/spectral_field.hpp"

using namespace heatobs;

namespace {
GaussianMixtureField random_mixture(int d, std::mt19937& rng) {
    std::uniform_real_distribution<double> amp(-2.0, 2.0), pos(-2.0, 2.0), wid(0.3, 3.0);
    std::vector<GaussianTerm> terms;
    int nt = 1 + int(rng() % 3);
    for (int i = 0; i < nt; ++i) {
        Vec c = Vec::zero(d);
        for (int a = 0; a < d; ++a) c[a] = pos(rng);
        terms.push_back({amp(rng), c, wid(rng)});
    }
    return GaussianMixtureField(d, std::move(terms));
}
}  // namespace

TEST_CASE("grid construction and alignment") {
    auto g = FrequencyGrid::for_band(1, 2.0, 8, 4);
    CHECK(g.coverage() == doctest::Approx(4 * M_PI * 2.0));
    CHECK(g.aligned(2.0));
    CHECK(g.aligned(4.0));   // 2 pi on nodes: pi*4 / h = 16
    CHECK(g.aligned(0.5));   // quarter band: pi/2 / (pi/4) = 2
    CHECK_FALSE(g.aligned(2.0 / 3.0));
    CHECK_FALSE(g.aligned(100.0));  // outside coverage
    CHECK_THROWS_AS(FrequencyGrid::for_band(1, 1.0, 7), InputError);
    CHECK_THROWS_AS(FrequencyGrid::for_band(1, -1.0, 8), InputError);
    CHECK_THROWS_AS(FrequencyGrid::for_band(4, 1.0, 8), InputError);
}

TEST_CASE("default coverage grows when T N^2 is small") {
    auto big = FrequencyGrid::for_band(1, 1.0, 4, 0, 0.01);
    CHECK(big.coverage() >= M_PI * 1.0 * 60);
    auto small = FrequencyGrid::for_band(1, 1.0, 4, 0, 4.0);
    CHECK(small.coverage() == doctest::Approx(M_PI * 4));
}

TEST_CASE("grid nodes are symmetric with positive weights summing to the volume") {
    auto g = FrequencyGrid::for_band(2, 1.0, 4, 4);
    double wsum = 0;
    for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
        wsum += g.weight(i);
        CHECK(g.weight(i) > 0);
        Vec xi = g.node(i);
        Vec mirror = g.node(g.total_nodes() - 1 - i);
        CHECK(xi[0] == doctest::Approx(-mirror[0]));
        CHECK(xi[1] == doctest::Approx(-mirror[1]));
    }
    double side = 2 * g.coverage();
    CHECK(wsum == doctest::Approx(side * side).epsilon(1e-12));
}

TEST_CASE("from_gaussian norms match closed forms across random mixtures") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + int(rng() % 2);
        auto mix = random_mixture(d, rng);
        auto grid = FrequencyGrid::for_band(d, 2.0, 8, 4);
        auto f = SpectralGridField::from_gaussian(mix, grid);
        Certified n = f.l2_norm();
        CHECK(std::abs(n.value - mix.l2_norm()) <= n.cert + 1e-9);
    }
}

TEST_CASE("zero mixture gives all-zero coefficients and zero tail") {
    auto grid = FrequencyGrid::for_band(1, 1.0, 4, 4);
    auto f = SpectralGridField::from_gaussian(GaussianMixtureField::zero(1), grid);
    for (auto c : f.coeffs()) CHECK(c == std::complex<double>(0.0));
    CHECK(f.tail_bound() == 0.0);
}

TEST_CASE("heat multiplier equals sampling the evolved mixture") {
    auto mix = GaussianMixtureField::single(1.0, Vec::of(0.7), 1.0);
    auto grid = FrequencyGrid::for_band(1, 1.0, 8, 4);
    auto a = SpectralGridField::from_gaussian(mix, grid).apply_heat_multiplier(0.9);
    auto b = SpectralGridField::from_gaussian(mix.heat_evolve(0.9), grid);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i)
        CHECK(std::abs(a.coeff(i) - b.coeff(i)) < 1e-15);
}

TEST_CASE("heat multiplier basics") {
    auto mix = GaussianMixtureField::single(1.0, Vec::zero(1), 1.0);
    auto grid = FrequencyGrid::for_band(1, 1.0, 8, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    auto id = f.apply_heat_multiplier(0.0);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) CHECK(id.coeff(i) == f.coeff(i));
    auto g = f.apply_heat_multiplier(2.0);
    CHECK(g.l2_norm().value <= f.l2_norm().value);
    // at |xi|^2 = 1/t the coefficient shrinks by exactly e^{-1}
    double t = 1.0 / grid.node(grid.half_cells + 1).norm_sq();
    auto h = f.apply_heat_multiplier(t);
    std::int64_t i = grid.half_cells + 1;
    CHECK(std::abs(h.coeff(i)) ==
          doctest::Approx(std::abs(f.coeff(i)) * std::exp(-1.0)).epsilon(1e-13));
    CHECK_THROWS_AS(f.apply_heat_multiplier(-1.0), InputError);
}

TEST_CASE("band projectors partition the field exactly") {
    std::mt19937 rng(11);
    auto mix = random_mixture(2, rng);
    auto grid = FrequencyGrid::for_band(2, 1.0, 4, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    auto lo = f.band_project(1.0, Band::low);
    auto hi = f.band_project(1.0, Band::high);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i)
        CHECK(lo.coeff(i) + hi.coeff(i) == f.coeff(i));
    CHECK(lo.tail_bound() == 0.0);
    double n2 = std::pow(f.l2_norm().value, 2);
    double split = std::pow(lo.l2_norm().value, 2) + std::pow(hi.l2_norm().value, 2);
    CHECK(n2 == doctest::Approx(split).epsilon(1e-12));
    CHECK_THROWS_AS(f.band_project(2.0 / 3.0, Band::low), InputError);
}

TEST_CASE("band-limited field projects onto itself") {
    auto grid = FrequencyGrid::for_band(1, 1.0, 8, 4);
    auto mix = GaussianMixtureField::single(1.0, Vec::zero(1), 1.0);
    auto lo = SpectralGridField::from_gaussian(mix, grid).band_project(1.0, Band::low);
    auto lo2 = lo.band_project(1.0, Band::low);
    auto hi = lo.band_project(1.0, Band::high);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) {
        CHECK(lo2.coeff(i) == lo.coeff(i));
        CHECK(hi.coeff(i) == std::complex<double>(0.0));
    }
}

TEST_CASE("multipliers commute node-wise") {
    std::mt19937 rng(3);
    auto mix = random_mixture(1, rng);
    auto grid = FrequencyGrid::for_band(1, 1.0, 8, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    auto a = f.apply_heat_multiplier(0.4).band_project(1.0, Band::low);
    auto b = f.band_project(1.0, Band::low).apply_heat_multiplier(0.4);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) CHECK(a.coeff(i) == b.coeff(i));
    auto c = f.bessel_apply(1.5).apply_heat_multiplier(0.4);
    auto d = f.apply_heat_multiplier(0.4).bessel_apply(1.5);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i)
        CHECK(std::abs(c.coeff(i) - d.coeff(i)) < 1e-15);
}

TEST_CASE("bessel weights: identity at s=0, involution, s=2 matches 1 - laplacian") {
    auto mix = GaussianMixtureField::single(1.0, Vec::of(0.5), 0.9);
    auto grid = FrequencyGrid::for_band(1, 1.0, 8, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    auto s0 = f.bessel_apply(0.0);
    auto inv = f.bessel_apply(1.3).bessel_apply(-1.3);
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) {
        CHECK(s0.coeff(i) == f.coeff(i));
        CHECK(std::abs(inv.coeff(i) - f.coeff(i)) < 1e-14 * (1 + std::abs(f.coeff(i))));
    }
    // (1-laplacian) of a Gaussian has transform (1+|xi|^2) f_hat; compare with
    // the analytic second derivative route: (1-d^2/dx^2)f at the node level.
    auto s2 = f.bessel_apply(2.0);
    for (std::int64_t i = 0; i < grid.total_nodes(); i += 7) {
        Vec xi = grid.node(i);
        auto want = f.coeff(i) * (1 + xi.norm_sq());
        CHECK(std::abs(s2.coeff(i) - want) < 1e-15 * (1 + std::abs(want)));
    }
    CHECK(f.hs_norm(1.1).value ==
          doctest::Approx(f.bessel_apply(1.1).l2_norm().value).epsilon(1e-12));
    // positive s with nonzero tail cannot stay certified
    CHECK_FALSE(f.bessel_apply(1.0).tail_certified());
}

TEST_CASE("paper norm value: unit Gaussian l2_norm is (8 pi)^(-1/4)") {
    auto grid = FrequencyGrid::for_band(1, 2.0, 32, 4);
    auto f = SpectralGridField::from_gaussian(
        GaussianMixtureField::single(1.0, Vec::zero(1), 1.0), grid);
    CHECK(std::abs(f.l2_norm().value - std::pow(8 * M_PI, -0.25)) < 1e-8);
}

TEST_CASE("hs_norm of a band-limited field matches a double-resolution oracle") {
    // (1+xi^2)^s has poles at xi = +-i, so trapezoid error decays like
    // e^{-2 pi / h}; h = pi/16 puts that near machine precision
    auto base = FrequencyGrid::for_band(1, 1.0, 16, 4);
    // width 2: spectrum at the cut is ~1e-18, so the trapezoid endpoint term
    // at +-pi cannot pollute the comparison
    auto mix = GaussianMixtureField::single(1.0, Vec::of(0.3), 2.0);
    auto f = SpectralGridField::from_gaussian(mix, base).band_project(1.0, Band::low);
    auto fine = SpectralGridField::from_gaussian(mix, base.refined())
                    .band_project(1.0, Band::low);
    for (double s : {1.0, 3.0, -2.0}) {
        double a = f.hs_norm(s).value;
        double b = fine.hs_norm(s).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-8));
    }
}

TEST_CASE("point_value matches closed-form evaluation") {
    std::mt19937 rng(19);
    auto mix = random_mixture(1, rng);
    // node spacing sets the aliasing period 2 pi / h of the inverse transform;
    // keep it well beyond the field's spatial extent
    auto grid = FrequencyGrid::for_band(1, 4.0, 64, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        Vec x = Vec::of(pos(rng));
        auto v = f.point_value(x);
        CHECK(std::abs(v.real() - mix.evaluate(x)) < 1e-7);
        CHECK(std::abs(v.imag()) < 1e-7);
    }
}

TEST_CASE("point_value at 0 of an even real field is real") {
    auto mix = GaussianMixtureField(1, {{1.0, Vec::of(1.0), 1.0}, {1.0, Vec::of(-1.0), 1.0}});
    auto grid = FrequencyGrid::for_band(1, 2.0, 8, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    CHECK(std::abs(f.point_value(Vec::zero(1)).imag()) < 1e-12);
}

TEST_CASE("conjugate symmetry preserved by real-symbol multipliers") {
    std::mt19937 rng(23);
    auto mix = random_mixture(1, rng);
    auto grid = FrequencyGrid::for_band(1, 1.0, 4, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid)
                 .apply_heat_multiplier(0.3)
                 .bessel_apply(-1.0);
    std::int64_t n = grid.total_nodes();
    for (std::int64_t i = 0; i < n; ++i)
        CHECK(std::abs(f.coeff(i) - std::conj(f.coeff(n - 1 - i))) < 1e-14);
}

TEST_CASE("refine_until drives grid refinement to tolerance") {
    auto mix = GaussianMixtureField::single(1.0, Vec::of(0.4), 1.2);
    int calls = 0;
    Certified r = refine_until(
        [&](int level) {
            ++calls;
            auto grid = FrequencyGrid::for_band(1, 1.0, 4 << level, 4);
            return SpectralGridField::from_gaussian(mix, grid).l2_norm();
        },
        1e-8);
    CHECK(calls <= 4);  // smooth Gaussian: converges within 3 doublings
    CHECK(std::abs(r.value - mix.l2_norm()) <= r.cert + 1e-8);
}

TEST_CASE("refine_until returns immediately when tolerance is loose") {
    int calls = 0;
    Certified r = refine_until(
        [&](int level) {
            ++calls;
            return Certified{1.0 + 0.01 / (1 + level), 0.0};
        },
        0.1);
    CHECK(calls == 2);
    CHECK(r.value == doctest::Approx(1.005));
}

TEST_CASE("refine_until raises on non-convergence with best value attached") {
    CHECK_THROWS_AS(refine_until([&](int) { return Certified{drand48(), 0.0}; }, 1e-12, 3),
                    CertificationError);
}

TEST_CASE("under-covered grid fails with tail-dominated certificate") {
    auto mix = GaussianMixtureField::single(1.0, Vec::zero(1), 0.01);  // very wide spectrum
    auto grid = FrequencyGrid::for_band(1, 0.25, 8, 2);  // coverage ~1.57
    auto f = SpectralGridField::from_gaussian(mix, grid);
    Certified n = f.l2_norm();
    CHECK(n.cert > 0.3 * mix.l2_norm());  // tail dominates: representation unusable
    CHECK(f.tail_bound() > 0.3 * mix.l2_norm());
}

TEST_CASE("csv round trip preserves coefficients, grid, and tail") {
    auto mix = GaussianMixtureField::single(1.0, Vec::of(0.3), 1.0);
    auto grid = FrequencyGrid::for_band(1, 1.0, 4, 4);
    auto f = SpectralGridField::from_gaussian(mix, grid);
    std::stringstream ss;
    f.to_csv(ss);
    auto g = SpectralGridField::from_csv(ss);
    CHECK(g.grid().dim == grid.dim);
    CHECK(g.grid().half_cells == grid.half_cells);
    CHECK(g.grid().h == doctest::Approx(grid.h).epsilon(1e-15));
    CHECK(g.tail_bound() == f.tail_bound());
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) CHECK(g.coeff(i) == f.coeff(i));
}

TEST_CASE("csv import rejects malformed data") {
    std::stringstream a("bogus\n");
    CHECK_THROWS_AS(SpectralGridField::from_csv(a), InputError);
    std::stringstream b("# tail_bound=0 certified=1\nxi1,re,im\n1,0,0\n2,0,0\n");
    CHECK_THROWS_AS(SpectralGridField::from_csv(b), InputError);
}
