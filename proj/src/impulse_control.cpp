#include "heatobs/impulse_control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "heatobs/observability.hpp"
#include "heatobs/tensor_quad.hpp"

namespace heatobs {

namespace {

// Pointwise envelope of (chi_{<=N} g): in-band value = g - high part, and the
// telescoped high part obeys the same per-term Gaussian envelope as g with d
// extra copies, so amplitude (1+d)|a_t| dominates both together.
GaussianMixtureField lowband_envelope(const GaussianMixtureField& g) {
    std::vector<GaussianTerm> env;
    for (const auto& t : g.terms())
        env.push_back({(1.0 + g.dim()) * std::abs(t.amplitude), t.center, t.width});
    return GaussianMixtureField(g.dim(), env);
}

// Matern kernel kappa(r) = integral (1+|xi|^2)^{-s} e^{-i xi.x} dxi, |x| = r.
double matern_kernel(int d, double s, double r) {
    double nu = s - 0.5 * d;
    if (r == 0.0)
        return std::pow(M_PI, 0.5 * d) * std::tgamma(nu) / std::tgamma(s);
    return std::pow(2 * M_PI, 0.5 * d) * std::pow(2.0, 1 - s) / std::tgamma(s) *
           std::pow(r, nu) * std::cyl_bessel_k(nu, r);
}

// Schur row-sum bound for the Gram of heat kernels of width t on the N-lattice:
// rows are dominated by (8 pi t)^{-d/2} (1 + sqrt(8 pi^2 t) N)^d via integral
// comparison of the off-diagonal Gaussian decay.
double heat_gram_row_bound(int d, double N, double t) {
    return std::pow(8 * M_PI * t, -0.5 * d) *
           std::pow(1 + std::sqrt(8 * M_PI * M_PI * t) * N, double(d));
}

}  // namespace

double ControlVector::l2() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

ControlVector feedback_gain(const GaussianMixtureField& g, double N,
                            const LatticeIndexSet& set) {
    if (!(N > 0)) throw InputError("feedback_gain: N must be positive");
    double nd = std::pow(N, -double(g.dim()));
    ControlVector v{set, {}, set.tail_bound};
    v.values.reserve(set.members.size());
    for (const auto& n : set.members) {
        Vec x = n.scaled(1.0 / N);
        v.values.push_back(-nd * (g.evaluate(x) - highband_point(g, N, x)));
    }
    return v;
}

ControlVector feedback_gain(const GaussianMixtureField& g, double N) {
    if (!(N > 0)) throw InputError("feedback_gain: N must be positive");
    auto env = lowband_envelope(g);
    double nd = std::pow(N, -double(g.dim()));
    auto tail = [&](int M) { return nd * mixture_sample_tail(env, N, M); };
    double tol = 1e-4 * std::pow(N, -0.5 * g.dim()) * g.l2_norm();
    auto set = LatticeIndexSet::adaptive(g.dim(), N, tail, tol);
    return feedback_gain(g, N, set);
}

ControlVector feedback_gain(const SpectralGridField& g, double N,
                            const LatticeIndexSet& set) {
    if (!(N > 0)) throw InputError("feedback_gain: N must be positive");
    auto low = g.band_project(N, Band::low);
    double nd = std::pow(N, -double(g.grid().dim));
    ControlVector v{set, {}, set.tail_bound};
    v.values.reserve(set.members.size());
    for (const auto& n : set.members)
        v.values.push_back(-nd * low.point_value(n.scaled(1.0 / N)).real());
    return v;
}

GaussianMixtureField comb_evolve(const ControlVector& v, double t) {
    if (!(t > 0)) throw InputError("comb_evolve: t must be positive");
    std::vector<GaussianTerm> terms;
    for (size_t i = 0; i < v.values.size(); ++i) {
        if (v.values[i] == 0.0) continue;
        terms.push_back({v.values[i], v.set.members[i].scaled(1.0 / v.set.N), t});
    }
    return GaussianMixtureField(v.set.dim, terms);
}

BoundReport control_sobolev_norm(const ControlVector& v, double s, double C) {
    int d = v.set.dim;
    double N = v.set.N;
    if (!(s > 0.5 * d))
        throw InputError("control_sobolev_norm: requires s > d/2 for convergence");
    double twopi_d = std::pow(2 * M_PI, -double(d));
    double k0 = matern_kernel(d, s, 0.0);

    double sq = 0.0, abs_acc = 0.0;
    size_t m = v.values.size();
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            Vec diff = v.set.members[i].scaled(1.0 / N);
            Vec xj = v.set.members[j].scaled(1.0 / N);
            for (int a = 0; a < d; ++a) diff[a] -= xj[a];
            double k = matern_kernel(d, s, diff.norm());
            sq += v.values[i] * v.values[j] * k;
            abs_acc += std::abs(v.values[i] * v.values[j]) * k;
        }
    }
    sq *= twopi_d;

    // omitted coefficients: Schur row-sum from |kappa(r)| <= 2^s kappa(0)
    // e^{-r/2} (contour shift of the defining integral by i/2)
    double q = 1.0 / (std::exp(1.0 / (2 * N)) - 1.0);
    double row = twopi_d * k0 * (1 + std::pow(2.0, s) * (std::pow(1 + 2 * q, d) - 1));
    double cert_sq = twopi_d * abs_acc * 1e-12 +
                     v.tail_bound * (2 * v.l2() + v.tail_bound) * row;
    Certified measured = certified_sqrt({std::max(sq, 0.0), cert_sq + std::max(-sq, 0.0)});

    BoundReport r;
    r.name = "control_sobolev";
    r.measured = measured.value;
    r.bound_rhs = C * (1 + std::pow(N, 0.5 * d)) * v.l2();
    r.certificate = measured.cert + C * (1 + std::pow(N, 0.5 * d)) * v.tail_bound;
    r.certified = measured.certified;
    r.params = {{"d", double(d)}, {"N", N}, {"s", s}, {"C", C},
                {"sites", double(m)}};
    r.policy = "kernel=matern_closed_form";
    return r;
}

BoundReport closed_loop_final(const ClosedLoopRun& run, double tol) {
    if (!(run.T > run.tau) || !(run.tau > 0))
        throw InputError("closed_loop_final: requires T > tau > 0");
    auto v = feedback_gain(run.y0.heat_evolve(run.tau), run.N);
    auto yT = run.y0.heat_evolve(run.T) + comb_evolve(v, run.T - run.tau);
    double measured = yT.l2_norm();
    double y0n = run.y0.l2_norm();
    double uncontrolled = run.y0.heat_evolve(run.T).l2_norm();
    double comb_cert =
        v.tail_bound * std::sqrt(heat_gram_row_bound(run.y0.dim(), run.N, run.T - run.tau));
    double n_threshold =
        run.C1 * std::sqrt((1.0 / (run.T - run.tau)) * (1 + std::log(1.0 / run.eps)));

    BoundReport r;
    r.name = "closed_loop";
    r.measured = measured;
    r.bound_rhs = run.eps * y0n;
    r.certificate = comb_cert + 1e-12 * (measured + uncontrolled) + tol * 0;
    r.certified = true;
    r.params = {{"d", double(run.y0.dim())}, {"T", run.T},      {"tau", run.tau},
                {"N", run.N},                {"eps", run.eps},  {"C1", run.C1},
                {"ratio", measured / y0n},   {"y0_norm", y0n},  {"uncontrolled", uncontrolled},
                {"n_threshold", n_threshold},
                {"threshold_ok", run.N >= n_threshold ? 1.0 : 0.0}};
    r.policy = "impulse=closed_form;threshold=C1_sqrt_log";
    return r;
}

double duality_gap(const GaussianMixtureField& y0, const GaussianMixtureField& u0,
                   double T, double tau, double N) {
    if (!(T > tau) || !(tau > 0)) throw InputError("duality_gap: requires T > tau > 0");
    int d = y0.dim();
    double nd = std::pow(N, -double(d));

    auto v = feedback_gain(y0.heat_evolve(tau), N);
    auto yT = y0.heat_evolve(T) + comb_evolve(v, T - tau);
    double lhs = yT.inner_product(u0);

    // dual side: <y0, e^{tau Delta} f_{N,n}> by grid quadrature of the
    // in-band Fourier form of f_{N,n} under the heat multiplier
    double min_width = 1e300;
    for (const auto& t : y0.terms()) min_width = std::min(min_width, t.width);
    if (y0.empty()) min_width = 1.0;
    auto grid = FrequencyGrid::for_band(d, N, 64, 0, min_width + tau);
    auto low = SpectralGridField::from_gaussian(y0, grid)
                   .apply_heat_multiplier(tau)
                   .band_project(N, Band::low);
    auto uTmt = u0.heat_evolve(T - tau);
    double rhs = y0.inner_product(u0.heat_evolve(T));
    for (const auto& n : v.set.members) {
        Vec x = n.scaled(1.0 / N);
        rhs -= uTmt.evaluate(x) * nd * low.point_value(x).real();
    }
    return std::abs(lhs - rhs);
}

BoundReport windowed_closed_loop(const ClosedLoopRun& run, double tol) {
    if (!(run.T > run.tau) || !(run.tau > 0))
        throw InputError("windowed_closed_loop: requires T > tau > 0");
    if (!(run.r > 0)) throw InputError("windowed_closed_loop: requires r > 0");
    int d = run.y0.dim();
    auto set = LatticeIndexSet::ball_set(d, run.N, run.r);
    auto v = feedback_gain(run.y0.heat_evolve(run.tau), run.N, set);
    auto yT = run.y0.heat_evolve(run.T) + comb_evolve(v, run.T - run.tau);

    double nrm = yT.l2_norm();
    double R = 4.0;
    while (yT.tail_l2_outside_cube(R) > 1e-10 * nrm + 1e-18 && R < 1e4) R *= 2;
    std::array<double, kMaxDim> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        lo[size_t(a)] = -R;
        hi[size_t(a)] = R;
    }
    auto f = [&](const Vec& x) {
        double y = yT.evaluate(x);
        return std::pow(1 + x.norm(), -2.0) * y * y;
    };
    Certified box = integrate_box(d, lo, hi, f, 1e-300, d == 1 ? 64 : 24, 6, 1e-8);
    double spill = yT.tail_l2_outside_cube(R);
    Certified measured =
        certified_sqrt({std::max(box.value, 0.0), box.cert + spill * spill + tol * 0});

    double y0n = run.y0.l2_norm();
    double n_threshold =
        run.C1 * std::sqrt((1.0 / (run.T - run.tau)) * (1 + std::log(1.0 / run.eps)));
    double r_threshold = run.Cr * (1 + std::pow(run.T, 0.5 * d)) *
                         (1 + std::pow(run.T, -0.5)) / run.eps;

    BoundReport rep;
    rep.name = "windowed_closed_loop";
    rep.measured = measured.value;
    rep.bound_rhs = run.eps * y0n;
    rep.certificate = measured.cert;
    rep.certified = measured.certified && box.certified;
    rep.params = {{"d", double(d)},   {"T", run.T},    {"tau", run.tau},
                  {"N", run.N},       {"r", run.r},    {"eps", run.eps},
                  {"unweighted", nrm}, {"y0_norm", y0n}, {"R", R},
                  {"n_threshold", n_threshold},
                  {"r_threshold", r_threshold},
                  {"threshold_ok",
                   (run.N >= n_threshold && run.r >= r_threshold) ? 1.0 : 0.0}};
    rep.policy = "window=ball_strict;weight=inverse_square";
    return rep;
}

}  // namespace heatobs
