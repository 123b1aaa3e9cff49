#include "heatobs/weak_window.hpp"

#include <algorithm>
#include <cmath>

#include "heatobs/observability.hpp"
#include "heatobs/sinc_basis.hpp"
#include "heatobs/tensor_quad.hpp"

namespace heatobs {

namespace {

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

Certified windowed_residual_norm(const GaussianMixtureField& u0, double T, double N,
                                 const std::function<bool(const Index&)>& in_window) {
    if (!(T > 0) || !(N > 0))
        throw InputError("windowed_residual_norm: T, N must be positive");
    auto uT = u0.heat_evolve(T);
    Certified out2 = outband_energy_sq(uT, N);
    Certified alias2 = aliasing_energy_sq(uT, N);
    double nd = std::pow(N, -double(u0.dim()));
    double scale = std::max(uT.l2_norm(), 1e-280);

    int M = 4;
    double tail = 0.0;
    for (;; M = std::min(2 * M, 4096)) {
        tail = mixture_sample_tail(uT, N, M);
        if (tail <= 1e-8 * scale || M >= 4096) break;
    }

    // || u(T) - window sum ||^2 = ||R_full||^2 + N^{-d} sum_{excluded}
    //   (a_n^2 - 2 a_n b_n), a_n = u(T,n/N), b_n = high-band part at n/N
    double excl = 0.0, abs_acc = 0.0;
    for_each_index(u0.dim(), M, [&](const Index& n) {
        if (in_window(n)) return;
        Vec x = n.scaled(1.0 / N);
        double a = uT.evaluate(x);
        double b = highband_point(uT, N, x);
        excl += a * a - 2 * a * b;
        abs_acc += a * a + 2 * std::abs(a * b);
    });

    double b_l2 = std::sqrt(std::max(0.0, alias2.value) * std::pow(N, double(u0.dim())));
    double sq = out2.value + alias2.value + nd * excl;
    double cert = out2.cert + alias2.cert +
                  nd * (tail * tail + 2 * tail * b_l2 + 1e-11 * abs_acc);
    if (sq < 0) {
        cert += -sq;
        sq = 0.0;
    }
    return certified_sqrt({sq, cert});
}

BoundReport windowed_residual(const WindowedExperiment& exp, double C) {
    if (!(exp.r >= 1))
        throw InputError("windowed_residual: the bound requires r >= 1");
    if (exp.k < 0) throw InputError("windowed_residual: k must be nonnegative");
    double N = exp.N, T = exp.T, r = exp.r;
    int d = exp.u0.dim(), k = exp.k;
    auto pred = [&](const Index& n) { return n.scaled(1.0 / N).norm() < r; };
    Certified res = windowed_residual_norm(exp.u0, T, N, pred);

    Certified w = exp.u0.weighted_l2_norm(k);
    double tn2 = T * N * N;
    double window_term;
    if (k == 1) {
        window_term = (1 + std::pow(T, 0.5 * d)) * (1 + std::pow(T, -0.5)) / r;
    } else {
        window_term = std::pow(double(d), 0.5 * k) * std::pow(12.0, k) * factorial(d + k) *
                      (1 + std::pow(r, -double(d)) * std::pow(T, 0.5 * d)) *
                      (1 + std::pow(T, -0.5 * k)) * std::pow(1 + r, -double(k));
    }
    double shape = C * (1 + std::pow(tn2, -0.25 * d)) * (std::exp(-tn2) + window_term);

    BoundReport rep;
    rep.name = "windowed_residual";
    rep.measured = res.value;
    rep.bound_rhs = shape * w.value;
    rep.certificate = res.cert + shape * w.cert;
    rep.certified = res.certified && w.certified;
    rep.params = {{"d", double(d)}, {"T", T}, {"N", N}, {"r", r}, {"k", double(k)},
                  {"C", C}};
    rep.policy = "window=strict_euclidean";
    return rep;
}

BoundReport moment_growth_check(const GaussianMixtureField& u0, double T,
                                const std::array<int, kMaxDim>& alpha, int k,
                                double rel_tol) {
    int d = u0.dim();
    int order = 0;
    for (int a = 0; a < d; ++a) {
        if (alpha[size_t(a)] < 0) throw InputError("moment_growth_check: negative order");
        order += alpha[size_t(a)];
    }
    if (order > 4 || k < 0 || k > 3)
        throw InputError("moment_growth_check: requires |alpha| <= 4 and k <= 3");
    if (!(T > 0)) throw InputError("moment_growth_check: T must be positive");

    auto uT = u0.heat_evolve(T);

    // Envelope of |D^alpha u(T)| from Cramer's Hermite bound:
    //   |d^m/dy^m e^{-y^2/4s}| <= 1.09 sqrt(m!) (2s)^{-m/2} e^{-y^2/8s},
    // encoded as width-2s and width-4s mixtures for the box-tail certificate.
    std::vector<GaussianTerm> env_terms;
    double s_max = 0.0, cm = 0.0;
    for (const auto& t : uT.terms()) {
        double f = std::abs(t.amplitude) * std::pow(2.0, 0.5 * d);
        for (int a = 0; a < d; ++a) {
            int m = alpha[size_t(a)];
            f *= 1.09 * std::sqrt(factorial(m)) * std::pow(2 * t.width, -0.5 * m);
            cm = std::max(cm, std::abs(t.center[a]));
        }
        env_terms.push_back({f * std::pow(2.0, 0.5 * d), t.center, 4 * t.width});
        s_max = std::max(s_max, t.width);
    }
    GaussianMixtureField env2(d, env_terms);
    Certified w_env = env2.weighted_l2_norm(k, 1e-8);
    double reach = std::sqrt(8 * s_max * std::log(1e12));
    double R = cm + reach;
    double tail_cert = std::exp(-reach * reach / (8 * s_max)) *
                       (w_env.value + w_env.cert) * (w_env.value + w_env.cert);

    std::array<double, kMaxDim> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        lo[size_t(a)] = -R;
        hi[size_t(a)] = R;
    }
    auto f = [&](const Vec& x) {
        double dv = uT.derivative(alpha, x);
        return std::pow(1 + x.norm(), 2 * k) * dv * dv;
    };
    Certified box = integrate_box(d, lo, hi, f, 1e-300, d == 1 ? 64 : 24, 6, rel_tol);

    Certified w0 = u0.weighted_l2_norm(k, 1e-8);
    double consts = std::pow(2.0 * d, k + 1) *
                    std::pow(std::pow(6.0, k) * factorial(order + k), 2.0) *
                    std::pow(1 + T, double(k)) * std::pow(T, -double(order));

    BoundReport rep;
    rep.name = "moment_growth";
    rep.measured = box.value;
    rep.bound_rhs = consts * w0.value * w0.value;
    rep.certificate = box.cert + tail_cert + consts * w0.cert * (2 * w0.value + w0.cert);
    rep.certified = box.certified && w0.certified;
    rep.params = {{"d", double(d)},
                  {"T", T},
                  {"k", double(k)},
                  {"order", double(order)},
                  {"a0", double(alpha[0])},
                  {"a1", double(d > 1 ? alpha[1] : 0)},
                  {"a2", double(d > 2 ? alpha[2] : 0)},
                  {"R", R}};
    rep.policy = "quad=tensor_trapezoid;tail=hermite_envelope";
    return rep;
}

std::function<double(double)> growth_function(const std::string& name) {
    if (name == "constant") return [](double) { return 1.0; };
    if (name == "linear") return [](double N) { return N; };
    if (name == "quadratic") return [](double N) { return N * N; };
    if (name == "exp") return [](double N) { return std::exp(N); };
    throw InputError("unknown growth function: " + name);
}

double counterexample_center(int dim, double T, double N, double G_N) {
    if (!(T > 0) || !(N > 0) || !(G_N > 0))
        throw InputError("counterexample_center: positive T, N, G required");
    double inner = std::pow(2 * (G_N + 1), double(dim)) + 2 * std::pow(N, -0.5 * dim) +
                   (1 + 0.25 * dim) * std::log(4.0);
    return G_N / N + std::sqrt(2 * (T + 1) * inner);
}

GaussianMixtureField counterexample_field(int dim, double T, double N,
                                          const std::function<double(double)>& G) {
    double L = counterexample_center(dim, T, N, G(N));
    Vec c = Vec::zero(dim);
    c[0] = L;
    return GaussianMixtureField::single(1.0, c, 1.0);
}

BoundReport counterexample_gap(int dim, double T, double N,
                               const std::function<double(double)>& G) {
    double G_N = G(N);
    auto u0 = counterexample_field(dim, T, N, G);
    auto uT = u0.heat_evolve(T);
    auto pred = [&](const Index& n) { return n.norm() <= G_N + 1e-9; };  // ties included
    Certified gap = windowed_residual_norm(u0, T, N, pred);

    double wsum_sq = 0.0;
    for_each_index(dim, int(std::floor(G_N + 1e-9)), [&](const Index& n) {
        if (!pred(n)) return;
        double a = uT.evaluate(n.scaled(1.0 / N));
        wsum_sq += a * a;
    });
    double wnorm = std::pow(N, -0.5 * dim) * std::sqrt(wsum_sq);
    double threshold = 0.5 * std::pow(8 * M_PI, -0.25 * dim) * std::pow(T + 1, -0.25 * dim);

    BoundReport rep;
    rep.name = "counterexample_gap";
    rep.measured = gap.value;
    rep.bound_rhs = threshold;  // lower threshold: assert measured >= bound_rhs
    rep.certificate = gap.cert;
    rep.certified = gap.certified;
    rep.params = {{"d", double(dim)},
                  {"T", T},
                  {"N", N},
                  {"G", G_N},
                  {"L", counterexample_center(dim, T, N, G_N)},
                  {"window_sum", wnorm},
                  {"window_sum_bound", threshold},
                  {"uT_norm", std::pow(8 * M_PI, -0.25 * dim) * std::pow(T + 1, -0.25 * dim)}};
    rep.policy = "assert=lower;window=euclidean_closed";
    return rep;
}

}  // namespace heatobs
