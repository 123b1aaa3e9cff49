#include "heatobs/sinc_basis.hpp"

#include <cmath>

#include "heatobs/kernels.hpp"

namespace heatobs {

namespace {

double sinc1(double t) {
    double z = M_PI * t;
    if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

}  // namespace

double sinc_eval(double N, const Index& n, const Vec& x) {
    check_dim(n.dim, x.dim, "sinc_eval");
    double p = 1.0;
    for (int a = 0; a < x.dim; ++a) p *= sinc1(N * x[a] - n[a]);
    return p;
}

std::complex<double> sinc_fourier(double N, const Index& n, const Vec& xi) {
    check_dim(n.dim, xi.dim, "sinc_fourier");
    for (int a = 0; a < xi.dim; ++a)
        if (std::abs(xi[a]) > M_PI * N) return 0.0;  // closed cube convention
    double phase = 0;
    for (int a = 0; a < xi.dim; ++a) phase -= n[a] / N * xi[a];
    double amp = std::pow(2 * M_PI, -0.5 * xi.dim) * std::pow(N, -xi.dim);
    return {amp * std::cos(phase), amp * std::sin(phase)};
}

void for_each_index(int dim, int M, const std::function<void(const Index&)>& fn) {
    Index n(dim, {0, 0, 0});
    int lo = -M, hi = M;
    for (int i = lo; i <= hi; ++i) {
        n[0] = i;
        if (dim == 1) {
            fn(n);
            continue;
        }
        for (int j = lo; j <= hi; ++j) {
            n[1] = j;
            if (dim == 2) {
                fn(n);
                continue;
            }
            for (int k = lo; k <= hi; ++k) {
                n[2] = k;
                fn(n);
            }
        }
    }
}

LatticeIndexSet LatticeIndexSet::cube_set(int dim, double N, int max_index) {
    if (!(N > 0) || max_index < 0) throw InputError("cube_set: bad parameters");
    LatticeIndexSet s;
    s.dim = dim;
    s.N = N;
    s.shape = LatticeShape::cube;
    s.radius = max_index;
    for_each_index(dim, max_index, [&](const Index& n) { s.members.push_back(n); });
    return s;
}

LatticeIndexSet LatticeIndexSet::ball_set(int dim, double N, double r) {
    if (!(N > 0) || !(r > 0)) throw InputError("ball_set: bad parameters");
    LatticeIndexSet s;
    s.dim = dim;
    s.N = N;
    s.shape = LatticeShape::ball;
    s.radius = r;
    int M = int(std::ceil(r * N));
    double lim_sq = r * N * r * N;
    for_each_index(dim, M, [&](const Index& n) {
        if (n.norm_sq() < lim_sq) s.members.push_back(n);  // strict: |n/N| < r
    });
    return s;
}

LatticeIndexSet LatticeIndexSet::adaptive(int dim, double N,
                                          const std::function<double(int)>& env, double tol,
                                          int max_radius) {
    int M = 2;
    double tail = env(M);
    while (tail > tol && M < max_radius) {
        M *= 2;
        tail = env(M);
    }
    if (tail > tol)
        throw CertificationError("adaptive index set: tail tolerance unreachable",
                                 {double(M), tail, false});
    LatticeIndexSet s = cube_set(dim, N, M);
    s.shape = LatticeShape::full_adaptive;
    s.tail_bound = tail;
    return s;
}

double mixture_sample_tail(const GaussianMixtureField& mix, double N, int M) {
    int d = mix.dim();
    double total = 0;
    for (const auto& t : mix.terms()) {
        double A = std::abs(t.amplitude) * std::pow(4 * M_PI * t.width, -0.5 * d);
        double s2 = std::sqrt(2 * t.width);
        double h = double(M) / N;
        double full = N * std::sqrt(2 * M_PI * t.width) + 1.0;
        double sq = 0;
        for (int a = 0; a < d; ++a) {
            if (h < std::abs(t.center[a])) return 1e300;  // envelope not yet decreasing
            double out = N * std::sqrt(M_PI * t.width / 2) *
                         (std::erfc((h - t.center[a]) / s2) + std::erfc((h + t.center[a]) / s2));
            double rest = 1;
            for (int b = 0; b < d; ++b)
                if (b != a) rest *= full;
            sq += out * rest;
        }
        total += A * std::sqrt(sq);
    }
    return total;
}

double SampleVector::l2() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

SampleVector sample_mixture(const GaussianMixtureField& mix, const LatticeIndexSet& set) {
    check_dim(mix.dim(), set.dim, "sample_mixture");
    SampleVector sv{set, {}, set.tail_bound};
    sv.values.resize(set.members.size());
    parallel_for(std::int64_t(set.members.size()), [&](std::int64_t i) {
        sv.values[size_t(i)] = mix.evaluate(set.members[size_t(i)].scaled(1.0 / set.N));
    });
    return sv;
}

SampleVector sample_spectral(const SpectralGridField& f, const LatticeIndexSet& set) {
    check_dim(f.grid().dim, set.dim, "sample_spectral");
    SampleVector sv{set, {}, set.tail_bound};
    sv.values.resize(set.members.size());
    for (size_t i = 0; i < set.members.size(); ++i)
        sv.values[i] = f.point_value(set.members[i].scaled(1.0 / set.N)).real();
    return sv;
}

SincSeries::SincSeries(double N, SampleVector samples) : N_(N), s_(std::move(samples)) {
    if (!(N > 0)) throw InputError("SincSeries: N must be positive");
    if (s_.values.size() != s_.set.members.size())
        throw InputError("SincSeries: sample/index count mismatch");
}

double SincSeries::evaluate(const Vec& x) const {
    return serial_sum(std::int64_t(s_.values.size()), [&](std::int64_t i) {
        return s_.values[size_t(i)] * sinc_eval(N_, s_.set.members[size_t(i)], x);
    });
}

std::complex<double> SincSeries::fourier_at(const Vec& xi) const {
    for (int a = 0; a < dim(); ++a)
        if (std::abs(xi[a]) > M_PI * N_) return 0.0;
    double re = 0, im = 0;
    for (size_t i = 0; i < s_.values.size(); ++i) {
        double phase = 0;
        for (int a = 0; a < dim(); ++a) phase -= s_.set.members[i][a] / N_ * xi[a];
        re += s_.values[i] * std::cos(phase);
        im += s_.values[i] * std::sin(phase);
    }
    double amp = std::pow(2 * M_PI, -0.5 * dim()) * std::pow(N_, -dim());
    return {amp * re, amp * im};
}

Certified SincSeries::l2_norm() const {
    double scale = std::pow(N_, -0.5 * dim());
    return {scale * s_.l2(), scale * s_.tail_bound};
}

SpectralGridField SincSeries::to_spectral(const FrequencyGrid& grid) const {
    check_dim(grid.dim, dim(), "to_spectral");
    if (!grid.aligned(N_))
        throw InputError("to_spectral: grid not aligned with the series band");
    std::vector<std::complex<double>> c(size_t(grid.total_nodes()));
    parallel_for(grid.total_nodes(),
                 [&](std::int64_t i) { c[size_t(i)] = fourier_at(grid.node(i)); });
    SpectralGridField f(grid, std::move(c), 0.0);
    return f.band_project(N_, Band::low);  // support already in the cube; sets the cut
}

BoundReport shannon_check(const SpectralGridField& f, double N, double sample_tol) {
    Certified high = f.band_project(N, Band::high).l2_norm();
    if (high.value > std::max(1e-9, high.cert))
        throw InputError("shannon_check: field is not band-limited at this N");
    auto low = f.band_project(N, Band::low);
    Certified norm = low.l2_norm();
    int d = f.grid().dim;
    double nd = std::pow(N, d);

    // Adaptive sample cube: the omitted-sample mass follows from Parseval for
    // band-limited fields: N^d ||f||^2 - sum of kept |f(n/N)|^2.
    // Samples beyond half the aliasing period pi/h of the inverse-transform
    // quadrature are meaningless; keep the cube well inside it.
    int M_cap = std::max(2, int(0.5 * N * M_PI / f.grid().h));
    int M = 2;
    double kept_sq = 0, tail_sq = 0;
    SampleVector sv;
    for (;;) {
        sv = sample_spectral(low, LatticeIndexSet::cube_set(d, N, M));
        kept_sq = 0;
        for (double v : sv.values) kept_sq += v * v;
        tail_sq = std::max(0.0, nd * norm.value * norm.value - kept_sq);
        double n2 = norm.value * norm.value;
        if (tail_sq / nd <= sample_tol * sample_tol + 1e-14 * n2 || M >= M_cap) break;
        M = std::min(2 * M, M_cap);
    }
    sv.tail_bound = std::sqrt(tail_sq);

    auto series = synthesize(N, sv);
    auto diff = low - series.to_spectral(f.grid());
    Certified resid = diff.l2_norm();
    double defect = std::abs(norm.value * norm.value - kept_sq / nd);

    BoundReport r;
    r.name = "shannon_reconstruction";
    r.measured = resid.value;
    r.bound_rhs = 0.0;
    r.certificate = resid.cert + std::pow(N, -0.5 * d) * sv.tail_bound +
                    2 * norm.cert * std::max(1.0, norm.value);
    r.certified = resid.certified;
    r.params["N"] = N;
    r.params["d"] = d;
    r.params["M"] = M;
    r.params["samples"] = double(sv.values.size());
    r.params["defect"] = defect;
    r.policy = "samples=point_value;index=adaptive_parseval";
    return r;
}

}  // namespace heatobs
