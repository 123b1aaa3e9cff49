#include "heatobs/gaussian_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "heatobs/quad1d.hpp"

namespace heatobs {

namespace {

constexpr double kMinWidth = 1e-12;  // (4 pi s)^(-d/2) overflows below this

double prefactor(double width, int dim) {
    return std::pow(4.0 * M_PI * width, -0.5 * dim);
}

// integral over (h, infinity) of t^m exp(-beta t^2) dt, by parts recursion.
double power_gauss_tail(int m, double beta, double h) {
    if (h < 0) h = 0;
    if (m == 0) return 0.5 * std::sqrt(M_PI / beta) * std::erfc(std::sqrt(beta) * h);
    if (m == 1) return std::exp(-beta * h * h) / (2 * beta);
    return std::pow(h, m - 1) * std::exp(-beta * h * h) / (2 * beta) +
           (m - 1) / (2 * beta) * power_gauss_tail(m - 2, beta, h);
}

}  // namespace

GaussianMixtureField::GaussianMixtureField(int dim, std::vector<GaussianTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
    if (dim < 1 || dim > kMaxDim) throw InputError("GaussianMixtureField: dim must be in {1,2,3}");
    for (const auto& t : terms_) {
        check_dim(t.center.dim, dim_, "GaussianMixtureField term center");
        if (!(t.width > kMinWidth))
            throw InputError("GaussianMixtureField: width must exceed 1e-12");
    }
}

GaussianMixtureField GaussianMixtureField::single(double amplitude, const Vec& center,
                                                  double width) {
    return GaussianMixtureField(center.dim, {GaussianTerm{amplitude, center, width}});
}

double GaussianMixtureField::evaluate(const Vec& x) const {
    check_dim(x.dim, dim_, "evaluate");
    double s = 0;
    for (const auto& t : terms_)
        s += t.amplitude * prefactor(t.width, dim_) *
             std::exp(-(x - t.center).norm_sq() / (4 * t.width));
    return s;
}

std::complex<double> GaussianMixtureField::fourier_at(const Vec& xi) const {
    check_dim(xi.dim, dim_, "fourier_at");
    std::complex<double> s = 0;
    double amp = std::pow(2 * M_PI, -0.5 * dim_);
    for (const auto& t : terms_) {
        double phase = 0;
        for (int a = 0; a < dim_; ++a) phase -= t.center[a] * xi[a];
        s += t.amplitude * amp * std::exp(-t.width * xi.norm_sq()) *
             std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return s;
}

GaussianMixtureField GaussianMixtureField::heat_evolve(double t) const {
    if (t < 0) throw InputError("heat_evolve: backward heat flow not supported");
    std::vector<GaussianTerm> out = terms_;
    for (auto& g : out) g.width += t;
    return GaussianMixtureField(dim_, std::move(out));
}

GaussianMixtureField GaussianMixtureField::operator+(const GaussianMixtureField& o) const {
    check_dim(o.dim_, dim_, "mixture sum");
    std::vector<GaussianTerm> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    return GaussianMixtureField(dim_, std::move(out));
}

GaussianMixtureField GaussianMixtureField::operator*(double a) const {
    std::vector<GaussianTerm> out = terms_;
    for (auto& g : out) g.amplitude *= a;
    return GaussianMixtureField(dim_, std::move(out));
}

double GaussianMixtureField::inner_product(const GaussianMixtureField& g) const {
    check_dim(g.dim_, dim_, "inner_product");
    // <k_s(.-c), k_t(.-c')> = k_{s+t}(c-c') by the semigroup property.
    double s = 0;
    for (const auto& a : terms_)
        for (const auto& b : g.terms_) {
            double w = a.width + b.width;
            s += a.amplitude * b.amplitude * prefactor(w, dim_) *
                 std::exp(-(a.center - b.center).norm_sq() / (4 * w));
        }
    return s;
}

double GaussianMixtureField::l2_norm() const {
    return std::sqrt(std::max(0.0, inner_product(*this)));
}

namespace {

// exp(-z) I_0(z), stable for all z >= 0.
double i0e(double z) {
    if (z < 400.0) return std::exp(-z) * std::cyl_bessel_i(0.0, z);
    // asymptotic series; relative error below the a_5/z^5 term (~2e-14 at 400)
    double iz = 1.0 / z;
    double s = 1 + iz * (0.125 + iz * (9.0 / 128 + iz * (75.0 / 1024 + iz * 3675.0 / 32768)));
    return s / std::sqrt(2 * M_PI * z);
}

// exp(-beta (r^2 + mu^2)) times the spherical average of exp(2 beta mu r cos)
// over directions, i.e. the angular kernel of an isotropic Gaussian centred at
// distance mu.  Written in shifted form so huge exponents cancel.
double radial_kernel(int dim, double beta, double mu, double r) {
    double em = std::exp(-beta * (r - mu) * (r - mu));
    double ep = std::exp(-beta * (r + mu) * (r + mu));
    double z = 2 * beta * mu * r;
    switch (dim) {
        case 1:
            return 0.5 * (em + ep);
        case 2:
            return em * i0e(z);
        default:
            if (z < 1e-4)
                return std::exp(-beta * (r * r + mu * mu)) * (1 + z * z / 6);
            return 0.5 * (em - ep) / z;
    }
}

double sphere_area(int dim) {
    return dim == 1 ? 2.0 : (dim == 2 ? 2 * M_PI : 4 * M_PI);
}

}  // namespace

Certified GaussianMixtureField::weighted_l2_norm(int k, double tol) const {
    if (k < 0) throw InputError("weighted_l2_norm: k must be nonnegative");
    if (terms_.empty()) return {0.0, 0.0};

    // |f|^2 is a sum of pairwise products, each an isotropic Gaussian
    // c e^{-beta |x - m|^2}; against the radial weight (1+|x|)^{2k} every
    // pair reduces to one smooth 1-d radial integral.
    Certified sq{0.0, 0.0};
    for (const auto& p : terms_)
        for (const auto& q : terms_) {
            double ap = 1.0 / (4 * p.width), aq = 1.0 / (4 * q.width);
            double beta = ap + aq;
            Vec m = (p.center * ap + q.center * aq) * (1.0 / beta);
            double mu = m.norm();
            double c = p.amplitude * prefactor(p.width, dim_) * q.amplitude *
                       prefactor(q.width, dim_) *
                       std::exp(-ap * aq * (p.center - q.center).norm_sq() / beta);
            double R = mu + std::sqrt((60.0 + 4.0 * k) / beta) + 1.0;
            auto f = [&](double r) {
                return std::pow(1 + r, 2 * k) * std::pow(r, dim_ - 1) *
                       radial_kernel(dim_, beta, mu, r);
            };
            double scale = std::pow(1 + mu, 2 * k) * std::pow(mu + 1, dim_ - 1) *
                           std::sqrt(M_PI / beta);
            Certified I = adaptive_simpson(f, 0.0, R, 0.05 * tol * scale);
            // beyond R: kernel <= e^{-beta (r-mu)^2}, weight via the split
            // (1+r)^m <= 2^(m-1)((1+mu)^m + (r-mu)^m), m = 2k+d-1
            int mm = 2 * k + dim_ - 1;
            double split = std::pow(2.0, std::max(0, mm - 1));
            double tail = split * (std::pow(1 + mu, mm) * power_gauss_tail(0, beta, R - mu) +
                                   power_gauss_tail(mm, beta, R - mu));
            I.cert += tail;
            sq = sq + (I * (sphere_area(dim_) * c));
        }

    Certified r = certified_sqrt(sq);
    if (!r.certified || r.cert > 10 * (tol * r.value + 1e-300))
        throw CertificationError("weighted_l2_norm: quadrature did not certify at tolerance", r);
    return r;
}

double GaussianMixtureField::tail_l2_outside_cube(double halfwidth, Side side) const {
    if (!(halfwidth > 0)) throw InputError("tail_l2_outside_cube: halfwidth must be positive");
    double total = 0;
    for (const auto& t : terms_) {
        double frac = 0;
        double norm_t;
        if (side == Side::spatial) {
            // |term|^2 = A^2 prod_j exp(-(x_j-c_j)^2/(2 s))
            double inv = 1.0 / std::sqrt(2 * t.width);
            for (int a = 0; a < dim_; ++a) {
                double c = t.center[a];
                frac += 0.5 * (std::erfc((halfwidth - c) * inv) + std::erfc((halfwidth + c) * inv));
            }
        } else {
            // |term_hat|^2 = (2pi)^-d a^2 prod_j exp(-2 s xi_j^2), center-free
            for (int a = 0; a < dim_; ++a) {
                (void)a;
                frac += std::erfc(halfwidth * std::sqrt(2 * t.width));
            }
        }
        norm_t = std::abs(t.amplitude) * std::pow(8 * M_PI * t.width, -0.25 * dim_);
        total += norm_t * std::sqrt(std::min(1.0, frac));
    }
    return total;
}

double GaussianMixtureField::derivative(const std::array<int, kMaxDim>& alpha,
                                        const Vec& x) const {
    check_dim(x.dim, dim_, "derivative");
    double s = 0;
    for (const auto& t : terms_) {
        double v = t.amplitude * prefactor(t.width, dim_);
        for (int a = 0; a < dim_; ++a) {
            double y = x[a] - t.center[a];
            double g0 = std::exp(-y * y / (4 * t.width));
            // d^{m} of exp(-y^2/(4s)) via g' = -y/(2s) g, g^(m+1) = -(y g^(m) + m g^(m-1))/(2s)
            double gm1 = 0, gm = g0;
            for (int m = 0; m < alpha[size_t(a)]; ++m) {
                double next = -(y * gm + m * gm1) / (2 * t.width);
                gm1 = gm;
                gm = next;
            }
            v *= gm;
        }
        s += v;
    }
    return s;
}

Vec GaussianMixtureField::gradient(const Vec& x) const {
    Vec g = Vec::zero(dim_);
    for (int a = 0; a < dim_; ++a) {
        std::array<int, kMaxDim> alpha{};
        alpha[size_t(a)] = 1;
        g[a] = derivative(alpha, x);
    }
    return g;
}

double GaussianMixtureField::gradient_sup_bound(const Vec& center, double r) const {
    check_dim(center.dim, dim_, "gradient_sup_bound");
    double total = 0;
    for (const auto& t : terms_) {
        double A = std::abs(t.amplitude) * prefactor(t.width, dim_);
        double comp_sq = 0;
        std::array<double, kMaxDim> env{};  // max of exp factor per axis over the cube
        for (int a = 0; a < dim_; ++a) {
            double lo = center[a] - r - t.center[a], hi = center[a] + r - t.center[a];
            double ymin = (lo <= 0 && hi >= 0) ? 0 : std::min(std::abs(lo), std::abs(hi));
            env[size_t(a)] = std::exp(-ymin * ymin / (4 * t.width));
        }
        for (int a = 0; a < kMaxDim && a < dim_; ++a) {
            double lo = center[a] - r - t.center[a], hi = center[a] + r - t.center[a];
            // max over [lo,hi] of |y|/(2s) exp(-y^2/(4s)); unimodal in |y|, peak at sqrt(2s)
            double peak = std::sqrt(2 * t.width);
            double best = 0;
            auto val = [&](double y) {
                return std::abs(y) / (2 * t.width) * std::exp(-y * y / (4 * t.width));
            };
            best = std::max(val(lo), val(hi));
            if (lo <= peak && peak <= hi) best = std::max(best, val(peak));
            if (lo <= -peak && -peak <= hi) best = std::max(best, val(-peak));
            double rest = 1;
            for (int b = 0; b < dim_; ++b)
                if (b != a) rest *= env[size_t(b)];
            comp_sq += (best * rest) * (best * rest);
        }
        total += A * std::sqrt(comp_sq);
    }
    return total;
}

std::string GaussianMixtureField::serialize() const {
    std::ostringstream os;
    char buf[64];
    os << dim_ << "\n";
    for (const auto& t : terms_) {
        std::snprintf(buf, sizeof buf, "%.17g", t.amplitude);
        os << buf;
        for (int a = 0; a < dim_; ++a) {
            std::snprintf(buf, sizeof buf, " %.17g", t.center[a]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " %.17g", t.width);
        os << buf << "\n";
    }
    return os.str();
}

GaussianMixtureField GaussianMixtureField::deserialize(const std::string& text) {
    std::istringstream is(text);
    int d = 0;
    if (!(is >> d)) throw InputError("mixture parse: missing dimension");
    if (d < 1 || d > kMaxDim) throw InputError("mixture parse: dimension must be in {1,2,3}");
    std::vector<GaussianTerm> terms;
    double a;
    while (is >> a) {
        GaussianTerm t;
        t.amplitude = a;
        t.center = Vec::zero(d);
        for (int i = 0; i < d; ++i)
            if (!(is >> t.center[i])) throw InputError("mixture parse: truncated term");
        if (!(is >> t.width)) throw InputError("mixture parse: truncated term");
        terms.push_back(t);
    }
    return GaussianMixtureField(d, std::move(terms));
}

}  // namespace heatobs
