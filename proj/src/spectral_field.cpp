#include "heatobs/spectral_field.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "heatobs/kernels.hpp"

namespace heatobs {

FrequencyGrid FrequencyGrid::for_band(int dim, double N, int cells_per_band, int bands,
                                      double T) {
    if (dim < 1 || dim > kMaxDim) throw InputError("FrequencyGrid: dim must be in {1,2,3}");
    if (!(N > 0)) throw InputError("FrequencyGrid: N must be positive");
    if (cells_per_band < 2 || cells_per_band % 2 != 0)
        throw InputError("FrequencyGrid: cells_per_band must be even and >= 2");
    if (bands == 0) {
        if (!(T > 0)) throw InputError("FrequencyGrid: T must be positive");
        bands = std::max(4, int(std::ceil(6.0 / std::sqrt(T * N * N))));
    }
    if (bands < 1) throw InputError("FrequencyGrid: bands must be positive");
    FrequencyGrid g;
    g.dim = dim;
    g.h = M_PI * N / cells_per_band;
    g.half_cells = bands * cells_per_band;
    return g;
}

std::int64_t FrequencyGrid::total_nodes() const {
    std::int64_t t = 1;
    for (int a = 0; a < dim; ++a) t *= nodes_per_axis();
    return t;
}

Vec FrequencyGrid::node(std::int64_t flat) const {
    Vec v = Vec::zero(dim);
    for (int a = dim - 1; a >= 0; --a) {
        int i = int(flat % nodes_per_axis());
        flat /= nodes_per_axis();
        v[a] = (i - half_cells) * h;
    }
    return v;
}

double FrequencyGrid::weight(std::int64_t flat) const {
    double w = 1.0;
    for (int a = dim - 1; a >= 0; --a) {
        int i = int(flat % nodes_per_axis());
        flat /= nodes_per_axis();
        w *= (i == 0 || i == nodes_per_axis() - 1) ? 0.5 * h : h;
    }
    return w;
}

bool FrequencyGrid::aligned(double N) const {
    double r = M_PI * N / h;
    return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r) &&
           M_PI * N <= coverage() * (1 + 1e-12);
}

SpectralGridField::SpectralGridField(FrequencyGrid grid, std::vector<std::complex<double>> coeffs,
                                     double tail_bound, bool tail_certified)
    : grid_(grid), c_(std::move(coeffs)), tail_(tail_bound), tail_ok_(tail_certified) {
    if (std::int64_t(c_.size()) != grid_.total_nodes())
        throw InputError("SpectralGridField: coefficient count must match grid");
    if (tail_ < 0) throw InputError("SpectralGridField: tail_bound must be nonnegative");
}

SpectralGridField SpectralGridField::zero(const FrequencyGrid& grid) {
    return SpectralGridField(grid, std::vector<std::complex<double>>(size_t(grid.total_nodes())),
                             0.0);
}

SpectralGridField SpectralGridField::from_gaussian(const GaussianMixtureField& mix,
                                                   const FrequencyGrid& grid) {
    check_dim(mix.dim(), grid.dim, "from_gaussian");
    std::vector<std::complex<double>> c(size_t(grid.total_nodes()));
    parallel_for(grid.total_nodes(),
                 [&](std::int64_t i) { c[size_t(i)] = mix.fourier_at(grid.node(i)); });
    double tail = mix.empty() ? 0.0 : mix.tail_l2_outside_cube(grid.coverage(), Side::fourier);
    return SpectralGridField(grid, std::move(c), tail);
}

SpectralGridField SpectralGridField::apply_heat_multiplier(double t) const {
    if (t < 0) throw InputError("apply_heat_multiplier: t must be nonnegative");
    std::vector<std::complex<double>> c(c_.size());
    parallel_for(grid_.total_nodes(), [&](std::int64_t i) {
        c[size_t(i)] = c_[size_t(i)] * std::exp(-t * grid_.node(i).norm_sq());
    });
    double xi = grid_.coverage();
    SpectralGridField r(grid_, std::move(c), tail_ * std::exp(-t * xi * xi), tail_ok_);
    r.support_cut_ = support_cut_;
    return r;
}

SpectralGridField SpectralGridField::band_project(double N, Band part) const {
    if (!(N > 0)) throw InputError("band_project: N must be positive");
    if (!grid_.aligned(N))
        throw InputError("band_project: cube boundary pi*N not on grid nodes; rebuild the grid");
    double cut = M_PI * N + 1e-9 * grid_.h;  // closed cube: boundary nodes are low
    std::vector<std::complex<double>> c(c_.size());
    parallel_for(grid_.total_nodes(), [&](std::int64_t i) {
        Vec xi = grid_.node(i);
        bool in = true;
        for (int a = 0; a < grid_.dim; ++a)
            if (std::abs(xi[a]) > cut) in = false;
        c[size_t(i)] = (in == (part == Band::low)) ? c_[size_t(i)] : 0.0;
    });
    double tail = part == Band::low ? 0.0 : tail_;
    SpectralGridField r(grid_, std::move(c), tail, part == Band::low ? true : tail_ok_);
    if (part == Band::low)
        r.support_cut_ = support_cut_ > 0 ? std::min(support_cut_, M_PI * N) : M_PI * N;
    return r;
}

SpectralGridField SpectralGridField::bessel_apply(double s) const {
    std::vector<std::complex<double>> c(c_.size());
    parallel_for(grid_.total_nodes(), [&](std::int64_t i) {
        c[size_t(i)] = c_[size_t(i)] * std::pow(1 + grid_.node(i).norm_sq(), 0.5 * s);
    });
    double xi = grid_.coverage();
    // growing weight (s > 0): the tail mass cannot be bounded without a decay envelope
    SpectralGridField r =
        s <= 0 ? SpectralGridField(grid_, std::move(c), tail_ * std::pow(1 + xi * xi, 0.5 * s),
                                   tail_ok_)
               : SpectralGridField(grid_, std::move(c), tail_, tail_ == 0.0 && tail_ok_);
    r.support_cut_ = support_cut_;
    return r;
}

SpectralGridField SpectralGridField::operator+(const SpectralGridField& o) const {
    if (!(grid_ == o.grid_)) throw InputError("spectral sum: grids must match");
    std::vector<std::complex<double>> c(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) c[i] = c_[i] + o.c_[i];
    SpectralGridField r(grid_, std::move(c), tail_ + o.tail_, tail_ok_ && o.tail_ok_);
    if (support_cut_ == o.support_cut_) r.support_cut_ = support_cut_;
    return r;
}

SpectralGridField SpectralGridField::operator-(const SpectralGridField& o) const {
    return *this + o * -1.0;
}

SpectralGridField SpectralGridField::operator*(double a) const {
    std::vector<std::complex<double>> c(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) c[i] = c_[i] * a;
    SpectralGridField r(grid_, std::move(c), tail_ * std::abs(a), tail_ok_);
    r.support_cut_ = support_cut_;
    return r;
}

double SpectralGridField::quad_weight(std::int64_t flat) const {
    double w = 1.0;
    int P = grid_.nodes_per_axis();
    for (int a = grid_.dim - 1; a >= 0; --a) {
        int i = int(flat % P);
        flat /= P;
        double xi = std::abs((i - grid_.half_cells) * grid_.h);
        bool half = (i == 0 || i == P - 1) ||
                    (support_cut_ > 0 && std::abs(xi - support_cut_) < 1e-9 * grid_.h);
        w *= half ? 0.5 * grid_.h : grid_.h;
    }
    return w;
}

Certified SpectralGridField::hs_norm(double s) const {
    auto weighted = [&](std::int64_t i) {
        double w = s == 0.0 ? 1.0 : std::pow(1 + grid_.node(i).norm_sq(), s);
        return w * std::norm(c_[size_t(i)]);
    };
    double sq_full = parallel_sum(grid_.total_nodes(), [&](std::int64_t i) {
        return quad_weight(i) * weighted(i);
    });
    // Richardson comparison against the stride-2 coarsening of the same data.
    bool can_coarsen = grid_.half_cells % 2 == 0;
    double cert_quad;
    if (can_coarsen) {
        int P = grid_.nodes_per_axis();
        double sq_coarse = parallel_sum(grid_.total_nodes(), [&](std::int64_t flat) {
            std::int64_t rem = flat;
            double w = 1.0;
            for (int a = grid_.dim - 1; a >= 0; --a) {
                int i = int(rem % P);
                rem /= P;
                if (i % 2 != 0) return 0.0;
                double xi = std::abs((i - grid_.half_cells) * grid_.h);
                bool half = (i == 0 || i == P - 1) ||
                            (support_cut_ > 0 && std::abs(xi - support_cut_) < 1e-9 * grid_.h);
                w *= half ? grid_.h : 2 * grid_.h;
            }
            return w * weighted(flat);
        });
        cert_quad = std::abs(sq_full - sq_coarse);
    } else {
        cert_quad = 0.0;
    }
    Certified sq{sq_full, cert_quad, can_coarsen};
    Certified r = certified_sqrt(sq);
    // beyond-coverage mass, weighted: bounded for s <= 0, needs tail = 0 otherwise
    double xi = grid_.coverage();
    if (s <= 0) {
        r.cert += tail_ * std::pow(1 + xi * xi, 0.5 * s);
    } else {
        r.cert += tail_;
        if (tail_ > 0) r.certified = false;
    }
    r.certified = r.certified && tail_ok_;
    return r;
}

Certified SpectralGridField::l2_norm() const { return hs_norm(0.0); }

std::complex<double> SpectralGridField::point_value(const Vec& x) const {
    check_dim(x.dim, grid_.dim, "point_value");
    double re = parallel_sum(grid_.total_nodes(), [&](std::int64_t i) {
        Vec xi = grid_.node(i);
        double phase = 0;
        for (int a = 0; a < grid_.dim; ++a) phase += x[a] * xi[a];
        auto c = c_[size_t(i)];
        return quad_weight(i) * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
    });
    double im = parallel_sum(grid_.total_nodes(), [&](std::int64_t i) {
        Vec xi = grid_.node(i);
        double phase = 0;
        for (int a = 0; a < grid_.dim; ++a) phase += x[a] * xi[a];
        auto c = c_[size_t(i)];
        return quad_weight(i) * (c.real() * std::sin(phase) + c.imag() * std::cos(phase));
    });
    double amp = std::pow(2 * M_PI, -0.5 * grid_.dim);
    return {amp * re, amp * im};
}

void SpectralGridField::to_csv(std::ostream& os) const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# tail_bound=%.17g certified=%d\n", tail_, tail_ok_ ? 1 : 0);
    os << buf;
    for (int a = 0; a < grid_.dim; ++a) os << "xi" << (a + 1) << ",";
    os << "re,im\n";
    for (std::int64_t i = 0; i < grid_.total_nodes(); ++i) {
        Vec xi = grid_.node(i);
        for (int a = 0; a < grid_.dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g,", xi[a]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c_[size_t(i)].real(),
                      c_[size_t(i)].imag());
        os << buf;
    }
}

SpectralGridField SpectralGridField::from_csv(std::istream& is) {
    std::string line;
    double tail = 0;
    int tail_ok = 1;
    if (!std::getline(is, line) || std::sscanf(line.c_str(), "# tail_bound=%lg certified=%d",
                                               &tail, &tail_ok) != 2)
        throw InputError("spectral csv: missing tail header");
    if (!std::getline(is, line)) throw InputError("spectral csv: missing column header");
    int dim = 0;
    for (size_t p = 0; (p = line.find("xi", p)) != std::string::npos; ++p) ++dim;
    if (dim < 1 || dim > kMaxDim) throw InputError("spectral csv: bad column header");

    std::vector<double> first_axis;
    std::vector<std::complex<double>> c;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double col[kMaxDim + 2];
        std::string cell;
        for (int j = 0; j < dim + 2; ++j) {
            if (!std::getline(row, cell, ',')) throw InputError("spectral csv: short row");
            col[j] = std::stod(cell);
        }
        first_axis.push_back(col[0]);
        c.emplace_back(col[dim], col[dim + 1]);
    }
    std::int64_t total = std::int64_t(c.size());
    // per-axis node count P with P^dim = total
    int P = int(std::round(std::pow(double(total), 1.0 / dim)));
    std::int64_t check = 1;
    for (int a = 0; a < dim; ++a) check *= P;
    if (P < 3 || P % 2 == 0 || check != total)
        throw InputError("spectral csv: node count is not an odd tensor cube");
    int half = (P - 1) / 2;
    // axis-0 is the slowest: stride between distinct values is P^(dim-1)
    std::int64_t stride = total / P;
    double h = (first_axis[size_t(stride)] - first_axis[0]);
    if (!(h > 0)) throw InputError("spectral csv: nodes not increasing");
    for (int i = 0; i < P; ++i) {
        double want = (i - half) * h;
        double got = first_axis[size_t(i * stride)];
        if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want)))
            throw InputError("spectral csv: nodes not uniform and symmetric");
    }
    FrequencyGrid g{dim, h, half};
    return SpectralGridField(g, std::move(c), tail, tail_ok != 0);
}

}  // namespace heatobs
