#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace heatobs {

inline constexpr int kMaxDim = 3;

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Point in R^d, d <= 3. Unused coordinates stay zero.
struct Vec {
    int dim = 0;
    std::array<double, kMaxDim> x{};

    Vec() = default;
    Vec(int d, std::array<double, kMaxDim> c) : dim(d), x(c) {
        if (d < 1 || d > kMaxDim) throw InputError("Vec: dimension must be in {1,2,3}");
    }
    static Vec zero(int d) { return Vec(d, {0.0, 0.0, 0.0}); }
    static Vec of(double a) { return Vec(1, {a, 0.0, 0.0}); }
    static Vec of(double a, double b) { return Vec(2, {a, b, 0.0}); }
    static Vec of(double a, double b, double c) { return Vec(3, {a, b, c}); }

    double operator[](int i) const { return x[static_cast<size_t>(i)]; }
    double& operator[](int i) { return x[static_cast<size_t>(i)]; }

    double norm_sq() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += x[size_t(i)] * x[size_t(i)];
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.x[size_t(i)] -= o.x[size_t(i)];
        return r;
    }
    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.x[size_t(i)] += o.x[size_t(i)];
        return r;
    }
    Vec operator*(double a) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.x[size_t(i)] *= a;
        return r;
    }
    bool operator==(const Vec& o) const { return dim == o.dim && x == o.x; }
};

// Lattice index n in Z^d.
struct Index {
    int dim = 0;
    std::array<int, kMaxDim> n{};

    Index() = default;
    Index(int d, std::array<int, kMaxDim> c) : dim(d), n(c) {}
    static Index of(int a) { return Index(1, {a, 0, 0}); }
    static Index of(int a, int b) { return Index(2, {a, b, 0}); }
    static Index of(int a, int b, int c) { return Index(3, {a, b, c}); }

    int operator[](int i) const { return n[static_cast<size_t>(i)]; }
    int& operator[](int i) { return n[static_cast<size_t>(i)]; }

    double norm_sq() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += double(n[size_t(i)]) * n[size_t(i)];
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }
    int sup_norm() const {
        int m = 0;
        for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(n[size_t(i)]));
        return m;
    }
    Vec scaled(double invN) const {
        Vec v = Vec::zero(dim);
        for (int i = 0; i < dim; ++i) v[i] = n[size_t(i)] * invN;
        return v;
    }
    bool operator==(const Index& o) const { return dim == o.dim && n == o.n; }
    bool operator<(const Index& o) const { return n < o.n; }
};

inline void check_dim(int a, int b, const char* what) {
    if (a != b) throw InputError(std::string(what) + ": dimension mismatch");
}

}  // namespace heatobs
