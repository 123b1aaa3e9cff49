#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace heatobs {

// A computed value together with an upper bound on its total numerical error
// (quadrature plus truncation). `certified` is false when some contribution
// could not be bounded; downstream reports must carry that flag through.
struct Certified {
    double value = 0.0;
    double cert = 0.0;
    bool certified = true;

    Certified() = default;
    Certified(double v, double c, bool ok = true) : value(v), cert(c), certified(ok) {}

    Certified operator+(const Certified& o) const {
        return {value + o.value, cert + o.cert, certified && o.certified};
    }
    Certified operator-(const Certified& o) const {
        return {value - o.value, cert + o.cert, certified && o.certified};
    }
    Certified operator*(double a) const {
        double s = a < 0 ? -a : a;
        return {value * a, cert * s, certified};
    }
};

// Square root of a certified nonnegative quantity; the certificate follows
// from |sqrt(v+e) - sqrt(v)| <= e / (sqrt(v) + sqrt(max(v-e,0))).
inline Certified certified_sqrt(const Certified& c) {
    double v = c.value < 0 ? 0 : c.value;
    double r = std::sqrt(v);
    double lo = std::sqrt(v > c.cert ? v - c.cert : 0.0);
    double err = (r + lo) > 0 ? c.cert / (r + lo) : std::sqrt(c.cert);
    return {r, err, c.certified};
}

struct CertificationError : std::runtime_error {
    Certified achieved;
    CertificationError(const std::string& msg, Certified got)
        : std::runtime_error(msg), achieved(got) {}
};

}  // namespace heatobs
