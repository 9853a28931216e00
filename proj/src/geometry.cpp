// Implementation of upper half-plane geometry primitives.
#include "merolift/geometry.hpp"

#include <cmath>
#include <limits>

namespace merolift {

UhpPoint::UhpPoint(double u_, double v_) : u(u_), v(v_) {
    if (!(v > 0.0) || !std::isfinite(u) || !std::isfinite(v)) {
        throw ConfigError("UhpPoint requires finite coordinates with v > 0");
    }
}

UhpPoint::UhpPoint(Complex z) : UhpPoint(z.real(), z.imag()) {}

Mat2R::Mat2R(double a_, double b_, double c_, double d_)
    : a(a_), b(b_), c(c_), d(d_) {
    double det = a * d - b * c;
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw ConfigError("Mat2R requires positive finite determinant");
    }
    double s = std::sqrt(det);
    if (std::abs(det - 1.0) > 1e-9) {
        // Only exact scalings of unimodular matrices are accepted.
        a /= s; b /= s; c /= s; d /= s;
        if (std::abs(a * d - b * c - 1.0) > 1e-9) {
            throw ConfigError("Mat2R normalization failed");
        }
    }
}

Mat2R Mat2R::operator*(const Mat2R& o) const {
    return Mat2R(a * o.a + b * o.c, a * o.b + b * o.d,
                 c * o.a + d * o.c, c * o.b + d * o.d);
}

Mat2R Mat2R::inverse() const {
    return Mat2R(d, -b, -c, a);
}

bool Mat2R::isIntegral(double tol) const {
    auto isInt = [tol](double x) { return std::abs(x - std::round(x)) <= tol; };
    return isInt(a) && isInt(b) && isInt(c) && isInt(d);
}

Complex moebius(const Mat2R& g, Complex z) {
    return (g.a * z + g.b) / (g.c * z + g.d);
}

UhpPoint moebius(const Mat2R& g, const UhpPoint& z) {
    return UhpPoint(moebius(g, z.toComplex()));
}

double coshDist(const UhpPoint& z, const UhpPoint& w) {
    double du = z.u - w.u;
    double dv = z.v - w.v;
    return 1.0 + (du * du + dv * dv) / (2.0 * z.v * w.v);
}

Complex awMap(const UhpPoint& w, const UhpPoint& z) {
    return (z.toComplex() - w.toComplex()) / (z.toComplex() - w.conj());
}

UhpPoint awInverse(const UhpPoint& w, Complex zeta) {
    if (std::abs(zeta) >= 1.0) {
        throw ConfigError("awInverse requires |zeta| < 1");
    }
    Complex z = (w.toComplex() - w.conj() * zeta) / (1.0 - zeta);
    return UhpPoint(z);
}

AwPullbacks awPullbacks(const UhpPoint& w, Complex zeta) {
    if (std::abs(zeta) >= 1.0) {
        throw ConfigError("awPullbacks requires |zeta| < 1");
    }
    const Complex I(0.0, 1.0);
    Complex one_minus = 1.0 - zeta;
    double t = w.v;
    AwPullbacks r;
    r.vOfZ = t * (1.0 - std::norm(zeta)) / std::norm(one_minus);
    r.zMinusWbar = 2.0 * I * t / one_minus;
    r.zMinusW = 2.0 * I * t * zeta / one_minus;
    r.dzFactor = 2.0 * I * t / (one_minus * one_minus);
    return r;
}

ReduceResult reduceToFundamentalDomain(const UhpPoint& z) {
    // Classical translate / invert loop.
    Mat2R gamma;            // accumulates the applied word, gamma * z_in = z_cur
    Complex cur = z.toComplex();
    constexpr long kMaxIter = 1000000;
    for (long it = 0; it < kMaxIter; ++it) {
        double n = std::round(cur.real());
        if (n != 0.0) {
            cur -= n;
            gamma = Mat2R(1.0, -n, 0.0, 1.0) * gamma;
        }
        if (std::norm(cur) < 1.0 - 1e-15) {
            cur = -1.0 / cur;
            gamma = Mat2R(0.0, -1.0, 1.0, 0.0) * gamma;
        } else {
            // Normalize the boundary: prefer Re >= 0 on |z| = 1 edge is not
            // required by the contract; stop once inside the closed domain.
            return {UhpPoint(cur), gamma};
        }
    }
    throw NonConvergent("reduceToFundamentalDomain iteration cap exceeded");
}

} // namespace merolift
