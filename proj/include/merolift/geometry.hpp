// Upper half-plane geometry: points, Moebius actions, hyperbolic distance,
// and the unit-disc chart A_w(z) = (z - w)/(z - wbar) with its pullbacks.
#pragma once

#include <complex>

#include "merolift/errors.hpp"

namespace merolift {

using Complex = std::complex<double>;

/// A point u + iv of the upper half-plane (v > 0).
struct UhpPoint {
    double u = 0.0;
    double v = 1.0;

    UhpPoint() = default;
    UhpPoint(double u_, double v_);
    explicit UhpPoint(Complex z);

    Complex toComplex() const { return {u, v}; }
    Complex conj() const { return {u, -v}; }
};

/// Real 2x2 matrix acting on the upper half-plane; determinant is normalized
/// to 1 on construction (PSL(2,R): gamma and -gamma act identically, and all
/// automorphy weights used here are even).
struct Mat2R {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    Mat2R() = default;
    Mat2R(double a_, double b_, double c_, double d_);

    Mat2R operator*(const Mat2R& o) const;
    Mat2R inverse() const;

    /// Factor of automorphy j(gamma, z) = c z + d, for complex z.
    Complex j(Complex z) const { return c * z + d; }

    bool isIntegral(double tol = 1e-9) const;
};

/// Moebius action (az + b)/(cz + d); preserves the upper half-plane.
UhpPoint moebius(const Mat2R& g, const UhpPoint& z);
Complex moebius(const Mat2R& g, Complex z);

/// cosh of the hyperbolic distance: 1 + |z-w|^2 / (2 v t).  Always >= 1,
/// equal to 1 exactly when z == w.
double coshDist(const UhpPoint& z, const UhpPoint& w);

/// Disc chart centred at w: zeta = (z - w)/(z - wbar), |zeta| < 1.
Complex awMap(const UhpPoint& w, const UhpPoint& z);

/// Inverse chart: z = (w - wbar * zeta)/(1 - zeta).  Rejects |zeta| >= 1.
UhpPoint awInverse(const UhpPoint& w, Complex zeta);

/// Values of the basic pullbacks under z = awInverse(w, zeta):
///   Im z            = t (1 - |zeta|^2) / |1 - zeta|^2
///   z - wbar        = 2 i t / (1 - zeta)
///   z - w           = 2 i t zeta / (1 - zeta)
///   dz / dzeta      = 2 i t / (1 - zeta)^2
struct AwPullbacks {
    double vOfZ;
    Complex zMinusWbar;
    Complex zMinusW;
    Complex dzFactor;
};

AwPullbacks awPullbacks(const UhpPoint& w, Complex zeta);

/// Reduce z into the classical SL(2,Z) fundamental domain
/// { |Re z| <= 1/2, |z| >= 1 }.  Returns (z0, gamma) with gamma z = z0 and
/// gamma integral.
struct ReduceResult {
    UhpPoint z0;
    Mat2R gamma;
};

ReduceResult reduceToFundamentalDomain(const UhpPoint& z);

} // namespace merolift
