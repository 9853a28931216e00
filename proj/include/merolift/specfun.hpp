// Kernel functions: incomplete beta, Gauss hypergeometric, the B_m kernel
// (closed form, quadrature oracle, derivatives), the P-tilde / S polynomial
// families, the composite Green kernel, and a Legendre-Q oracle.
#pragma once

#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "merolift/errors.hpp"

namespace merolift {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

/// Dense polynomial with exact rational coefficients (ascending degree).
/// The recurrences feeding these polynomials are exact, so carrying exact
/// coefficients eliminates rounding inside the symbolic chain; evaluation
/// converts to double.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<Rational> ascending);
    static Poly constant(const Rational& r);
    static Poly monomial(int degree, const Rational& coeff);

    int degree() const;            // -1 for the zero polynomial
    bool isZero() const;
    const std::vector<Rational>& rationalCoeffs() const { return c_; }
    std::vector<double> coeffs() const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly scaled(const Rational& r) const;
    Poly derivative() const;

    /// Exact division; throws ConfigError if the remainder is nonzero.
    Poly dividedBy(const Poly& divisor) const;

    double operator()(double x) const;
    Complex operator()(Complex x) const;

    bool operator==(const Poly& o) const { return c_ == o.c_; }

private:
    void trim();
    std::vector<Rational> c_;
};

/// Incomplete beta function B(p,q;T) = int_0^T xi^{p-1} (1-xi)^{q-1} dxi,
/// p > 0, T in [0,1), q unrestricted (the substitution xi = T x^{1/p}
/// removes the endpoint weight).  Adaptive quadrature to ~1e-11.
double incompleteBeta(double p, double q, double T);

/// Gauss hypergeometric series F(a,b,c;t), |t| < 1 - 1e-6; none of -a, -b,
/// -c may be a natural number (series poles).
double gaussHypergeometric(double a, double b, double c, double t);

/// The closed-form kernel B_m(T) = B(m+1/2, -m; 1/T^2), extended to complex
/// T with Re T > 1: a finite rational part plus
/// (-1)^m (2m)!/(4^m m!^2) * log((T+1)/(T-1)) on the principal branch.
Complex bM(int m, Complex T);

/// The coefficient of log((T+1)/(T-1)) in bM: (-1)^m (2m)!/(4^m m!^2).
double bMLogCoefficient(int m);

/// The finite rational part of bM (bM minus the log term).
Complex bMRationalPart(int m, Complex T);

/// Independent oracle: direct quadrature of int_T^infty 2 dxi/(xi^2-1)^{m+1}
/// (compactified by xi = T/s).  Real T > 1.
double bMQuadrature(int m, double T);

/// p-th derivative of bM as an exact rational function
/// numerator(T) * (T^2-1)^{-power}; p >= 1.
class BmDerivative {
public:
    BmDerivative(int m, int p);
    double operator()(double T) const;
    Complex operator()(Complex T) const;
    const Poly& numerator() const { return num_; }
    int power() const { return power_; }

private:
    Poly num_;
    int power_;
};

/// The two-index polynomial family
///   Ptilde_l^{mt}(xi) = (xi^2-1)^{mt} d^{l+mt}/dxi^{l+mt} (xi^2-1)^l,
/// -l <= mt <= l, with exact integer coefficients (division is exact for
/// mt < 0); Ptilde_{l}^{-l} = 1 and Ptilde_m^0 = 2^m m! * LegendreP_m.
Poly legendreTildeP(int l, int mt);

/// The correction polynomials S_m^p, 0 <= p <= m, from the recurrence
///   S_m^{p+1} = (xi^2-1)(S_m^p)' - 2p xi S_m^p + 2 Ptilde_m^{p-m},
/// with S_m^0 = 0; degree at most p-1.
Poly sPoly(int m, int p);

/// The radial Green kernel
///   Ptilde_m^0(t) * B_m(t) - S_m^m(t)/(t^2-1)^m,   t > 1,
/// proportional to the second-kind Legendre function Q_m(t).
double greenKernel(int m, double t);

/// Classical Legendre function of the second kind Q_m(t), t > 1, by the
/// standard three-term recurrence (oracle for greenKernel).
double legendreQ(int m, double t);

/// Neumann-integral oracle: Q_m(t) = (1/2) int_{-1}^1 P_m(x)/(t-x) dx.
double legendreQNeumann(int m, double t);

} // namespace merolift
