// Implementation of the kernel special functions.
#include "merolift/specfun.hpp"

#include <cmath>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace merolift {
namespace {

using boost::math::quadrature::gauss_kronrod;

Rational factorialRat(int n) {
    Rational r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

Rational pow4(int h) {
    Rational r = 1;
    for (int i = 0; i < h; ++i) r *= 4;
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Poly
// ---------------------------------------------------------------------------

Poly::Poly(std::vector<Rational> ascending) : c_(std::move(ascending)) { trim(); }

Poly Poly::constant(const Rational& r) { return Poly({r}); }

Poly Poly::monomial(int degree, const Rational& coeff) {
    std::vector<Rational> c(degree + 1, Rational(0));
    c[degree] = coeff;
    return Poly(std::move(c));
}

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

int Poly::degree() const { return (int)c_.size() - 1; }
bool Poly::isZero() const { return c_.empty(); }

std::vector<double> Poly::coeffs() const {
    std::vector<double> out;
    out.reserve(c_.size());
    for (const auto& r : c_) out.push_back(r.convert_to<double>());
    return out;
}

Poly Poly::operator+(const Poly& o) const {
    std::vector<Rational> c(std::max(c_.size(), o.c_.size()), Rational(0));
    for (size_t i = 0; i < c_.size(); ++i) c[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) c[i] += o.c_[i];
    return Poly(std::move(c));
}

Poly Poly::operator-(const Poly& o) const {
    return *this + o.scaled(Rational(-1));
}

Poly Poly::operator*(const Poly& o) const {
    if (isZero() || o.isZero()) return Poly();
    std::vector<Rational> c(c_.size() + o.c_.size() - 1, Rational(0));
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(c));
}

Poly Poly::scaled(const Rational& r) const {
    std::vector<Rational> c = c_;
    for (auto& x : c) x *= r;
    return Poly(std::move(c));
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Rational> c(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * (int)i;
    return Poly(std::move(c));
}

Poly Poly::dividedBy(const Poly& divisor) const {
    if (divisor.isZero()) throw ConfigError("Poly division by zero");
    std::vector<Rational> rem = c_;
    int dd = divisor.degree();
    int dq = degree() - dd;
    if (dq < 0) {
        if (isZero()) return Poly();
        throw ConfigError("Poly division: degree too small, nonzero remainder");
    }
    std::vector<Rational> q(dq + 1, Rational(0));
    for (int k = dq; k >= 0; --k) {
        Rational coeff = rem[k + dd] / divisor.c_[dd];
        q[k] = coeff;
        for (int j = 0; j <= dd; ++j) rem[k + j] -= coeff * divisor.c_[j];
    }
    for (const auto& r : rem)
        if (r != 0) throw ConfigError("Poly division: nonzero remainder");
    return Poly(std::move(q));
}

double Poly::operator()(double x) const {
    double acc = 0.0;
    for (size_t i = c_.size(); i-- > 0;)
        acc = acc * x + c_[i].convert_to<double>();
    return acc;
}

Complex Poly::operator()(Complex x) const {
    Complex acc = 0.0;
    for (size_t i = c_.size(); i-- > 0;)
        acc = acc * x + c_[i].convert_to<double>();
    return acc;
}

// ---------------------------------------------------------------------------
// Incomplete beta and hypergeometric
// ---------------------------------------------------------------------------

double incompleteBeta(double p, double q, double T) {
    if (!(p > 0.0)) throw ConfigError("incompleteBeta requires p > 0");
    if (!(T >= 0.0 && T < 1.0)) throw ConfigError("incompleteBeta requires T in [0,1)");
    if (T == 0.0) return 0.0;
    // Substitute xi = T x^{1/p}: the endpoint weight xi^{p-1} integrates out
    // and the remaining integrand is smooth on [0,1].
    auto f = [&](double x) {
        return std::pow(1.0 - T * std::pow(x, 1.0 / p), q - 1.0);
    };
    double err = 0.0;
    double val = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 12, 1e-12, &err);
    return std::pow(T, p) / p * val;
}

double gaussHypergeometric(double a, double b, double c, double t) {
    auto isNaturalNeg = [](double x) {
        return x <= 1e-12 && std::abs(x - std::round(x)) < 1e-12;
    };
    if (isNaturalNeg(a) || isNaturalNeg(b) || isNaturalNeg(c)) {
        throw ConfigError("gaussHypergeometric: parameter at a series pole");
    }
    if (!(std::abs(t) < 1.0 - 1e-6)) {
        throw ConfigError("gaussHypergeometric: |t| too close to 1");
    }
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 100000; ++n) {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * t;
        sum += term;
        if (std::abs(term) < 1e-15 * std::abs(sum)) return sum;
    }
    throw NonConvergent("gaussHypergeometric: series cap reached");
}

// ---------------------------------------------------------------------------
// B_m kernel
// ---------------------------------------------------------------------------

double bMLogCoefficient(int m) {
    // Derived by unrolling the recurrence
    //   B_m = T/(m (T^2-1)^m) - (2m-1)/(2m) B_{m-1}
    // down to B_0 = log((T+1)/(T-1)): the coefficient is the product of the
    // (2k-1)/(2k) factors, (2m)!/(4^m m!^2).
    Rational r = factorialRat(2 * m) / (pow4(m) * factorialRat(m) * factorialRat(m));
    double v = r.convert_to<double>();
    return (m % 2 == 0) ? v : -v;
}

Complex bMRationalPart(int m, Complex T) {
    if (T.real() <= 1.0) throw ConfigError("bM requires Re T > 1");
    Complex T2m1 = T * T - 1.0;
    Complex sum = 0.0;
    for (int h = 0; h < m; ++h) {
        // Rational-part coefficients from the same recurrence unrolling:
        // (2m)! (m-h)! (m-1-h)! / (4^h (2m-2h)! m!^2).
        Rational coeff = factorialRat(2 * m) * factorialRat(m - h) *
                         factorialRat(m - 1 - h) /
                         (pow4(h) * factorialRat(2 * m - 2 * h) *
                          factorialRat(m) * factorialRat(m));
        double cd = coeff.convert_to<double>();
        if (h % 2 != 0) cd = -cd;
        sum += cd * T * std::pow(T2m1, -(double)(m - h));
    }
    return sum;
}

Complex bM(int m, Complex T) {
    if (T.real() <= 1.0) throw ConfigError("bM requires Re T > 1");
    if (std::abs(T) >= 2.0) {
        // Large-|T| series (termwise integration of the binomial expansion
        // of the defining integral); avoids the cancellation between the
        // rational and logarithmic parts of the closed form.
        Complex invT2 = 1.0 / (T * T);
        Complex pref = 2.0 * std::pow(T, -(2.0 * m + 1.0));
        Complex sum = 0.0, pw = 1.0;
        double binom = 1.0;
        for (int k = 0; k < 400; ++k) {
            Complex term = binom * pw / (2.0 * m + 1.0 + 2.0 * k);
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
            pw *= invT2;
            binom *= (double)(m + 1 + k) / (double)(k + 1);
        }
        return pref * sum;
    }
    // For Re T > 1 the ratio (T+1)/(T-1) stays in the right half-plane, so
    // the principal branch is the analytic continuation.
    return bMRationalPart(m, T) +
           bMLogCoefficient(m) * std::log((T + 1.0) / (T - 1.0));
}

double bMQuadrature(int m, double T) {
    if (!(T > 1.0)) throw ConfigError("bMQuadrature requires T > 1");
    // xi = T/s compactifies [T, infty) to (0, 1].
    auto f = [&](double s) {
        return 2.0 * T * std::pow(s, 2 * m) / std::pow(T * T - s * s, m + 1);
    };
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 12, 1e-12, &err);
}

BmDerivative::BmDerivative(int m, int p) {
    if (p < 1) throw ConfigError("BmDerivative requires p >= 1");
    // First derivative: -2 (T^2-1)^{-(m+1)}.
    num_ = Poly::constant(Rational(-2));
    power_ = m + 1;
    Poly t2m1({Rational(-1), Rational(0), Rational(1)}); // T^2 - 1
    for (int k = 1; k < p; ++k) {
        // d/dT [P (T^2-1)^{-pw}] = [P'(T^2-1) - 2 pw T P] (T^2-1)^{-pw-1}
        Poly twoPwT = Poly::monomial(1, Rational(2 * power_));
        num_ = num_.derivative() * t2m1 - twoPwT * num_;
        ++power_;
    }
}

double BmDerivative::operator()(double T) const {
    return num_(T) * std::pow(T * T - 1.0, -power_);
}

Complex BmDerivative::operator()(Complex T) const {
    return num_(T) * std::pow(T * T - 1.0, -(double)power_);
}

// ---------------------------------------------------------------------------
// Legendre-type polynomial families
// ---------------------------------------------------------------------------

Poly legendreTildeP(int l, int mt) {
    if (mt < -l || mt > l) throw ConfigError("legendreTildeP requires |mt| <= l");
    Poly t2m1({Rational(-1), Rational(0), Rational(1)});
    Poly base = Poly::constant(Rational(1));
    for (int i = 0; i < l; ++i) base = base * t2m1; // (xi^2-1)^l
    for (int i = 0; i < l + mt; ++i) base = base.derivative();
    if (mt >= 0) {
        Poly fac = Poly::constant(Rational(1));
        for (int i = 0; i < mt; ++i) fac = fac * t2m1;
        return base * fac;
    }
    Poly div = Poly::constant(Rational(1));
    for (int i = 0; i < -mt; ++i) div = div * t2m1;
    return base.dividedBy(div); // exact for this family
}

Poly sPoly(int m, int p) {
    if (p < 0 || p > m) throw ConfigError("sPoly requires 0 <= p <= m");
    Poly t2m1({Rational(-1), Rational(0), Rational(1)});
    Poly s; // S_m^0 = 0
    // Recurrence S^{k+1} = (xi^2-1) S' - 2 k xi S + 2 Ptilde_m^{k-m}.
    // (The -2 k xi S coefficient is forced by the raising-operator identity
    // it encodes; it is cross-checked against finite differences of the
    // closed-form ladder in the lift tests.)
    for (int k = 0; k < p; ++k) {
        s = t2m1 * s.derivative() -
            Poly::monomial(1, Rational(2 * k)) * s +
            legendreTildeP(m, k - m).scaled(Rational(2));
    }
    return s;
}

namespace {

double horner(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (size_t i = c.size(); i-- > 0;) s = s * x + c[i];
    return s;
}

double greenKernelDirect(int m, double t) {
    double pb = legendreTildeP(m, 0)(t) * bM(m, Complex(t, 0.0)).real();
    double sp = sPoly(m, m)(t) / std::pow(t * t - 1.0, m);
    return pb - sp;
}

// Near t = 1 the direct combination loses ~eps/(t-1)^m of relative accuracy
// to cancellation.  The kernel equals
//   logCoef * Ptilde_m^0(t) * ln((t+1)/(t-1)) + R(t),  deg R <= m-1,
// (the Q_m split), so logCoef and R are recovered once per m by a linear
// solve against the direct combination at cancellation-free abscissae.
struct GreenSplit {
    double logCoef = 0.0;
    std::vector<double> ptil;
    std::vector<double> rem;
};

const GreenSplit& greenSplit(int m) {
    static std::map<int, GreenSplit> cache;
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    GreenSplit g;
    g.ptil = legendreTildeP(m, 0).coeffs();
    int n = m + 1;
    std::vector<std::vector<double>> A(n, std::vector<double>(n + 1));
    for (int k = 0; k < n; ++k) {
        double t = 2.0 + 0.5 * k;
        A[k][0] = horner(g.ptil, t) * std::log((t + 1.0) / (t - 1.0));
        double p = 1.0;
        for (int j = 1; j < n; ++j, p *= t) A[k][j] = p;
        A[k][n] = greenKernelDirect(m, t);
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        for (int r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            for (int c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = A[r][n];
        for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    g.logCoef = x[0];
    g.rem.assign(x.begin() + 1, x.end());
    return cache.emplace(m, std::move(g)).first->second;
}

} // namespace

double greenKernel(int m, double t) {
    if (!(t > 1.0)) throw ConfigError("greenKernel requires t > 1");
    if (m == 0 || t >= 1.5) return greenKernelDirect(m, t);
    const GreenSplit& g = greenSplit(m);
    return g.logCoef * horner(g.ptil, t) * std::log((t + 1.0) / (t - 1.0)) +
           horner(g.rem, t);
}

double legendreQ(int m, double t) {
    if (!(t > 1.0)) throw ConfigError("legendreQ requires t > 1");
    if (t >= 3.0 && m >= 1) {
        // Large-t series; the forward three-term recurrence loses relative
        // accuracy here because Q_m decays while the recurrence terms do not.
        double pref = std::sqrt(M_PI) * std::tgamma(m + 1.0) /
                      (std::tgamma(m + 1.5) * std::pow(2.0 * t, m + 1.0));
        return pref * gaussHypergeometric(0.5 * (m + 1), 0.5 * (m + 2),
                                          m + 1.5, 1.0 / (t * t));
    }
    double logterm = std::log((t + 1.0) / (t - 1.0));
    double q0 = 0.5 * logterm;
    if (m == 0) return q0;
    double q1 = 0.5 * t * logterm - 1.0;
    for (int n = 2; n <= m; ++n) {
        double qn = ((2.0 * n - 1.0) * t * q1 - (n - 1.0) * q0) / n;
        q0 = q1;
        q1 = qn;
    }
    return q1;
}

double legendreQNeumann(int m, double t) {
    if (!(t > 1.0)) throw ConfigError("legendreQNeumann requires t > 1");
    auto pm = [m](double x) { // classical Legendre P_m by recurrence
        double p0 = 1.0, p1 = x;
        if (m == 0) return p0;
        for (int n = 2; n <= m; ++n) {
            double pn = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
            p0 = p1;
            p1 = pn;
        }
        return p1;
    };
    auto f = [&](double x) { return pm(x) / (t - x); };
    double err = 0.0;
    return 0.5 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                     f, -1.0, 1.0, 12, 1e-12, &err);
}

} // namespace merolift
