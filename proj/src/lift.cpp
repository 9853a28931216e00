// Lattice-sum evaluators for the meromorphic form, its kernel lift, the
// component vector, and the Green's-function normalization.
#include "merolift/lift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <thread>

namespace merolift {

namespace {

constexpr double kPoleGuard = 1e-9; // cosh d must exceed 1 + this

long long posMod(long long a, long long n) {
    long long r = a % n;
    return r < 0 ? r + n : r;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

Complex iPow(int j) {
    switch (posMod(j, 4)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

/// Deterministic pairwise (tree) reduction, independent of how the terms
/// were produced, so threaded evaluation stays bit-stable.
Complex pairwiseSum(const std::vector<Complex>& xs, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        Complex s{0.0, 0.0};
        for (size_t i = lo; i < hi; ++i) s += xs[i];
        return s;
    }
    size_t mid = lo + (hi - lo) / 2;
    return pairwiseSum(xs, lo, mid) + pairwiseSum(xs, mid, hi);
}

int threadCount() {
    if (const char* env = std::getenv("MEROLIFT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Evaluates fn(form) for every form into a vector (order fixed by the
/// form list) and tree-reduces.  The split into threads never affects the
/// result because the reduction topology is fixed.
template <typename Fn>
Complex mapReduce(const std::vector<WeightedForm>& forms, Fn&& fn) {
    std::vector<Complex> terms(forms.size());
    int nt = threadCount();
    if (nt <= 1 || forms.size() < 2048) {
        for (size_t i = 0; i < forms.size(); ++i) terms[i] = fn(forms[i]);
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (forms.size() + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            size_t lo = t * chunk, hi = std::min(forms.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (size_t i = lo; i < hi; ++i) terms[i] = fn(forms[i]);
            });
        }
        for (auto& th : pool) th.join();
    }
    return pairwiseSum(terms, 0, terms.size());
}

double sqrtAbsD(const LiftSpec& spec) {
    return std::sqrt(static_cast<double>(-spec.D));
}

/// Throws SingularPoint when z is within the guard distance of a pole of a
/// non-vanishing configuration.
void guardPoles(const LiftSpec& spec, const std::vector<WeightedForm>& forms,
                const UhpPoint& z) {
    if (spec.vanishes()) return;
    double sd = sqrtAbsD(spec);
    for (const auto& wf : forms) {
        if (wf.weight == 0.0) continue;
        if (qZ(wf.q, z) / sd <= 1.0 + kPoleGuard)
            throw SingularPoint("evaluation point within guard distance of a "
                                "CM point");
    }
}

/// Sum of |coefficients| of a polynomial: |P(c)| <= this * c^deg for c >= 1.
double absCoeffSum(const Poly& p) {
    double s = 0.0;
    for (double c : p.coeffs()) s += std::abs(c);
    return std::max(s, 1.0);
}

struct Envelope {
    double pref;     // c-independent prefactor (family weight included)
    int slackPower;  // per-term bound: pref * c^{-m-1} * (1-c^{-2})^{-slackPower/2}
};

Envelope fMeroEnvelope(const LiftSpec& s, double v) {
    double pref = std::pow(static_cast<double>(-s.D), (s.m + 1) / 2.0) /
                  (2.0 * std::pow(static_cast<double>(s.N), s.m / 2.0)) *
                  std::pow(sqrtAbsD(s) * v, -(s.m + 1.0)) * 2.0;
    return {pref, s.m + 1};
}

Envelope phiEnvelope(const LiftSpec& s, double v) {
    double pref = factorial(s.m) /
                  std::pow(8.0 * std::sqrt(static_cast<double>(s.N)) * M_PI,
                           s.m) *
                  std::pow(static_cast<double>(-s.D), s.m / 2.0) *
                  std::pow(v, -s.m) * 2.0 / (2.0 * s.m + 1.0) * 2.0;
    return {pref, 2 * (s.m + 1)};
}

Envelope deltaPhiEnvelope(const LiftSpec& s, double v) {
    double pref = 2.0 * std::pow(std::abs(s.r()), s.m / 2.0) *
                  factorial(s.m) / std::pow(4.0 * M_PI, s.m + 1.0) *
                  std::pow(v, -(s.m + 1.0)) * 2.0;
    return {pref, s.m + 1};
}

Envelope componentEnvelope(const LiftSpec& s, double v) {
    double K = std::pow(std::abs(s.r()), s.m / 2.0) * factorial(s.m) /
               std::pow(M_PI, s.m);
    double worst = 0.0;
    for (int j = 0; j <= s.m; ++j) {
        double ptil = absCoeffSum(legendreTildeP(s.m, j - s.m));
        double spol = absCoeffSum(sPoly(s.m, j));
        double b = (ptil * 2.0 / (2.0 * s.m + 1.0) + spol) *
                   std::pow(2.0, -j) * std::pow(v, s.m - j);
        worst = std::max(worst, K / factorial(j) * b);
    }
    // Reflection to p < m divides by (4 v^2)^{m-p}.
    worst *= std::max(1.0, std::pow(4.0 * v * v, -s.m));
    return {worst * 2.0, 2 * (s.m + 1)};
}

/// Tail of sum over lattice points with cosh-height > T: linear point count
/// (constant C) times the integrated per-term envelope.
double tailBound(const Envelope& e, double C, int m, double T) {
    double slack = std::pow(1.0 - 1.0 / (T * T), -e.slackPower / 2.0);
    return C * e.pref * slack * std::pow(T, -m) / m;
}

/// Doubled empirical counting constant: points with cosh-height <= T grow
/// like C*T.
double countConstant(const LiftSpec& spec, const UhpPoint& z) {
    double T0 = 12.0;
    size_t n = contributingForms(spec, z, T0).size();
    return 2.0 * std::max(1.0, static_cast<double>(n) / T0);
}

struct Prepared {
    std::vector<WeightedForm> forms;
    double Tmax;
    double C;
};

Prepared prepare(const LiftSpec& spec, const UhpPoint& z) {
    if (spec.m < 1) throw NonConvergent("lift requires m >= 1");
    double T = truncationBound(spec, z);
    Prepared p{contributingForms(spec, z, T), T, countConstant(spec, z)};
    guardPoles(spec, p.forms, z);
    return p;
}

EvalResult assemble(const Prepared& p, const LiftSpec& spec, Complex pref,
                    const Envelope& env,
                    const std::function<Complex(const WeightedForm&)>& fn) {
    EvalResult r;
    r.value = pref * mapReduce(p.forms, fn);
    r.termsUsed = static_cast<long long>(p.forms.size());
    r.tailBound = tailBound(env, p.C, spec.m, p.Tmax);
    return r;
}

} // namespace

LiftSpec::LiftSpec(int m_, long long N_, long long beta_, long long D_,
                   double tol_)
    : m(m_), N(N_), beta(beta_), D(D_), tol(tol_) {
    if (N < 1) throw ConfigError("LiftSpec: N must be positive");
    if (D >= 0) throw ConfigError("LiftSpec: D must be negative");
    if (tol <= 0) throw ConfigError("LiftSpec: tol must be positive");
    if (posMod(beta * beta - D, 4 * N) != 0)
        throw ConfigError("LiftSpec: D must be a square mod 4N matching beta");
    beta = posMod(beta, 2 * N);
    if (vanishes())
        std::cerr << "[merolift] note: odd order with coinciding +/- residue "
                     "families; the two signed sums cancel identically.\n";
}

bool LiftSpec::familiesCoincide() const {
    return posMod(2 * beta, 2 * N) == 0;
}

bool LiftSpec::vanishes() const { return familiesCoincide() && (m % 2 != 0); }

std::vector<WeightedForm> contributingForms(const LiftSpec& spec,
                                            const UhpPoint& z, double Tmax) {
    std::vector<WeightedForm> out;
    auto plus = enumerateByHeight(spec.N, spec.beta, spec.D, z, Tmax);
    if (spec.familiesCoincide()) {
        double w = (spec.m % 2 == 0) ? 2.0 : 0.0;
        for (const auto& q : plus) out.push_back({q, w});
        return out;
    }
    for (const auto& q : plus) out.push_back({q, 1.0});
    auto minus = enumerateByHeight(spec.N, posMod(-spec.beta, 2 * spec.N),
                                   spec.D, z, Tmax);
    double s = (spec.m % 2 == 0) ? 1.0 : -1.0;
    for (const auto& q : minus) out.push_back({q, s});
    return out;
}

double truncationBound(const LiftSpec& spec, const UhpPoint& z) {
    if (spec.m < 1) throw NonConvergent("truncationBound requires m >= 1");
    double C = countConstant(spec, z);
    Envelope envs[] = {fMeroEnvelope(spec, z.v), phiEnvelope(spec, z.v),
                       deltaPhiEnvelope(spec, z.v),
                       componentEnvelope(spec, z.v)};
    double T = 8.0;
    auto worstTail = [&](double t) {
        double worst = 0.0;
        for (const auto& e : envs) worst = std::max(worst, tailBound(e, C, spec.m, t));
        return worst;
    };
    while (worstTail(T) > spec.tol) {
        T *= 1.5;
        if (T > 2e7)
            throw NonConvergent("truncation radius exceeds the supported cap");
    }
    return T;
}

EvalResult fMero(const LiftSpec& spec, const UhpPoint& z) {
    Prepared p = prepare(spec, z);
    double pref = std::pow(static_cast<double>(-spec.D), (spec.m + 1) / 2.0) /
                  (2.0 * std::pow(static_cast<double>(spec.N), spec.m / 2.0));
    Complex zc = z.toComplex();
    int mp1 = spec.m + 1;
    return assemble(p, spec, pref, fMeroEnvelope(spec, z.v),
                    [&](const WeightedForm& wf) {
                        return wf.weight / std::pow(qEval(wf.q, zc), mp1);
                    });
}

EvalResult phiLift(const LiftSpec& spec, const UhpPoint& z) {
    Prepared p = prepare(spec, z);
    Complex pref = factorial(spec.m) /
                   std::pow(Complex(0.0, 8.0 * std::sqrt((double)spec.N) * M_PI),
                            spec.m);
    Complex zc = z.toComplex();
    double v2m = std::pow(z.v, 2 * spec.m);
    int m = spec.m;
    return assemble(p, spec, pref, phiEnvelope(spec, z.v),
                    [&](const WeightedForm& wf) {
                        UhpPoint w = cmPoint(wf.q);
                        double c = 1.0 + std::norm(zc - w.toComplex()) /
                                             (2.0 * z.v * w.v);
                        Complex qbar = std::conj(qEval(wf.q, zc));
                        return wf.weight * std::pow(qbar, m) / v2m *
                               bM(m, Complex(c, 0.0)).real();
                    });
}

EvalResult liftComponent(const LiftSpec& spec, int p, const UhpPoint& z) {
    int m = spec.m;
    if (p < 0 || p > 2 * m)
        throw ConfigError("liftComponent: p must lie in [0, 2m]");
    if (p < m) {
        EvalResult mirror = liftComponent(spec, 2 * m - p, z);
        mirror.value = std::conj(mirror.value) /
                       std::pow(4.0 * z.v * z.v, m - p);
        mirror.tailBound /= std::pow(4.0 * z.v * z.v, m - p);
        return mirror;
    }
    int j = 2 * m - p; // lowering-operator index, 0 <= j <= m
    Prepared prep = prepare(spec, z);
    Complex K = std::pow(std::abs(spec.r()), m / 2.0) * factorial(m) /
                std::pow(Complex(0.0, -M_PI), m);
    Complex pref = K / factorial(j);
    Poly ptil = legendreTildeP(m, j - m);
    Poly spol = sPoly(m, j);
    Complex ij = iPow(j);
    Complex zc = z.toComplex();
    double v = z.v;
    auto term = [&](const WeightedForm& wf) {
        UhpPoint w = cmPoint(wf.q);
        double t = w.v;
        Complex zw = zc - w.toComplex();
        Complex zwb = zc - w.conj();
        // Stable radial coordinate; x2 is shared between the kernel and the
        // correction term so their near-singular cancellations track each
        // other in floating point.
        double c = 1.0 + std::norm(zw) / (2.0 * v * t);
        // The middle component collapses to the radial Green kernel, whose
        // direct evaluation cancels catastrophically near the diagonal.
        if (j == m && c > 1.0 && c < 1.5)
            return wf.weight * ij * greenKernel(m, c) / std::pow(2.0, m);
        double x2 = c * c - 1.0;
        double B = bM(m, Complex(c, 0.0)).real();
        Complex t1 = ij * std::pow(zw, m - j) * std::pow(zwb, m - j) /
                     (std::pow(2.0 * t, m - j) * std::pow(2.0, j)) *
                     ptil(c) * B;
        Complex t2 = ij * std::pow(2.0, m) * std::pow(t, m + j) *
                     std::pow(v, 2 * m) * spol(c) /
                     (std::pow(4.0 * v * v * t * t * x2, j) *
                      std::pow(std::conj(zw * zwb), m - j));
        return wf.weight * (t1 - t2);
    };
    return assemble(prep, spec, pref, componentEnvelope(spec, z.v), term);
}

Complex componentSummand(const LiftSpec& spec, int p, const QForm& q,
                         const UhpPoint& z) {
    int m = spec.m;
    if (p < 0 || p > 2 * m)
        throw ConfigError("componentSummand: p must lie in [0, 2m]");
    if (p < m)
        return std::conj(componentSummand(spec, 2 * m - p, q, z)) /
               std::pow(4.0 * z.v * z.v, m - p);
    int j = 2 * m - p;
    Complex K = std::pow(std::abs(spec.r()), m / 2.0) * factorial(m) /
                std::pow(Complex(0.0, -M_PI), m);
    Poly ptil = legendreTildeP(m, j - m);
    Poly spol = sPoly(m, j);
    UhpPoint w = cmPoint(q);
    double t = w.v;
    Complex zc = z.toComplex();
    Complex zw = zc - w.toComplex();
    Complex zwb = zc - w.conj();
    double c = 1.0 + std::norm(zw) / (2.0 * z.v * t);
    Complex ij = iPow(j);
    if (j == m && c > 1.0 && c < 1.5)
        return K / factorial(j) * ij * greenKernel(m, c) / std::pow(2.0, m);
    double x2 = c * c - 1.0;
    double B = bM(m, Complex(c, 0.0)).real();
    Complex t1 = ij * std::pow(zw, m - j) * std::pow(zwb, m - j) /
                 (std::pow(2.0 * t, m - j) * std::pow(2.0, j)) * ptil(c) * B;
    Complex t2 = ij * std::pow(2.0, m) * std::pow(t, m + j) *
                 std::pow(z.v, 2 * m) * spol(c) /
                 (std::pow(4.0 * z.v * z.v * t * t * x2, j) *
                  std::pow(std::conj(zw * zwb), m - j));
    return K / factorial(j) * (t1 - t2);
}

EvalResult deltaPhi(const LiftSpec& spec, const UhpPoint& z) {
    Prepared p = prepare(spec, z);
    int m = spec.m;
    Complex pref = Complex(0.0, 2.0) * std::pow(std::abs(spec.r()), m / 2.0) *
                   factorial(m) /
                   (((m % 2) ? -1.0 : 1.0) * std::pow(4.0 * M_PI, m + 1.0));
    Complex zc = z.toComplex();
    return assemble(p, spec, pref, deltaPhiEnvelope(spec, z.v),
                    [&](const WeightedForm& wf) {
                        UhpPoint w = cmPoint(wf.q);
                        Complex num = std::pow(Complex(0.0, 2.0 * w.v), m + 1);
                        Complex den = std::pow(zc - w.toComplex(), m + 1) *
                                      std::pow(zc - w.conj(), m + 1);
                        return wf.weight * num / den;
                    });
}

Complex deltaPhiMeroConstant(const LiftSpec& spec) {
    int m = spec.m;
    return -std::pow(static_cast<double>(-spec.D), m / 2.0) * factorial(m) /
           (std::pow(Complex(0.0, 8.0), m) * std::pow(M_PI, m + 1.0));
}

double greenNormalization(const LiftSpec& spec) {
    int m = spec.m;
    double mu = (spec.familiesCoincide() && m % 2 == 0) ? 2.0 : 1.0;
    return -factorial(2 * m) * mu * std::pow(std::abs(spec.r()), m / 2.0) /
           (std::pow(4.0 * M_PI, m) * factorial(m));
}

double greenValue(const LiftSpec& spec, const UhpPoint& z) {
    EvalResult mid = liftComponent(spec, spec.m, z);
    return mid.value.real() / greenNormalization(spec);
}

EvalResult mathcalF(const LiftSpec& spec, const UhpPoint& z) {
    Prepared p = prepare(spec, z);
    int m = spec.m;
    double pref = 1.0 / (2.0 * std::pow(static_cast<double>(spec.N * -spec.D),
                                        m / 2.0));
    Complex zc = z.toComplex();
    Envelope env = phiEnvelope(spec, z.v); // same kernel decay class
    return assemble(p, spec, pref, env, [&](const WeightedForm& wf) {
        UhpPoint w = cmPoint(wf.q);
        double c =
            1.0 + std::norm(zc - w.toComplex()) / (2.0 * z.v * w.v);
        double thetaIntegral = 0.5 * bM(m, Complex(c, 0.0)).real();
        return wf.weight * std::pow(qEval(wf.q, zc), m) * thetaIntegral;
    });
}

Complex mathcalFComponentConstant(const LiftSpec& spec) {
    int m = spec.m;
    return 4.0 * factorial(m) * std::pow(static_cast<double>(-spec.D), m / 2.0) /
           std::pow(Complex(0.0, -2.0 * M_PI), m);
}

Complex vvPairingDensity(const std::vector<Complex>& fComps,
                         const std::vector<Complex>& gComps, double v) {
    if (fComps.size() != gComps.size() || fComps.size() % 2 == 0)
        throw ConfigError("vvPairingDensity: component vectors must share an "
                          "odd length 2m+1");
    int m = static_cast<int>((fComps.size() - 1) / 2);
    Complex acc{0.0, 0.0};
    for (int p = 0; p <= 2 * m; ++p) {
        double sign = ((m - p) % 2 == 0) ? 1.0 : -1.0;
        double w = sign * std::pow(4.0, m - p) * factorial(p) *
                   factorial(2 * m - p) / factorial(2 * m);
        acc += w * fComps[p] * std::conj(gComps[p]) *
               std::pow(v, 2 * (m - p));
    }
    return acc;
}

} // namespace merolift
