#include "merolift/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "merolift/lift.hpp"

namespace merolift {

namespace {

Complex ipow(Complex z, int n) {
    if (n < 0) return 1.0 / ipow(z, -n);
    Complex r = 1.0;
    while (n > 0) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int j = 1; j <= k; ++j) b *= static_cast<double>(n - k + j) / j;
    return b;
}

long long floorDiv(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

/// Classical reduction of a positive definite integral form (level 1):
/// |B| <= A <= C with B >= 0 when |B| = A or A = C.
QForm reduceFormSL2(QForm q) {
    for (int iter = 0; iter < 256; ++iter) {
        long long s = floorDiv(q.A - q.B, 2 * q.A);
        q.C += q.B * s + q.A * s * s;
        q.B += 2 * q.A * s;
        if (q.C < q.A) {
            q = QForm{q.C, -q.B, q.A};
            continue;
        }
        if (q.A == q.C && q.B < 0) q.B = -q.B;
        return q;
    }
    throw NonConvergent("reduceFormSL2: reduction did not terminate");
}

/// SL(2,Z)-equivalence of points, robust to fundamental-domain boundary
/// identifications: reduce both and compare under short boundary words.
bool pointsEquivalentSL2(const UhpPoint& a, const UhpPoint& b) {
    UhpPoint ra = reduceToFundamentalDomain(a).z0;
    UhpPoint rb = reduceToFundamentalDomain(b).z0;
    static const std::vector<Mat2R> words = [] {
        Mat2R I(1, 0, 0, 1), T(1, 1, 0, 1), Ti(1, -1, 0, 1), S(0, -1, 1, 0);
        return std::vector<Mat2R>{I,     T,      Ti,     S,    S * T,
                                  S * Ti, T * S, Ti * S, S * T * S};
    }();
    for (const Mat2R& g : words)
        if (coshDist(moebius(g, ra), rb) < 1.0 + 1e-9) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 15 for complex integrands.

const double kGkNodes[8] = {0.0,
                            0.207784955007898467600689403773245,
                            0.405845151377397166906606412076961,
                            0.586087235467691130294144838258730,
                            0.741531185599394439863864773280788,
                            0.864864423359769072789712788640926,
                            0.949107912342758524526189684047851,
                            0.991455371120812639206854697526329};
const double kGkWeights[8] = {0.209482141084727828012999174891714,
                              0.204432940075298892414161999234649,
                              0.190350578064785409913256402421014,
                              0.169004726639267902826583426598550,
                              0.140653259715525918745189590510238,
                              0.104790010322250183839876322541518,
                              0.063092092629978553290700663189204,
                              0.022935322010529224963732008058970};

template <typename F>
Complex gk15(const F& f, double a, double b) {
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    Complex s = kGkWeights[0] * f(c);
    for (int i = 1; i < 8; ++i) {
        double x = h * kGkNodes[i];
        s += kGkWeights[i] * (f(c - x) + f(c + x));
    }
    return s * h;
}

template <typename F>
Complex adaptRec(const F& f, double a, double b, Complex whole, double tol,
                 int depth, double& errAcc) {
    double mid = 0.5 * (a + b);
    Complex l = gk15(f, a, mid), r = gk15(f, mid, b);
    double e = std::abs(whole - (l + r));
    if (e < tol || depth <= 0) {
        errAcc += e;
        return l + r;
    }
    return adaptRec(f, a, mid, l, 0.5 * tol, depth - 1, errAcc) +
           adaptRec(f, mid, b, r, 0.5 * tol, depth - 1, errAcc);
}

template <typename F>
Complex adaptGK(const F& f, double a, double b, double tol, int depth,
                double& errAcc) {
    if (!(b > a)) return {0.0, 0.0};
    return adaptRec(f, a, b, gk15(f, a, b), tol, depth, errAcc);
}

// ---------------------------------------------------------------------------
// Frozen lattice sum: the meromorphic form of a spec evaluated from a fixed
// form list (valid wherever the list covers the local truncation radius).

class FrozenSum {
public:
    FrozenSum() = default;
    FrozenSum(const LiftSpec& spec, const std::vector<WeightedForm>& forms,
              Complex extra) {
        mp1_ = spec.m + 1;
        double pref =
            std::pow(static_cast<double>(-spec.D), (spec.m + 1) / 2.0) /
            (2.0 * std::pow(static_cast<double>(spec.N), spec.m / 2.0));
        scale_ = extra * pref;
        for (const auto& wf : forms) {
            A_.push_back(static_cast<double>(wf.q.A));
            B_.push_back(static_cast<double>(wf.q.B));
            C_.push_back(static_cast<double>(wf.q.C));
            w_.push_back(wf.weight);
        }
    }

    Complex operator()(const UhpPoint& z) const {
        Complex zc = z.toComplex(), z2 = zc * zc;
        Complex acc(0.0, 0.0);
        size_t n = A_.size();
        for (size_t i = 0; i < n; ++i) {
            Complex q = A_[i] * z2 + B_[i] * zc + C_[i];
            acc += w_[i] / ipow(q, mp1_);
        }
        return scale_ * acc;
    }

    size_t size() const { return A_.size(); }

private:
    std::vector<double> A_, B_, C_, w_;
    int mp1_ = 1;
    Complex scale_{1.0, 0.0};
};

double ctRule(int k, double eps) {
    if (k != 0) return std::pow(eps, k) / k;
    return std::log(eps);
}

} // namespace

// ---------------------------------------------------------------------------
// Residues.

Complex pairingConstant(int m) {
    return factorial(m) /
           (Complex(0.0, 2.0) * ipow(Complex(0.0, -8.0 * M_PI), m));
}

Complex residueFromLaurent(const LaurentSeries& a, const UhpPoint& w,
                           const UhpPoint& w0, int m, double r) {
    LaurentSeries c = cCoeffs(m, r, a, w, w0);
    Complex res(0.0, 0.0);
    int pMax = -1 - c.nMin;
    for (int p = 0; p <= pMax; ++p) {
        Complex cp = c.at(-1 - p);
        if (cp == Complex(0.0, 0.0)) continue;
        res += cp * alphaP0(m, p, w, w0);
    }
    return res;
}

Complex residueAtPole(const LiftSpec& gSpec, const UhpPoint& w,
                      const UhpPoint& w0, int m, double r) {
    if (gSpec.vanishes()) return {0.0, 0.0};
    std::vector<WeightedForm> centre;
    for (const auto& wf : contributingForms(gSpec, w, 1.0 + 1e-6))
        if (std::abs(awMap(w, cmPoint(wf.q))) < 1e-9) centre.push_back(wf);
    if (centre.empty())
        throw ConfigError("residueAtPole: no pole of g at the given point");
    LaurentSeries a = laurentOnSet(gSpec, centre, w, 0);
    return residueFromLaurent(a, w, w0, m, r);
}

Complex residueContour(const std::function<Complex(const UhpPoint&)>& g,
                       const UhpPoint& w, const UhpPoint& w0, int m, double r,
                       double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("residueContour: need 0 < rho < 1");
    auto psi = psiPoly(w, w0);
    double ch = coshDist(w, w0);
    Complex wb = w.conj();
    double t0t2 = 2.0 * w0.v * w.v;
    Complex slope = (wb - w0.toComplex()) * (wb - w0.conj()) / t0t2;
    Complex chartScale =
        std::pow(std::abs(r), m / 2.0) / ipow(Complex(0.0, t0t2), m);
    Complex twoIt(0.0, 2.0 * w.v);
    const int K = std::max(512, 64 * (m + 2));

    auto ring = [&](double radius, double& avgAbs) {
        Complex sum(0.0, 0.0);
        avgAbs = 0.0;
        for (int k = 0; k < K; ++k) {
            Complex zeta = std::polar(radius, 2.0 * M_PI * k / K);
            Complex arg = Complex(ch, 0.0) - slope * zeta;
            if (arg.real() <= 1.0)
                throw DomainViolation(
                    "residueContour: B_m argument left Re > 1");
            Complex chart = g(awInverse(w, zeta)) * ipow(twoIt, m + 1) /
                            ipow(1.0 - zeta, 2 * m + 2);
            Complex psiVal = psi[0] + zeta * (psi[1] + zeta * psi[2]);
            Complex term =
                chartScale * chart * ipow(psiVal, m) * bM(m, arg) * zeta;
            sum += term;
            avgAbs += std::abs(term);
        }
        avgAbs /= K;
        return sum / static_cast<double>(K);
    };

    double avg1 = 0.0, avg2 = 0.0;
    Complex r1 = ring(rho, avg1);
    Complex r2 = ring(0.5 * rho, avg2);
    double scale = std::max({std::abs(r1), std::abs(r2), 0.01 * avg1});
    if (std::abs(r1 - r2) > 1e-8 * scale + 1e-300)
        throw AliasingDetected(
            "residueContour: two-radius consistency check failed");
    return r1;
}

Complex residueContour(const LiftSpec& gSpec, const UhpPoint& w,
                       const UhpPoint& w0, int m, double r) {
    double delta = std::abs(awMap(w, w0));
    double gap = 1.0;
    for (const auto& wf : contributingForms(gSpec, w, 30.0)) {
        double d = std::abs(awMap(w, cmPoint(wf.q)));
        if (d > 1e-9) gap = std::min(gap, d);
    }
    double rho = 0.6 * std::min(delta, gap);
    // Freeze the lattice once: the contour only needs g on a compact
    // annulus, and per-node full evaluation would redo the truncation work
    // at every sample.  Chart radius < 0.6 is hyperbolic radius < 1.39.
    double Tloc = truncationBound(gSpec, w);
    const double d = 1.4;
    double Tmax = Tloc * std::cosh(d) +
                  std::sqrt(std::max(0.0, Tloc * Tloc - 1.0)) * std::sinh(d);
    FrozenSum frozen(gSpec, contributingForms(gSpec, w, Tmax),
                     Complex(1.0, 0.0));
    auto eval = [&frozen](const UhpPoint& z) { return frozen(z); };
    return residueContour(eval, w, w0, m, r, rho);
}

// ---------------------------------------------------------------------------
// Residue-formula assembly.

namespace {

/// Derivative cache for the alpha_{p,0} factors (identical to alphaP0, but
/// without re-deriving the exact rational chain per pole).
struct AlphaCache {
    int m;
    std::vector<BmDerivative> deriv;
    explicit AlphaCache(int mOrder) : m(mOrder) {
        for (int p = 1; p <= m; ++p) deriv.emplace_back(m, p);
    }
    Complex residue(const LaurentSeries& c, const UhpPoint& w,
                    const UhpPoint& w0) const {
        double ch = coshDist(w, w0);
        Complex wb = w.conj();
        double t0t2 = 2.0 * w0.v * w.v;
        Complex sl = (wb - w0.toComplex()) * (wb - w0.conj()) / t0t2;
        Complex res = c.at(-1) * bM(m, Complex(ch, 0.0));
        Complex slPow(1.0, 0.0);
        double fact = 1.0;
        for (int p = 1; p <= m; ++p) {
            slPow *= -sl;
            fact *= p;
            Complex cp = c.at(-1 - p);
            if (cp != Complex(0.0, 0.0))
                res += cp * deriv[static_cast<size_t>(p - 1)](Complex(ch, 0.0)) *
                       slPow / fact;
        }
        return res;
    }
};

bool isPerfectSquare(long long n) {
    if (n < 0) return false;
    long long s = static_cast<long long>(std::llround(std::sqrt(
        static_cast<double>(n))));
    for (long long c = std::max(0LL, s - 2); c <= s + 2; ++c)
        if (c * c == n) return true;
    return false;
}

void validateReps(const std::vector<QForm>& reps, const LiftSpec& spec,
                  long long betaFamily) {
    for (const QForm& q : reps) {
        if (discriminant(q) != spec.D)
            throw ConfigError("regularizedPairing: override rep discriminant");
        if (q.A <= 0 || q.A % spec.N != 0)
            throw ConfigError("regularizedPairing: override rep level");
        long long twoN = 2 * spec.N;
        if (((q.B - betaFamily) % twoN + twoN) % twoN != 0)
            throw ConfigError("regularizedPairing: override rep residue");
    }
}

} // namespace

PairingResult regularizedPairing(const LiftSpec& gSpec,
                                 const LiftSpec& liftSpec,
                                 const PairingOptions& opts) {
    if (gSpec.m != liftSpec.m || gSpec.N != liftSpec.N)
        throw ConfigError("regularizedPairing: specs disagree on m or N");
    PairingResult out;
    out.method = PairingMethod::residueFormula;
    if (gSpec.vanishes() || liftSpec.vanishes()) return out;

    const int m = liftSpec.m;
    const double r = liftSpec.r();
    const bool coincide = liftSpec.familiesCoincide();

    // The pole sets of g and of the lift can only intersect when the CM
    // fields agree, i.e. when Dg * Dlift is a perfect square.
    const bool sameField = isPerfectSquare(gSpec.D * liftSpec.D);
    if (sameField && liftSpec.N != 1)
        throw ConfigError(
            "regularizedPairing: coincident-orbit detection needs level 1");

    struct Job {
        QForm rep;
        int sign;
        double mult;
    };
    std::vector<Job> jobs;
    {
        std::vector<QForm> plus = opts.plusReps;
        if (plus.empty())
            plus = classRepresentatives(liftSpec.N, liftSpec.beta, liftSpec.D)
                       .reps;
        else
            validateReps(plus, liftSpec, liftSpec.beta);
        double mult = coincide ? 2.0 : 1.0; // (+1) + (-1)^m with m even
        for (const QForm& q : plus) jobs.push_back({q, 1, mult});
        if (!coincide) {
            std::vector<QForm> minus = opts.minusReps;
            if (minus.empty())
                minus = classRepresentatives(liftSpec.N, -liftSpec.beta,
                                             liftSpec.D)
                            .reps;
            else
                validateReps(minus, liftSpec, -liftSpec.beta);
            int sign = (m % 2 == 0) ? 1 : -1;
            for (const QForm& q : minus) jobs.push_back({q, sign, 1.0});
        }
    }

    AlphaCache alpha(m);

    for (const Job& job : jobs) {
        UhpPoint w0 = cmPoint(job.rep);
        int stab = automorphOrder(job.rep, liftSpec.N);
        QForm w0Reduced{};
        if (sameField) w0Reduced = reduceFormSL2(job.rep);

        auto innerAt = [&](double T, double& scaleAbs) {
            Complex s(0.0, 0.0);
            scaleAbs = 0.0;
            for (const auto& wf : contributingForms(gSpec, w0, T)) {
                UhpPoint w = cmPoint(wf.q);
                if (sameField) {
                    bool coincident =
                        (gSpec.D == liftSpec.D)
                            ? (reduceFormSL2(wf.q) == w0Reduced)
                            : pointsEquivalentSL2(w, w0);
                    if (coincident) continue;
                }
                LaurentSeries a =
                    laurentOnSet(gSpec, {wf}, w, 0);
                LaurentSeries c = cCoeffs(m, r, a, w, w0);
                Complex res = alpha.residue(c, w, w0);
                s += res;
                scaleAbs += std::abs(res);
            }
            return s;
        };

        double T = opts.initialRadius;
        double sc1 = 0.0, sc2 = 0.0;
        Complex s1 = innerAt(T, sc1);
        Complex inner = s1;
        bool converged = false;
        while (T <= opts.radiusCap) {
            T *= 2.0;
            Complex s2 = innerAt(T, sc2);
            double target =
                opts.relTol * std::max(std::abs(s2), 0.01 * sc2) + 1e-300;
            inner = s2;
            if (std::abs(s2 - s1) <= target) {
                converged = true;
                break;
            }
            s1 = s2;
        }
        if (!converged)
            throw NonConvergent(
                "regularizedPairing: pole-orbit sum did not reach its "
                "tolerance within the radius cap");

        out.perPoleBreakdown.push_back(
            {job.rep, w0, inner * job.mult, job.sign, stab});
    }

    Complex S(0.0, 0.0);
    for (const auto& e : out.perPoleBreakdown)
        S += static_cast<double>(e.sign) * e.residue /
             static_cast<double>(e.stabOrder);
    // Reported in the first-slot (lift-derivative against conj g) convention,
    // the conjugate of the residue-side assembly.
    out.value = std::conj(pairingConstant(m) * S);
    return out;
}

std::string PairingResult::toJson() const {
    nlohmann::json j;
    j["value"] = {{"re", value.real()}, {"im", value.imag()}};
    j["method"] =
        method == PairingMethod::residueFormula ? "residueFormula" : "oracle";
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : perPoleBreakdown) {
        arr.push_back({{"orbitRep", {{"A", e.orbitRep.A},
                                     {"B", e.orbitRep.B},
                                     {"C", e.orbitRep.C}}},
                       {"pole", {{"u", e.pole.u}, {"v", e.pole.v}}},
                       {"residue",
                        {{"re", e.residue.real()}, {"im", e.residue.imag()}}},
                       {"sign", e.sign},
                       {"stabOrder", e.stabOrder}});
    }
    j["breakdown"] = arr;
    j["epsilon"] = epsilon;
    j["errorBudget"] = errorBudget;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Disc constant terms.

Complex discConstantTerm(const LaurentSeries& aF, const LaurentSeries& aG,
                         int m, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw ConfigError("discConstantTerm: need 0 < eps < 1");
    int nLo = std::max(aF.nMin, aG.nMin);
    int nHi = std::min(aF.nMax(), aG.nMax());
    Complex total(0.0, 0.0);
    for (int j = 0; j <= 2 * m; ++j) {
        double bj = binomial(2 * m, j) * ((j % 2 == 0) ? 1.0 : -1.0);
        for (int n = nLo; n <= nHi; ++n) {
            Complex prod = aF.at(n) * std::conj(aG.at(n));
            if (prod == Complex(0.0, 0.0)) continue;
            total += bj * prod * ctRule(2 * n + 2 * j + 2, eps);
        }
    }
    return total * (2.0 * M_PI / std::pow(4.0, m));
}

double liftPoleConstantTerm(int m, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw ConfigError("liftPoleConstantTerm: need 0 < eps < 1");
    double T = (1.0 + eps * eps) / (1.0 - eps * eps);
    double total = bM(m, Complex(T, 0.0)).real();
    double c = std::pow(2.0, 1 - 2 * m);
    for (int l = 0; l <= 2 * m; ++l) {
        double cl = c * binomial(2 * m, l) * ((l % 2 == 0) ? 1.0 : -1.0);
        if (l == m)
            total += cl * std::log(eps);
        else
            total += cl * std::pow(eps, 2 * l - 2 * m) / (2.0 * l - 2.0 * m);
    }
    return total;
}

double liftPoleConstantTermScale(int m, double eps) {
    double T = (1.0 + eps * eps) / (1.0 - eps * eps);
    double scale = std::abs(bM(m, Complex(T, 0.0)).real());
    double c = std::pow(2.0, 1 - 2 * m);
    for (int l = 0; l <= 2 * m; ++l) {
        double cl = c * binomial(2 * m, l);
        if (l == m)
            scale += std::abs(cl * std::log(eps));
        else
            scale += std::abs(cl * std::pow(eps, 2 * l - 2 * m) /
                              (2.0 * l - 2.0 * m));
    }
    return scale;
}

// ---------------------------------------------------------------------------
// Regularization oracle.

struct RegularizationOracle::Impl {
    LiftSpec g;
    LiftSpec lift;
    OracleParams p;
    int m;

    struct Orbit {
        QForm rep;
        UhpPoint w;
        int ell = 1;
        LaurentSeries aF, aG;
        bool laurentDone = false;
        // Euclidean excision disc of the chart circle |zeta| = rOut.
        double uc = 0.0, vc = 0.0, Rc = 0.0;
        // Cumulative chart-annulus integrals int_{r}^{rOut}, keyed by r.
        std::map<double, Complex> annulusFrom;
    };
    std::vector<Orbit> orbits;

    struct Disc {
        UhpPoint w;
        double uc, vc, Rc;
    };
    std::vector<Disc> discs; // all excision discs meeting the domain

    bool evalDone = false;
    FrozenSum fSum, gSum;

    bool extDone = false;
    Complex extVal{0.0, 0.0};
    double quadErr = 0.0;

    Impl(const LiftSpec& gSpec, const LiftSpec& liftSpec,
         const OracleParams& params)
        : g(gSpec), lift(liftSpec), p(params), m(liftSpec.m) {
        if (g.m != lift.m || g.N != lift.N)
            throw ConfigError("regularizationOracle: specs disagree on m or N");
        if (g.N != 1)
            throw ConfigError("regularizationOracle: level 1 only");
        if (!(p.rOut > 0.0 && p.rOut < 0.5))
            throw ConfigError("regularizationOracle: need 0 < rOut < 0.5");
        if (g.vanishes() || lift.vanishes()) return;
        collectOrbits(lift);
        collectOrbits(g);
        collectDiscs(lift);
        collectDiscs(g);
        validateDisjoint(p.rOut);
    }

    static void euclidDisc(const UhpPoint& w, double r, double& uc, double& vc,
                           double& Rc) {
        uc = w.u;
        vc = w.v * (1.0 + r * r) / (1.0 - r * r);
        Rc = 2.0 * w.v * r / (1.0 - r * r);
    }

    void collectOrbits(const LiftSpec& spec) {
        std::vector<long long> betas{spec.beta};
        if (!spec.familiesCoincide()) betas.push_back(-spec.beta);
        for (long long b : betas) {
            ClassData cd = classRepresentatives(spec.N, b, spec.D);
            for (const QForm& rep : cd.reps) {
                ReduceResult red = reduceToFundamentalDomain(cmPoint(rep));
                QForm qFD = gamma0Act(red.gamma, rep, spec.N);
                UhpPoint w = cmPoint(qFD);
                bool dup = false;
                for (const Orbit& o : orbits)
                    if (coshDist(o.w, w) < 1.0 + 1e-12) dup = true;
                if (dup) continue;
                Orbit o;
                o.rep = qFD;
                o.w = w;
                o.ell = automorphOrder(qFD, spec.N);
                euclidDisc(w, p.rOut, o.uc, o.vc, o.Rc);
                o.annulusFrom[p.rOut] = Complex(0.0, 0.0);
                orbits.push_back(std::move(o));
            }
        }
    }

    double vLow(double u) const {
        double s = 1.0 - u * u;
        return s > 0.0 ? std::sqrt(s) : 0.0;
    }

    bool discMeetsDomain(double uc, double vc, double Rc) const {
        if (uc + Rc < -0.5 || uc - Rc > 0.5) return false;
        double ua = std::max(-0.5, uc - Rc), ub = std::min(0.5, uc + Rc);
        for (int i = 0; i <= 200; ++i) {
            double u = ua + (ub - ua) * i / 200.0;
            double h2 = Rc * Rc - (u - uc) * (u - uc);
            if (h2 <= 0.0) continue;
            double h = std::sqrt(h2);
            if (vc + h > vLow(u) + 1e-14 && vc - h < p.Y) return true;
        }
        return false;
    }

    void collectDiscs(const LiftSpec& spec) {
        std::vector<long long> betas{spec.beta};
        if (!spec.familiesCoincide()) betas.push_back(-spec.beta);
        std::set<QForm> seen;
        for (long long b : betas) {
            for (const QForm& q : enumerateByHeight(spec.N, b, spec.D,
                                                    UhpPoint(0.0, 1.2), 12.0)) {
                if (!seen.insert(q).second) continue;
                UhpPoint w = cmPoint(q);
                bool dup = false;
                for (const Disc& d : discs)
                    if (coshDist(d.w, w) < 1.0 + 1e-12) dup = true;
                if (dup) continue;
                double uc, vc, Rc;
                euclidDisc(w, p.rOut, uc, vc, Rc);
                if (discMeetsDomain(uc, vc, Rc))
                    discs.push_back({w, uc, vc, Rc});
            }
        }
    }

    void validateDisjoint(double r) const {
        double rHyp = 2.0 * std::atanh(r);
        double chLimit = std::cosh(2.0 * rHyp);
        for (size_t i = 0; i < discs.size(); ++i)
            for (size_t j = i + 1; j < discs.size(); ++j)
                if (coshDist(discs[i].w, discs[j].w) < chLimit * (1.0 + 1e-9))
                    throw EpsilonInconsistent(
                        "regularizationOracle: guard discs overlap at radius " +
                        std::to_string(r));
    }

    void ensureEvaluators() {
        if (evalDone) return;
        // Coverage centres ladder up the cusp so the frozen lists stay honest
        // over the whole truncated domain; local truncation radii shrink with
        // height, so the upper centres add few forms.
        std::vector<UhpPoint> centres;
        for (double v = 1.15; v < 1.3 * p.Y * 2.5; v *= 2.5)
            centres.emplace_back(0.0, v);
        const double dCover = 1.1; // bridges adjacent centres and the annuli
        auto freeze = [&](const LiftSpec& spec, Complex extra) {
            std::set<QForm> seen;
            std::vector<WeightedForm> forms;
            for (const UhpPoint& zc : centres) {
                // The density target loosens like v^{2m} up the cusp (both
                // factors decay), so the per-centre truncation tolerance may
                // grow with height; measured noise floor stays ~1e-19.
                double tol = p.evalTol *
                             std::pow(zc.v / centres.front().v, m + 1);
                LiftSpec tight(spec.m, spec.N, spec.beta, spec.D, tol);
                double Tloc = truncationBound(tight, zc);
                double Tmax =
                    Tloc * std::cosh(dCover) +
                    std::sqrt(std::max(0.0, Tloc * Tloc - 1.0)) *
                        std::sinh(dCover);
                for (const auto& wf : contributingForms(spec, zc, Tmax))
                    if (seen.insert(wf.q).second) forms.push_back(wf);
            }
            return FrozenSum(spec, forms, extra);
        };
        fSum = freeze(lift, deltaPhiMeroConstant(lift));
        gSum = freeze(g, Complex(1.0, 0.0));
        evalDone = true;
    }

    Complex density(const UhpPoint& z) {
        if (p.integrandOverride) return p.integrandOverride(z);
        return fSum(z) * std::conj(gSum(z)) * std::pow(z.v, 2 * m);
    }

    // ---- exterior ----

    Complex exterior() {
        if (extDone) return extVal;
        if (g.vanishes() || lift.vanishes()) {
            extDone = true;
            return extVal;
        }
        if (!p.integrandOverride) ensureEvaluators();

        // u-breakpoints: disc extents and arc/disc crossings.
        std::vector<double> us{-0.5, 0.5};
        for (const Disc& d : discs) {
            for (double u : {d.uc - d.Rc, d.uc + d.Rc, d.uc})
                if (u > -0.5 && u < 0.5) us.push_back(u);
            // crossings of (u-uc)^2 + (vLow(u)-vc)^2 = Rc^2
            auto fcn = [&](double u) {
                double dv = vLow(u) - d.vc;
                return (u - d.uc) * (u - d.uc) + dv * dv - d.Rc * d.Rc;
            };
            double ua = std::max(-1.0, d.uc - d.Rc),
                   ub = std::min(1.0, d.uc + d.Rc);
            int nScan = 400;
            double prev = fcn(ua);
            for (int i = 1; i <= nScan; ++i) {
                double u = ua + (ub - ua) * i / nScan;
                double cur = fcn(u);
                if ((prev < 0.0) != (cur < 0.0)) {
                    double lo = ua + (ub - ua) * (i - 1) / nScan, hi = u;
                    for (int it = 0; it < 60; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if ((fcn(lo) < 0.0) != (fcn(mid) < 0.0))
                            hi = mid;
                        else
                            lo = mid;
                    }
                    double root = 0.5 * (lo + hi);
                    if (root > -0.5 && root < 0.5) us.push_back(root);
                }
                prev = cur;
            }
        }
        std::sort(us.begin(), us.end());
        us.erase(std::unique(us.begin(), us.end(),
                             [](double a, double b) {
                                 return std::abs(a - b) < 1e-12;
                             }),
                 us.end());

        const double innerTol = p.quadTol * 0.005;
        auto uFun = [&](double u) {
            double va = vLow(u);
            // assemble kept v-intervals
            std::vector<std::pair<double, double>> cuts;
            for (const Disc& d : discs) {
                double h2 = d.Rc * d.Rc - (u - d.uc) * (u - d.uc);
                if (h2 <= 0.0) continue;
                double h = std::sqrt(h2);
                cuts.emplace_back(d.vc - h, d.vc + h);
            }
            std::sort(cuts.begin(), cuts.end());
            std::vector<std::pair<double, double>> keep;
            double cur = va;
            for (auto& c : cuts) {
                if (c.second <= cur) continue;
                if (c.first > cur) keep.emplace_back(cur, std::min(c.first, p.Y));
                cur = std::max(cur, c.second);
                if (cur >= p.Y) break;
            }
            if (cur < p.Y) keep.emplace_back(cur, p.Y);

            static const double knots[] = {1.2, 1.5, 2.0, 3.0, 4.0,
                                           6.0, 8.0, 12.0};
            Complex s(0.0, 0.0);
            auto vFun = [&](double v) { return density(UhpPoint(u, v)); };
            for (auto& iv : keep) {
                double a = iv.first;
                for (double k : knots) {
                    if (k > a && k < iv.second) {
                        s += adaptGK(vFun, a, k, innerTol, 9, quadErr);
                        a = k;
                    }
                }
                s += adaptGK(vFun, a, iv.second, innerTol, 9, quadErr);
            }
            return s;
        };

        for (size_t i = 0; i + 1 < us.size(); ++i) {
            double wPanel = us[i + 1] - us[i];
            if (wPanel <= 1e-12) continue;
            extVal += adaptGK(uFun, us[i], us[i + 1],
                              p.quadTol * std::max(wPanel, 0.05), 10, quadErr);
        }
        extDone = true;
        return extVal;
    }

    // ---- per-orbit disc terms ----

    void ensureLaurent(Orbit& o) {
        if (o.laurentDone) return;
        // Laurent data only needs to match the oracle's own evaluation
        // budget, not the (possibly much tighter) spec tolerance.
        double tol = std::max(lift.tol, 0.05 * p.evalTol);
        LiftSpec liftLoose(lift.m, lift.N, lift.beta, lift.D, tol);
        LiftSpec gLoose(g.m, g.N, g.beta, g.D, std::max(g.tol, 0.05 * p.evalTol));
        o.aF = laurentOfF(liftLoose, o.w, p.laurentNMax);
        Complex cDelta = deltaPhiMeroConstant(lift);
        for (Complex& c : o.aF.coeffs) c *= cDelta;
        o.aG = laurentOfF(gLoose, o.w, p.laurentNMax);
        double rad = std::min(o.aF.convergenceRadius, o.aG.convergenceRadius);
        if (rad <= p.rOut * 1.02)
            throw ConfigError(
                "regularizationOracle: excision radius reaches the next "
                "singularity in the chart");
        o.laurentDone = true;
    }

    /// Numeric chart integral over rIn <= |zeta| <= rOutAnn around orbit k.
    Complex annulusRing(const Orbit& o, double rIn, double rOutAnn) {
        if (!p.integrandOverride) ensureEvaluators();
        const int nAng = p.angularNodes;
        auto radial = [&](double x) {
            double rho = std::exp(x);
            Complex s(0.0, 0.0);
            for (int k = 0; k < nAng; ++k) {
                Complex zeta = std::polar(rho, 2.0 * M_PI * k / nAng);
                AwPullbacks pb = awPullbacks(o.w, zeta);
                UhpPoint z = awInverse(o.w, zeta);
                s += density(z) * std::norm(pb.dzFactor);
            }
            // d(area) = rho d rho d phi = rho^2 dx d phi
            return s * (2.0 * M_PI / nAng) * rho * rho;
        };
        // Depth is capped: the integrand is analytic in log-radius, and the
        // frozen-sum truncation noise would otherwise defeat the refinement
        // criterion without improving the result.
        return adaptGK(radial, std::log(rIn), std::log(rOutAnn),
                       p.quadTol * 0.05, 5, quadErr);
    }

    Complex annulusCached(Orbit& o, double rIn) {
        auto it = o.annulusFrom.find(rIn);
        if (it != o.annulusFrom.end()) return it->second;
        auto up = o.annulusFrom.lower_bound(rIn); // smallest key >= rIn
        if (up == o.annulusFrom.end())
            throw ConfigError("regularizationOracle: annulus above rOut");
        Complex val = annulusRing(o, rIn, up->first) + up->second;
        o.annulusFrom[rIn] = val;
        return val;
    }

    double budget() const {
        return 20.0 * (quadErr + p.quadTol) + 100.0 * p.evalTol;
    }

    Complex value(double eps) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("regularizationOracle: need 0 < eps < 1");
        if (g.vanishes() || lift.vanishes()) return {0.0, 0.0};
        validateDisjoint(std::max(eps, p.rOut));
        if (eps > p.rOut * (1.0 + 1e-12))
            throw EpsilonInconsistent(
                "regularizationOracle: epsilon exceeds the excision radius");
        Complex total = exterior();
        Complex discPart(0.0, 0.0), discPartHalf(0.0, 0.0);
        for (Orbit& o : orbits) {
            ensureLaurent(o);
            Complex one = annulusCached(o, eps) + discConstantTerm(o.aF, o.aG,
                                                                   m, eps);
            discPart += one / static_cast<double>(o.ell);
            if (p.crossCheck) {
                Complex half = annulusCached(o, 0.5 * eps) +
                               discConstantTerm(o.aF, o.aG, m, 0.5 * eps);
                discPartHalf += half / static_cast<double>(o.ell);
            }
        }
        if (p.crossCheck &&
            std::abs(discPartHalf - discPart) > budget() + 1e-300)
            throw EpsilonInconsistent(
                "regularizationOracle: eps and eps/2 disagree beyond the "
                "error budget");
        return total + discPart;
    }
};

RegularizationOracle::RegularizationOracle(const LiftSpec& gSpec,
                                           const LiftSpec& liftSpec,
                                           const OracleParams& params)
    : impl_(std::make_unique<Impl>(gSpec, liftSpec, params)) {}

RegularizationOracle::~RegularizationOracle() = default;

Complex RegularizationOracle::value(double eps) { return impl_->value(eps); }

Complex RegularizationOracle::exterior() { return impl_->exterior(); }

int RegularizationOracle::orbitCount() const {
    return static_cast<int>(impl_->orbits.size());
}

const UhpPoint& RegularizationOracle::orbitPoint(int k) const {
    return impl_->orbits.at(static_cast<size_t>(k)).w;
}

int RegularizationOracle::orbitOrder(int k) const {
    return impl_->orbits.at(static_cast<size_t>(k)).ell;
}

Complex RegularizationOracle::annulus(int k, double rIn, double rOutAnn) {
    return impl_->annulusRing(impl_->orbits.at(static_cast<size_t>(k)), rIn,
                              rOutAnn);
}

Complex RegularizationOracle::discCT(int k, double eps) const {
    auto& o = impl_->orbits.at(static_cast<size_t>(k));
    const_cast<Impl*>(impl_.get())->ensureLaurent(o);
    return discConstantTerm(o.aF, o.aG, impl_->m, eps);
}

double RegularizationOracle::errorBudget() const { return impl_->budget(); }

Complex regularizationOracle(const LiftSpec& gSpec, const LiftSpec& liftSpec,
                             double eps, const OracleParams& params) {
    RegularizationOracle oracle(gSpec, liftSpec, params);
    return oracle.value(eps);
}

} // namespace merolift
