#include "merolift/expansion.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace merolift {

namespace {

constexpr double kCentreGuard = 1e-9;

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

/// Coefficients k = 0..len-1 of 1/(alpha - beta*zeta)^{m+1}:
/// C(m+k, k) beta^k / alpha^{m+1+k}.
std::vector<Complex> binomSeries(Complex alpha, Complex beta, int mOrder,
                                 int len) {
    std::vector<Complex> s(static_cast<size_t>(len));
    Complex cur = 1.0 / ipow(alpha, mOrder + 1);
    Complex ratio = beta / alpha;
    for (int k = 0; k < len; ++k) {
        s[static_cast<size_t>(k)] = cur;
        cur *= ratio * (static_cast<double>(mOrder + k + 1) / (k + 1.0));
    }
    return s;
}

std::vector<Complex> convolve(const std::vector<Complex>& a,
                              const std::vector<Complex>& b) {
    std::vector<Complex> out(a.size() + b.size() - 1, Complex(0.0, 0.0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

void requireDistinct(const UhpPoint& w, const UhpPoint& w0, const char* who) {
    double scale = std::max({std::abs(w.u), w.v, std::abs(w0.u), w0.v, 1.0});
    if (std::abs(Complex(w.u - w0.u, w.v - w0.v)) < 1e-12 * scale)
        throw SingularPoint(std::string(who) + ": w and w0 coincide");
}

} // namespace

Complex LaurentSeries::at(int n) const {
    if (n < nMin || n > nMax()) return {0.0, 0.0};
    return coeffs[static_cast<size_t>(n - nMin)];
}

std::string LaurentSeries::toJson() const {
    nlohmann::json j;
    j["nMin"] = nMin;
    j["convergenceRadius"] = convergenceRadius;
    nlohmann::json arr = nlohmann::json::array();
    for (const Complex& c : coeffs) {
        arr.push_back(c.real());
        arr.push_back(c.imag());
    }
    j["coeffs"] = arr;
    return j.dump();
}

LaurentSeries LaurentSeries::fromJson(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    LaurentSeries s;
    s.nMin = j.at("nMin").get<int>();
    s.convergenceRadius = j.at("convergenceRadius").get<double>();
    const auto& arr = j.at("coeffs");
    if (arr.size() % 2 != 0)
        throw ConfigError("LaurentSeries: odd re/im array length");
    for (size_t i = 0; i + 1 < arr.size(); i += 2)
        s.coeffs.emplace_back(arr[i].get<double>(), arr[i + 1].get<double>());
    return s;
}

LaurentSeries laurentOfF(const LiftSpec& spec, const UhpPoint& w, int nMax) {
    if (nMax < 0) throw ConfigError("laurentOfF: nMax must be >= 0");
    if (spec.vanishes())
        return LaurentSeries{0, std::vector<Complex>(
                                    static_cast<size_t>(nMax + 1)), 1.0};

    // Chart radius to the nearest singularity other than the centre.  The
    // chart distance is monotone in the hyperbolic distance, so the minimum
    // over any ball containing at least one non-centre form is the global
    // minimum.
    double radius = 1.0;
    bool centrePresent = false;
    {
        double T0 = 12.0;
        bool found = false;
        while (!found) {
            centrePresent = false;
            radius = 1.0;
            for (const auto& wf : contributingForms(spec, w, T0)) {
                double d = std::abs(awMap(w, cmPoint(wf.q)));
                if (d < kCentreGuard) {
                    centrePresent = true;
                } else {
                    radius = std::min(radius, d);
                    found = true;
                }
            }
            if (!found) {
                T0 *= 2.0;
                if (T0 > 1e6)
                    throw NonConvergent("laurentOfF: no contributing forms");
            }
        }
    }

    // Coefficient tail, measured as |delta a_n| (radius/2)^n over n >= 0:
    // a tail form Q contributes at most
    //   C(2m+1+nMax, nMax) (2t)^{m+1} * pref / |Q(w,1)|^{m+1}
    // (Vandermonde bound on the convolved binomial series; the two chart
    // zeros of psi_Q satisfy |zeta_1| >= radius and |zeta_2| > 1).  So the
    // evaluator truncation machinery at w with a tolerance shrunk by that
    // factor bounds the coefficient tail by spec.tol.
    double t = w.v;
    double binom = 1.0;
    for (int k = 1; k <= nMax; ++k) binom *= (2.0 * spec.m + 1.0 + k) / k;
    LiftSpec tight(spec.m, spec.N, spec.beta, spec.D,
                   spec.tol / (binom * std::pow(2.0 * t, spec.m + 1.0)));
    double Tmax = truncationBound(tight, w);

    LaurentSeries out =
        laurentOnSet(spec, contributingForms(spec, w, Tmax), w, nMax);
    out.convergenceRadius = std::min(out.convergenceRadius, radius);
    if (centrePresent && out.nMin != -(spec.m + 1))
        throw NonConvergent("laurentOfF: centre form lost in enumeration");
    return out;
}

LaurentSeries laurentOnSet(const LiftSpec& spec,
                           const std::vector<WeightedForm>& forms,
                           const UhpPoint& w, int nMax) {
    double t = w.v;
    double radius = 1.0;
    bool centrePresent = false;
    Complex wc = w.toComplex();
    Complex twoIt(0.0, 2.0 * t);
    double pref = std::pow(static_cast<double>(-spec.D), (spec.m + 1) / 2.0) /
                  (2.0 * std::pow(static_cast<double>(spec.N), spec.m / 2.0));
    Complex nrm = pref * ipow(twoIt, spec.m + 1);

    int mp1 = spec.m + 1;
    std::vector<Complex> acc(static_cast<size_t>(nMax + mp1 + 1),
                             Complex(0.0, 0.0));
    for (const auto& wf : forms) {
        UhpPoint wq = cmPoint(wf.q);
        Complex wqc = wq.toComplex();
        Complex base = wf.weight * nrm /
                       ipow(Complex(static_cast<double>(wf.q.A)), mp1);
        Complex a2 = wc - std::conj(wqc);
        Complex b2 = std::conj(wc) - std::conj(wqc);
        double d = std::abs(awMap(w, wq));
        if (d < kCentreGuard) {
            centrePresent = true;
            // psi's first factor degenerates to 2it * zeta: the term is
            // zeta^{-(m+1)} / (2it)^{m+1} times the second binomial series.
            auto s2 = binomSeries(a2, b2, spec.m, nMax + mp1 + 1);
            Complex scale = base / ipow(twoIt, mp1);
            for (size_t i = 0; i < acc.size(); ++i) acc[i] += scale * s2[i];
        } else {
            radius = std::min(radius, d);
            auto s1 = binomSeries(wc - wqc, std::conj(wc) - wqc, spec.m,
                                  nMax + 1);
            auto s2 = binomSeries(a2, b2, spec.m, nMax + 1);
            for (int n = 0; n <= nMax; ++n) {
                Complex c = 0.0;
                for (int k = 0; k <= n; ++k)
                    c += s1[static_cast<size_t>(k)] *
                         s2[static_cast<size_t>(n - k)];
                acc[static_cast<size_t>(n + mp1)] += base * c;
            }
        }
    }

    LaurentSeries out;
    out.convergenceRadius = radius;
    if (centrePresent) {
        out.nMin = -mp1;
        out.coeffs = std::move(acc);
    } else {
        out.nMin = 0;
        out.coeffs.assign(acc.begin() + mp1, acc.end());
    }
    return out;
}

LaurentSeries laurentContourOracle(
    const std::function<Complex(const UhpPoint&)>& evaluator, int m,
    const UhpPoint& w, double rho, int nMin, int nMax, double crossTol) {
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("laurentContourOracle: need 0 < rho < 1");
    if (nMax < nMin) throw ConfigError("laurentContourOracle: empty window");
    int count = nMax - nMin + 1;
    // Coefficients of a form with poles of order m+1 at chart radius R grow
    // like n^m R^{-n}, so K must keep the aliased index a_{n+K} * r^K
    // negligible; 256 puts it far below the cross-check budget for the
    // sampling radii used here (r <= 0.8 R).
    int K = std::max(256, 4 * count);
    Complex twoIt(0.0, 2.0 * w.v);

    auto extract = [&](double r, double& hMax) {
        std::vector<Complex> a(static_cast<size_t>(count), Complex(0.0, 0.0));
        hMax = 0.0;
        for (int k = 0; k < K; ++k) {
            double phi = 2.0 * M_PI * k / K;
            Complex zeta = std::polar(r, phi);
            Complex h = evaluator(awInverse(w, zeta)) * ipow(twoIt, m + 1) /
                        ipow(1.0 - zeta, 2 * m + 2);
            hMax = std::max(hMax, std::abs(h));
            for (int n = nMin; n <= nMax; ++n)
                a[static_cast<size_t>(n - nMin)] +=
                    h * std::polar(std::pow(r, -n), -n * phi);
        }
        for (auto& c : a) c /= static_cast<double>(K);
        return a;
    };

    double hMax1 = 0.0, hMax2 = 0.0;
    auto a1 = extract(rho, hMax1);
    auto a2 = extract(0.5 * rho, hMax2);
    double scaleWin = 0.0;
    for (size_t i = 0; i < a1.size(); ++i)
        scaleWin = std::max({scaleWin, std::abs(a1[i]), std::abs(a2[i])});
    for (int n = nMin; n <= nMax; ++n) {
        size_t i = static_cast<size_t>(n - nMin);
        // Roundoff floor: machine-level noise on the samples is amplified by
        // r^{-n} in the n-th coefficient.
        double floorN = 1e-10 * (hMax1 * std::pow(rho, -n) +
                                 hMax2 * std::pow(0.5 * rho, -n));
        double tol = crossTol * scaleWin + floorN;
        if (std::abs(a1[i] - a2[i]) > tol)
            throw AliasingDetected(
                "laurentContourOracle: two-radius cross-check failed at n=" +
                std::to_string(n));
    }
    return LaurentSeries{nMin, std::move(a1), rho};
}

std::vector<Complex> psiPoly(const UhpPoint& w, const UhpPoint& w0) {
    requireDistinct(w, w0, "psiPoly");
    Complex wc = w.toComplex(), wb = w.conj();
    Complex w0c = w0.toComplex(), w0b = w0.conj();
    Complex a1 = wc - w0c, b1 = wb - w0c;
    Complex a2 = wc - w0b, b2 = wb - w0b;
    return {a1 * a2, -(a1 * b2 + a2 * b1), b1 * b2};
}

LaurentSeries cCoeffs(int m, double r, const LaurentSeries& aSeries,
                      const UhpPoint& w, const UhpPoint& w0) {
    if (m < 0) throw ConfigError("cCoeffs: m must be >= 0");
    std::vector<Complex> poly{Complex(1.0, 0.0)};
    if (m > 0) {
        auto psi = psiPoly(w, w0);
        for (int k = 0; k < m; ++k) poly = convolve(poly, psi);
    } else {
        requireDistinct(w, w0, "cCoeffs");
    }
    Complex scale = std::pow(std::abs(r), m / 2.0) /
                    ipow(Complex(0.0, 2.0 * w0.v * w.v), m);
    for (auto& c : poly) c *= scale;
    LaurentSeries out;
    out.nMin = aSeries.nMin;
    out.convergenceRadius = aSeries.convergenceRadius;
    out.coeffs = aSeries.coeffs.empty()
                     ? std::vector<Complex>()
                     : convolve(poly, aSeries.coeffs);
    return out;
}

Complex alphaP0(int m, int p, const UhpPoint& w, const UhpPoint& w0) {
    requireDistinct(w, w0, "alphaP0");
    if (p < 0) throw ConfigError("alphaP0: p must be >= 0");
    double ch = coshDist(w, w0);
    if (p == 0) return bM(m, Complex(ch, 0.0));
    Complex wb = w.conj();
    Complex num = ipow((wb - w0.toComplex()) * (wb - w0.conj()), p);
    double fact = 1.0;
    for (int k = 2; k <= p; ++k) fact *= k;
    double sign = (p % 2 == 0) ? 1.0 : -1.0;
    return sign * BmDerivative(m, p)(ch) * num /
           (fact * std::pow(2.0 * w0.v * w.v, p));
}

Complex coefficientTransport(const Mat2R& gamma, const UhpPoint& w, int m,
                             int n) {
    return ipow(gamma.j(w.conj()) / gamma.j(w.toComplex()), m + 1 + n);
}

} // namespace merolift
