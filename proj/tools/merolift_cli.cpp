// Command-line front end: class enumeration, point/grid evaluation of the
// lift family, pairing runs (residue formula and/or regularization oracle),
// and quick verification suites.  Exit codes: 0 success, 1 verification
// failure, 2 invalid configuration, 3 singular input, 4 method disagreement.
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "merolift/pairing.hpp"

using namespace merolift;
using nlohmann::json;

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSingular = 3;
constexpr int kExitDisagree = 4;

json complexJson(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

/// Parse "a+bi" / "a-bi" / "bi" / "a" into a complex number.
Complex parseComplex(const std::string& text) {
    std::string s = text;
    if (s.empty()) throw ConfigError("empty complex literal");
    bool hasI = s.back() == 'i' || s.back() == 'I';
    if (hasI) s.pop_back();
    if (!hasI) {
        size_t pos = 0;
        double re = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("bad complex literal: " + text);
        return {re, 0.0};
    }
    // Find the sign splitting real and imaginary parts (not an exponent
    // sign and not the leading sign).
    size_t split = std::string::npos;
    for (size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == '+' || s[i] == '-') &&
            s[i - 1] != 'e' && s[i - 1] != 'E')
            split = i;
    }
    try {
        if (split == std::string::npos) {
            std::string im = s;
            if (im.empty() || im == "+") return {0.0, 1.0};
            if (im == "-") return {0.0, -1.0};
            return {0.0, std::stod(im)};
        }
        double re = std::stod(s.substr(0, split));
        std::string im = s.substr(split);
        if (im == "+") return {re, 1.0};
        if (im == "-") return {re, -1.0};
        return {re, std::stod(im)};
    } catch (const std::exception&) {
        throw ConfigError("bad complex literal: " + text);
    }
}

struct GridWindow {
    double umin, umax, vmin, vmax;
    int nx, ny;
};

GridWindow parseGrid(const std::string& text) {
    // umin:umax:nx,vmin:vmax:ny
    GridWindow g{};
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    std::istringstream in(text);
    if (!(in >> g.umin >> c1 >> g.umax >> c2 >> g.nx >> c3 >> g.vmin >> c1 >>
          g.vmax >> c4 >> g.ny) ||
        c1 != ':' || c2 != ':' || c3 != ',' || c4 != ':' || g.nx < 1 ||
        g.ny < 1 || g.vmin <= 0.0)
        throw ConfigError("bad grid window: " + text);
    return g;
}

void emit(const std::string& text, const std::string& outPath) {
    if (outPath.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(outPath);
    if (!out) throw ConfigError("cannot open output file: " + outPath);
    out << text << "\n";
}

struct SpecFlags {
    int m = 2;
    long long N = 1, beta = 0, D = -4;
    double tol = 1e-8;

    LiftSpec build() const { return LiftSpec(m, N, beta, D, tol); }
};

EvalResult evalOne(const std::string& what, const LiftSpec& spec, int p,
                   const UhpPoint& z) {
    if (what == "f") return fMero(spec, z);
    if (what == "phi") return phiLift(spec, z);
    if (what == "comp") return liftComponent(spec, p, z);
    if (what == "mathcalF") return mathcalF(spec, z);
    if (what == "green") {
        EvalResult r;
        r.value = Complex(greenValue(spec, z), 0.0);
        return r;
    }
    throw ConfigError("unknown eval target: " + what);
}

int cmdEnumerate(long long N, long long beta, long long D,
                 const std::string& outPath) {
    ClassData cd = classRepresentatives(N, beta, D);
    emit(cd.toJson(), outPath);
    return 0;
}

int cmdEval(const std::string& what, const SpecFlags& sf, int p,
            const std::string& zText, const std::string& gridText,
            const std::string& format, const std::string& outPath) {
    LiftSpec spec = sf.build();
    if (!zText.empty()) {
        Complex zc = parseComplex(zText);
        if (zc.imag() <= 0.0)
            throw ConfigError("evaluation point must be in the upper half-plane");
        UhpPoint z(zc.real(), zc.imag());
        EvalResult r = evalOne(what, spec, p, z);
        json j{{"what", what},
               {"z", {{"u", z.u}, {"v", z.v}}},
               {"value", complexJson(r.value)},
               {"termsUsed", r.termsUsed},
               {"tailBound", r.tailBound}};
        if (what == "comp") j["p"] = p;
        emit(j.dump(), outPath);
        return 0;
    }
    if (gridText.empty())
        throw ConfigError("eval needs --z or --grid");
    GridWindow g = parseGrid(gridText);
    std::ostringstream rows;
    json jrows = json::array();
    if (format == "csv") rows << "u,v,re,im,flag\n";
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            double u = g.nx == 1 ? g.umin
                                 : g.umin + (g.umax - g.umin) * ix / (g.nx - 1);
            double v = g.ny == 1 ? g.vmin
                                 : g.vmin + (g.vmax - g.vmin) * iy / (g.ny - 1);
            Complex val;
            int flag = 0;
            try {
                val = evalOne(what, spec, p, UhpPoint(u, v)).value;
            } catch (const SingularPoint&) {
                val = Complex(std::nan(""), std::nan(""));
                flag = 1;
            }
            if (format == "csv") {
                rows << u << "," << v << ",";
                if (flag)
                    rows << "nan,nan,1\n";
                else
                    rows << val.real() << "," << val.imag() << ",0\n";
            } else {
                jrows.push_back({{"u", u},
                                 {"v", v},
                                 {"value", complexJson(val)},
                                 {"flag", flag}});
            }
        }
    }
    if (format == "csv") {
        std::string s = rows.str();
        if (!s.empty() && s.back() == '\n') s.pop_back();
        emit(s, outPath);
    } else
        emit(json{{"what", what}, {"rows", jrows}}.dump(), outPath);
    return 0;
}

int cmdPair(const SpecFlags& gf, const SpecFlags& lf,
            const std::string& method, double epsilon, double gapTol,
            double quadTol, double evalTol, const std::string& outPath) {
    LiftSpec gSpec = gf.build(), liftSpec = lf.build();
    json out;
    Complex resValue, oraValue;
    if (method == "residue" || method == "both") {
        PairingResult r = regularizedPairing(gSpec, liftSpec);
        resValue = r.value;
        out["residue"] = json::parse(r.toJson());
    }
    if (method == "oracle" || method == "both") {
        OracleParams p;
        p.quadTol = quadTol;
        p.evalTol = evalTol;
        RegularizationOracle oracle(gSpec, liftSpec, p);
        oraValue = oracle.value(epsilon);
        out["oracle"] = json{{"value", complexJson(oraValue)},
                             {"method", "oracle"},
                             {"epsilon", epsilon},
                             {"errorBudget", oracle.errorBudget()}};
    }
    if (method == "both") {
        double scale =
            std::max({std::abs(resValue), std::abs(oraValue), 1e-300});
        double gap = std::abs(resValue - oraValue) / scale;
        out["gap"] = gap;
        emit(out.dump(), outPath);
        return gap > gapTol ? kExitDisagree : 0;
    }
    if (method != "residue" && method != "oracle")
        throw ConfigError("unknown method: " + method);
    emit(out.dump(), outPath);
    return 0;
}

// ---- verification suites -------------------------------------------------

struct Verifier {
    json checks = json::array();
    bool ok = true;

    void record(const std::string& name, bool pass, double err) {
        checks.push_back({{"name", name}, {"pass", pass}, {"error", err}});
        ok = ok && pass;
    }
};

void verifySpecfun(Verifier& v) {
    // Kernel derivative vs central finite difference.
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
        BmDerivative d1(m, 1);
        for (double T : {1.5, 2.0, 5.0}) {
            double h = 1e-6 * T;
            Complex fd = (bM(m, Complex(T + h, 0.0)) -
                          bM(m, Complex(T - h, 0.0))) /
                         (2.0 * h);
            Complex an = d1(Complex(T, 0.0));
            worst = std::max(worst,
                             std::abs(fd - an) / std::max(1.0, std::abs(an)));
        }
    }
    v.record("bM derivative vs stencil", worst < 1e-7, worst);

    // Q_m decay ordering.
    bool mono = true;
    for (int m = 1; m <= 4; ++m)
        for (double t : {1.5, 2.0, 5.0})
            mono = mono && legendreQ(m, t) > legendreQ(m + 1, t) &&
                   legendreQ(m, t) > 0.0;
    v.record("legendreQ positivity and decay", mono, 0.0);
}

void verifyGeometry(Verifier& v) {
    Mat2R g(2, 1, 1, 1);
    UhpPoint z(0.3, 1.7), w(-0.4, 0.6);
    double err = std::abs(coshDist(moebius(g, z), moebius(g, w)) -
                          coshDist(z, w));
    v.record("coshDist Moebius invariance", err < 1e-12, err);
    Complex zeta = awMap(w, z);
    UhpPoint back = awInverse(w, zeta);
    double rt = std::hypot(back.u - z.u, back.v - z.v);
    v.record("chart roundtrip", rt < 1e-12, rt);
    ReduceResult red = reduceToFundamentalDomain(UhpPoint(7.3, 0.02));
    bool inFd = std::abs(red.z0.u) <= 0.5 + 1e-12 &&
                red.z0.u * red.z0.u + red.z0.v * red.z0.v >= 1.0 - 1e-12;
    v.record("reduction lands in the fundamental domain", inFd, 0.0);
}

void verifyLadder(Verifier& v) {
    LiftSpec spec(2, 1, 1, -3, 1e-8);
    UhpPoint z(0.21, 1.37);
    Complex direct = deltaPhi(spec, z).value;
    Complex viaF = deltaPhiMeroConstant(spec) * fMero(spec, z).value;
    double err = std::abs(direct - viaF) / std::max(1e-300, std::abs(direct));
    v.record("deltaPhi closed forms agree", err < 1e-10, err);
    Complex c0 = liftComponent(spec, 0, z).value;
    Complex phi = phiLift(spec, z).value;
    double err0 = std::abs(c0 - phi) / std::max(1e-300, std::abs(phi));
    v.record("component 0 equals the lift", err0 < 1e-12, err0);
}

void verifyPairing(Verifier& v) {
    LiftSpec g(2, 1, 0, -4, 1e-10), lift(2, 1, 1, -3, 1e-10);
    UhpPoint w(0.0, 1.0);
    UhpPoint w0 = cmPoint(QForm{1, 1, 1});
    Complex direct = residueAtPole(g, w, w0, 2, lift.r());
    Complex contour = residueContour(g, w, w0, 2, lift.r());
    double err = std::abs(direct - contour) / std::max(1e-300, std::abs(direct));
    v.record("residue method duality", err < 1e-8, err);
    double ct = std::abs(liftPoleConstantTerm(2, 0.1)) /
                liftPoleConstantTermScale(2, 0.1);
    v.record("coincident-pole constant term vanishes", ct < 1e-6, ct);
}

int cmdVerify(const std::string& suite, const std::string& outPath) {
    Verifier v;
    bool any = false;
    if (suite == "specfun" || suite == "all") verifySpecfun(v), any = true;
    if (suite == "geometry" || suite == "all") verifyGeometry(v), any = true;
    if (suite == "ladder" || suite == "all") verifyLadder(v), any = true;
    if (suite == "pairing" || suite == "all") verifyPairing(v), any = true;
    if (!any) throw ConfigError("unknown suite: " + suite);
    json out{{"suite", suite}, {"pass", v.ok}, {"checks", v.checks}};
    emit(out.dump(), outPath);
    return v.ok ? 0 : kExitVerifyFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"merolift: meromorphic modular lifts, Laurent data and "
                 "regularized pairings"};
    app.require_subcommand(1);

    std::string outPath, format = "json";

    // enumerate
    auto* enu = app.add_subcommand("enumerate", "List class representatives");
    long long eN = 1, eBeta = 0, eD = -4;
    enu->add_option("--N", eN);
    enu->add_option("--beta", eBeta);
    enu->add_option("--D", eD)->required();
    enu->add_option("--out", outPath);

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a lift quantity");
    SpecFlags sf;
    std::string what = "f", zText, gridText;
    int pComp = 0;
    ev->add_option("--what", what);
    ev->add_option("--m", sf.m);
    ev->add_option("--N", sf.N);
    ev->add_option("--beta", sf.beta);
    ev->add_option("--D", sf.D)->required();
    ev->add_option("--tol", sf.tol);
    ev->add_option("--p", pComp);
    ev->add_option("--z", zText);
    ev->add_option("--grid", gridText);
    ev->add_option("--format", format);
    ev->add_option("--out", outPath);

    // pair
    auto* pr = app.add_subcommand("pair", "Regularized pairing of two specs");
    SpecFlags gf, lf;
    gf.D = -4;
    lf.D = -3;
    lf.beta = 1;
    std::string method = "residue";
    double epsilon = 0.10, gapTol = 1e-3, quadTol = 2e-7, evalTol = 1e-6;
    pr->add_option("--m", gf.m);
    pr->add_option("--N", gf.N);
    pr->add_option("--g-beta", gf.beta);
    pr->add_option("--g-D", gf.D)->required();
    pr->add_option("--beta", lf.beta);
    pr->add_option("--D", lf.D)->required();
    pr->add_option("--tol", gf.tol);
    pr->add_option("--method", method);
    pr->add_option("--epsilon", epsilon);
    pr->add_option("--gap-tol", gapTol);
    pr->add_option("--quad-tol", quadTol);
    pr->add_option("--eval-tol", evalTol);
    pr->add_option("--out", outPath);

    // verify
    auto* vf = app.add_subcommand("verify", "Run an invariant suite");
    std::string suite = "all";
    vf->add_option("--suite", suite);
    vf->add_option("--out", outPath);

    CLI11_PARSE(app, argc, argv);

    try {
        if (enu->parsed()) return cmdEnumerate(eN, eBeta, eD, outPath);
        if (ev->parsed())
            return cmdEval(what, sf, pComp, zText, gridText, format, outPath);
        if (pr->parsed()) {
            lf.m = gf.m;
            lf.N = gf.N;
            lf.tol = gf.tol;
            return cmdPair(gf, lf, method, epsilon, gapTol, quadTol, evalTol,
                           outPath);
        }
        if (vf->parsed()) return cmdVerify(suite, outPath);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SingularPoint& e) {
        std::cerr << "singular input: " << e.what() << "\n";
        return kExitSingular;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerifyFail;
    }
    return 0;
}
