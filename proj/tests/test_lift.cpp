// Unit tests for the lattice-sum evaluators and their operator structure.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "merolift/lift.hpp"

using namespace merolift;

namespace {

std::mt19937 rng(20240824);

UhpPoint randomPoint() {
    std::uniform_real_distribution<double> du(-0.45, 0.45), dv(0.8, 1.7);
    return UhpPoint(du(rng), dv(rng));
}

bool closeRel(Complex a, Complex b, double rel) {
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel * std::max(scale, 1e-300);
}

/// Finite-difference weight-k raising operator d/dz + k/(2iv) with a
/// central stencil of width h in each coordinate.
template <typename F>
Complex fdDelta(F f, double k, const UhpPoint& z, double h) {
    Complex du = (f(UhpPoint(z.u + h, z.v)) - f(UhpPoint(z.u - h, z.v))) /
                 (2.0 * h);
    Complex dv = (f(UhpPoint(z.u, z.v + h)) - f(UhpPoint(z.u, z.v - h))) /
                 (2.0 * h);
    Complex dz = 0.5 * (du - Complex(0.0, 1.0) * dv);
    return dz + k / (Complex(0.0, 2.0) * z.v) * f(z);
}

/// Fixed-form-set component evaluation: the truncation set is frozen so
/// finite differencing probes only the closed forms, not set churn at the
/// truncation boundary.
Complex componentOnSet(const LiftSpec& spec, int p,
                       const std::vector<WeightedForm>& forms,
                       const UhpPoint& z) {
    Complex acc{0.0, 0.0};
    for (const auto& wf : forms)
        acc += wf.weight * componentSummand(spec, p, wf.q, z);
    return acc;
}

} // namespace

TEST_CASE("LiftSpec validation and vanishing rule") {
    CHECK_NOTHROW(LiftSpec(2, 1, 0, -4));
    CHECK_NOTHROW(LiftSpec(2, 1, 1, -3));
    CHECK_NOTHROW(LiftSpec(1, 2, 1, -7));
    CHECK_THROWS_AS(LiftSpec(2, 1, 1, -4), ConfigError);
    CHECK_THROWS_AS(LiftSpec(2, 1, 0, 4), ConfigError);
    CHECK_THROWS_AS(LiftSpec(2, 0, 0, -4), ConfigError);

    CHECK(LiftSpec(2, 1, 0, -4).familiesCoincide());
    CHECK(LiftSpec(2, 1, 1, -3).familiesCoincide()); // beta = N = 1 mod 2N
    CHECK_FALSE(LiftSpec(1, 2, 1, -7).familiesCoincide());
    CHECK(LiftSpec(3, 1, 0, -4).vanishes());
    CHECK_FALSE(LiftSpec(2, 1, 0, -4).vanishes());
    CHECK_FALSE(LiftSpec(3, 2, 1, -7).vanishes());
}

TEST_CASE("fMero modularity at weight 2m+2") {
    LiftSpec spec(2, 1, 0, -4, 1e-9);
    UhpPoint z(0.0, 2.0);
    Complex f = fMero(spec, z).value;
    CHECK(std::abs(f) > 1e-6);

    for (const Mat2R& g : {Mat2R(1, 1, 0, 1), Mat2R(0, -1, 1, 0),
                           Mat2R(1, 0, 1, 1)}) {
        Complex lhs = fMero(spec, moebius(g, z)).value;
        Complex rhs = std::pow(g.j(z.toComplex()), 6) * f;
        CHECK(closeRel(lhs, rhs, 1e-6));
    }
}

TEST_CASE("fMero pole of order m+1 at a CM point") {
    LiftSpec spec(2, 1, 0, -4, 1e-9);
    Complex dir = std::polar(1.0, 0.4);
    auto scaled = [&](double s) {
        Complex z = Complex(0.0, 1.0) + s * dir;
        return std::abs(fMero(spec, UhpPoint(z.real(), z.imag())).value) *
               s * s * s;
    };
    double a = scaled(0.01), b = scaled(0.005);
    CHECK(a > 1e-8);
    CHECK(std::abs(a / b - 1.0) < 0.05);
}

TEST_CASE("vanishing configuration evaluates to zero") {
    LiftSpec spec(3, 1, 0, -4, 1e-8);
    UhpPoint z(0.13, 1.37);
    CHECK(std::abs(fMero(spec, z).value) == 0.0);
    CHECK(std::abs(phiLift(spec, z).value) == 0.0);
    CHECK(std::abs(deltaPhi(spec, z).value) == 0.0);
}

TEST_CASE("pole guard raises SingularPoint") {
    LiftSpec spec(2, 1, 0, -4, 1e-8);
    CHECK_THROWS_AS(fMero(spec, UhpPoint(0.0, 1.0)), SingularPoint);
    CHECK_THROWS_AS(phiLift(spec, UhpPoint(0.0, 1.0)), SingularPoint);
    CHECK_THROWS_AS(liftComponent(spec, 2, UhpPoint(0.0, 1.0)), SingularPoint);
    CHECK_THROWS_AS(mathcalF(spec, UhpPoint(0.0, 1.0)), SingularPoint);
}

TEST_CASE("truncation contract") {
    UhpPoint z(0.0, 1.0);
    LiftSpec loose(2, 1, 0, -4, 1e-6), tight(2, 1, 0, -4, 1e-10);
    UhpPoint z2(0.21, 1.13);
    EvalResult a = phiLift(loose, z2), b = phiLift(tight, z2);
    CHECK(std::abs(a.value - b.value) < 1e-6 + 1e-10);
    CHECK(a.tailBound <= 1e-6);
    CHECK(b.tailBound <= 1e-10);
    CHECK(a.termsUsed > 0);
    CHECK(b.termsUsed > a.termsUsed);

    // fMero self-consistency across a tolerance refinement.
    EvalResult fa = fMero(loose, z2), fb = fMero(tight, z2);
    CHECK(std::abs(fa.value - fb.value) < 1e-6 + 1e-10);

    // Monotonicity of the radius in the tolerance.
    CHECK(truncationBound(tight, z2) > truncationBound(loose, z2));

    // Minimal order still terminates.
    LiftSpec m1(1, 2, 1, -7, 1e-3);
    CHECK(truncationBound(m1, z2) > 1.0);
    CHECK(std::isfinite(fMero(m1, z2).value.real()));
}

TEST_CASE("liftComponent anchors: p=0 and p=2m") {
    for (auto [mm, N, beta, D] :
         {std::tuple{2, 1LL, 0LL, -4LL}, std::tuple{2, 1LL, 1LL, -3LL},
          std::tuple{1, 2LL, 1LL, -7LL}}) {
        LiftSpec spec(mm, N, beta, D, mm == 1 ? 1e-4 : 1e-7);
        UhpPoint z(0.13, 1.37);
        Complex phi = phiLift(spec, z).value;
        Complex c0 = liftComponent(spec, 0, z).value;
        Complex c2m = liftComponent(spec, 2 * mm, z).value;
        double scale = std::max(std::abs(phi), 1e-12);
        CHECK(std::abs(c0 - phi) < 1e-9 * scale);
        Complex expect = std::pow(4.0 * z.v * z.v, mm) * std::conj(phi);
        CHECK(std::abs(c2m - expect) < 1e-9 * std::abs(expect));
    }
}

TEST_CASE("middle component is real") {
    LiftSpec spec(2, 1, 1, -3, 1e-8);
    UhpPoint z(0.13, 1.37);
    Complex mid = liftComponent(spec, 2, z).value;
    CHECK(std::abs(mid.imag()) < 1e-9 * std::max(std::abs(mid), 1e-12));
}

TEST_CASE("operator ladder on frozen form sets") {
    // delta_{2m-2p} comp_p == (2m-p+1) comp_{p-1}, p = 1..2m, by finite
    // differences of the closed forms over a fixed truncation set.
    double h = 1e-4;
    for (auto [mm, N, beta, D] :
         {std::tuple{1, 2LL, 1LL, -7LL}, std::tuple{2, 1LL, 0LL, -4LL},
          std::tuple{2, 1LL, 1LL, -3LL}, std::tuple{3, 2LL, 1LL, -7LL}}) {
        LiftSpec spec(mm, N, beta, D, 1e-4);
        for (int trial = 0; trial < 5; ++trial) {
            // The stencil error grows like (c-1)^{-m-3} near a singular
            // point, so resample z until it keeps a safe cosh-distance
            // margin from every contributing singularity.
            UhpPoint z = randomPoint();
            auto forms = contributingForms(spec, z, 30.0);
            auto minCosh = [&](const UhpPoint& zz) {
                double best = 1e300;
                for (const auto& wf : forms) {
                    UhpPoint w = cmPoint(wf.q);
                    double c = 1.0 +
                               std::norm(Complex(zz.u - w.u, zz.v - w.v)) /
                                   (2.0 * zz.v * w.v);
                    best = std::min(best, c);
                }
                return best;
            };
            while (minCosh(z) < 1.05) {
                z = randomPoint();
                forms = contributingForms(spec, z, 30.0);
            }
            REQUIRE(!forms.empty());
            for (int p = 1; p <= 2 * mm; ++p) {
                auto fp = [&](const UhpPoint& zz) {
                    return componentOnSet(spec, p, forms, zz);
                };
                Complex lhs = fdDelta(fp, 2.0 * mm - 2.0 * p, z, h);
                Complex rhs = (2.0 * mm - p + 1.0) *
                              componentOnSet(spec, p - 1, forms, z);
                CHECK(closeRel(lhs, rhs, 1e-4));
            }
        }
    }
}

TEST_CASE("operator ladder through the public evaluators") {
    LiftSpec spec(2, 1, 0, -4, 1e-9);
    double h = 1e-4;
    for (int trial = 0; trial < 3; ++trial) {
        UhpPoint z = randomPoint();
        for (int p = 1; p <= 2; ++p) {
            auto fp = [&](const UhpPoint& zz) {
                return liftComponent(spec, p, zz).value;
            };
            Complex lhs = fdDelta(fp, 4.0 - 2.0 * p, z, h);
            Complex rhs = (5.0 - p) * liftComponent(spec, p - 1, z).value;
            CHECK(closeRel(lhs, rhs, 1e-4));
        }
    }
}

TEST_CASE("single-summand lowering chain") {
    // The closed form at lowering index j, finite-differenced once, matches
    // the closed form at j+1 (component indices 2m-j -> 2m-j-1).
    double h = 1e-4;
    for (int mm : {1, 2, 3}) {
        LiftSpec spec(mm, mm % 2 ? 2 : 1, mm % 2 ? 1 : 0, mm % 2 ? -7 : -4,
                      1e-6);
        QForm q = (mm % 2) ? QForm{2, 1, 1} : QForm{1, 0, 1};
        UhpPoint z(0.23, 1.41);
        for (int j = 0; j < mm; ++j) {
            auto f = [&](const UhpPoint& zz) {
                return componentSummand(spec, 2 * mm - j, q, zz);
            };
            Complex lhs = fdDelta(f, -2.0 * mm + 2.0 * j, z, h);
            Complex rhs = (j + 1.0) * componentSummand(spec, 2 * mm - j - 1, q, z);
            CHECK(closeRel(lhs, rhs, 1e-4));
        }
    }
}

TEST_CASE("deltaPhi dual closed forms and stencil") {
    LiftSpec spec(2, 1, 0, -4, 1e-9);
    UhpPoint z(0.2, 1.5);
    Complex a = deltaPhi(spec, z).value;
    Complex b = deltaPhiMeroConstant(spec) * fMero(spec, z).value;
    CHECK(std::abs(a - b) < 1e-10 * std::max(std::abs(a), std::abs(b)));

    // The weight-raising operator carries the arithmetic 1/(2 pi i).
    UhpPoint z2(0.13, 1.37);
    auto phi = [&](const UhpPoint& zz) { return phiLift(spec, zz).value; };
    Complex fd = fdDelta(phi, 4.0, z2, 1e-4) / Complex(0.0, 2.0 * M_PI);
    Complex cl = deltaPhi(spec, z2).value;
    CHECK(std::abs(fd - cl) < 1e-5 * std::max(std::abs(cl), 1e-12));
}

TEST_CASE("greenValue: singularity, eigenvalue, weight-0 invariance") {
    LiftSpec spec(2, 1, 0, -4, 1e-9);

    // Logarithmic singularity ln|z-w|^2 with coefficient 1 at w=i.
    Complex dir = std::polar(1.0, 1.1);
    std::vector<double> reg;
    for (double s : {0.02, 0.01, 0.005, 0.0025}) {
        Complex z = Complex(0.0, 1.0) + s * dir;
        double g = greenValue(spec, UhpPoint(z.real(), z.imag()));
        reg.push_back(g - std::log(s * s));
    }
    double lo = *std::min_element(reg.begin(), reg.end());
    double hi = *std::max_element(reg.begin(), reg.end());
    CHECK(hi - lo < 0.05);

    // v^2 (d_uu + d_vv) G = m(m+1) G.
    UhpPoint z(0.13, 1.37);
    double hh = 1e-3;
    double g0 = greenValue(spec, z);
    double lap = (greenValue(spec, UhpPoint(z.u + hh, z.v)) +
                  greenValue(spec, UhpPoint(z.u - hh, z.v)) +
                  greenValue(spec, UhpPoint(z.u, z.v + hh)) +
                  greenValue(spec, UhpPoint(z.u, z.v - hh)) - 4.0 * g0) /
                 (hh * hh);
    double lhs = z.v * z.v * lap;
    double rhs = 2.0 * 3.0 * g0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));

    // Weight 0: invariance under the full modular group.
    for (const Mat2R& g : {Mat2R(1, 1, 0, 1), Mat2R(0, -1, 1, 0)}) {
        double moved = greenValue(spec, moebius(g, z));
        CHECK(moved == doctest::Approx(g0).epsilon(1e-6));
    }
}

TEST_CASE("middle-component summand is proportional to legendreQ") {
    LiftSpec spec(2, 1, 0, -4, 1e-8);
    QForm q{1, 0, 1};
    double ref = 0.0;
    bool first = true;
    for (const UhpPoint& z : {UhpPoint(0.4, 1.2), UhpPoint(-0.7, 2.3),
                              UhpPoint(0.05, 0.6)}) {
        double c = qZ(q, z) / 2.0;
        Complex s = componentSummand(spec, 2, q, z);
        CHECK(std::abs(s.imag()) < 1e-12 * std::abs(s));
        double ratio = s.real() / legendreQ(2, c);
        if (first) {
            ref = ratio;
            first = false;
        } else {
            CHECK(ratio == doctest::Approx(ref).epsilon(1e-10));
        }
    }
    CHECK(ref != 0.0);
}

TEST_CASE("mathcalF: theta integral and component relation") {
    // Theta integral against half the incomplete-beta kernel for Q=(1,0,1)
    // at z=2i: upper limit artanh(sqrt|D|/Q_z).
    int m = 2;
    QForm q{1, 0, 1};
    UhpPoint z(0.0, 2.0);
    double x = std::sqrt(4.0) / qZ(q, z);
    double upper = std::atanh(x);
    auto integrand = [&](double th) { return std::pow(std::sinh(th), 2 * m); };
    double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, upper, 12, 1e-13);
    double viaBeta = 0.5 * incompleteBeta(m + 0.5, -m, x * x);
    CHECK(quad == doctest::Approx(viaBeta).epsilon(1e-10));

    LiftSpec spec(2, 1, 0, -4, 1e-9);
    UhpPoint z2(0.3, 1.2);
    Complex lhs = liftComponent(spec, 4, z2).value;
    Complex rhs = mathcalFComponentConstant(spec) * mathcalF(spec, z2).value;
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(std::abs(lhs), std::abs(rhs)));
}

TEST_CASE("vvPairingDensity") {
    // m = 0: single slot, weight 1.
    CHECK(std::abs(vvPairingDensity({Complex(2, 1)}, {Complex(3, -1)}, 1.7) -
                   Complex(2, 1) * std::conj(Complex(3, -1))) < 1e-15);

    // Unit vector in the middle slot, m = 2: weight m! m!/(2m)! = 1/6.
    std::vector<Complex> e(5, Complex(0, 0));
    e[2] = Complex(0, 3);
    Complex d = vvPairingDensity(e, e, 2.0);
    CHECK(d.real() == doctest::Approx(9.0 * 2.0 * 2.0 / 24.0));
    CHECK(d.imag() == doctest::Approx(0.0));

    // Bilinearity in the first argument.
    std::vector<Complex> a = {1, {0, 1}, {2, -1}, {0.5, 0.5}, -1};
    std::vector<Complex> b = {2, -1, {0, 2}, 1, {1, 1}};
    std::vector<Complex> g = {1, 1, 1, {0, -1}, 2};
    std::vector<Complex> ab(5);
    for (int i = 0; i < 5; ++i) ab[i] = 2.0 * a[i] + Complex(0, 1) * b[i];
    Complex lhs = vvPairingDensity(ab, g, 1.3);
    Complex rhs = 2.0 * vvPairingDensity(a, g, 1.3) +
                  Complex(0, 1) * vvPairingDensity(b, g, 1.3);
    CHECK(std::abs(lhs - rhs) < 1e-12);

    CHECK_THROWS_AS(vvPairingDensity({1, 2}, {1, 2}, 1.0), ConfigError);
}

TEST_CASE("per-summand decay exponents fall with each lowering step") {
    LiftSpec spec(2, 1, 0, -4, 1e-8);
    QForm q{1, 0, 1};
    double prev = 1e9;
    for (int j = 0; j <= 2; ++j) {
        double lo = std::abs(componentSummand(spec, 4 - j, q, UhpPoint(0, 5)));
        double hi = std::abs(componentSummand(spec, 4 - j, q, UhpPoint(0, 40)));
        double alpha = std::log(hi / lo) / std::log(8.0);
        CHECK(alpha < prev - 0.5);
        prev = alpha;
    }
}

TEST_CASE("cusp decay of fMero along the imaginary axis") {
    LiftSpec spec(2, 1, 0, -4, 1e-10);
    double prev = std::abs(fMero(spec, UhpPoint(0.0, 5.0)).value);
    for (double y : {10.0, 20.0, 40.0}) {
        double cur = std::abs(fMero(spec, UhpPoint(0.0, y)).value);
        CHECK(cur <= prev / 2.0);
        prev = cur;
    }
}
