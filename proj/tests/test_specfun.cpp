// Unit tests for the special-function kernels.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "merolift/specfun.hpp"

using namespace merolift;

TEST_CASE("incompleteBeta basics") {
    CHECK(incompleteBeta(1, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(incompleteBeta(2.5, -2, 0.0) == doctest::Approx(0.0));
    // B(m+1/2, -m; 1/T^2) = bM(m, T): here m=2, T=2.
    CHECK(incompleteBeta(2.5, -2, 0.25) ==
          doctest::Approx(bM(2, Complex(2, 0)).real()).epsilon(1e-10));
    CHECK_THROWS_AS(incompleteBeta(-1, 1, 0.5), ConfigError);
    CHECK_THROWS_AS(incompleteBeta(1, 1, 1.0), ConfigError);
}

TEST_CASE("gaussHypergeometric basics and beta identity") {
    CHECK(gaussHypergeometric(0.7, 1.3, 2.2, 0.0) == doctest::Approx(1.0));
    // F(1,1,2;t) = -ln(1-t)/t.
    CHECK(gaussHypergeometric(1, 1, 2, 0.5) ==
          doctest::Approx(-std::log(0.5) / 0.5).epsilon(1e-12));
    // F(p, 1-q, p+1; T) = (p/T^p) B(p,q;T).
    for (double p : {1.5, 2.5}) {
        for (double q : {-1.0, -2.0}) {
            for (double T : {0.1, 0.5}) {
                double lhs = gaussHypergeometric(p, 1 - q, p + 1, T);
                double rhs = p / std::pow(T, p) * incompleteBeta(p, q, T);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
            }
        }
    }
    CHECK_THROWS_AS(gaussHypergeometric(-2, 1, 2, 0.5), ConfigError);
    CHECK_THROWS_AS(gaussHypergeometric(1, 1, 2, 0.9999999), ConfigError);
}

TEST_CASE("bM closed form vs quadrature, values, recurrence") {
    CHECK(bM(0, Complex(2, 0)).real() == doctest::Approx(std::log(3.0)));
    CHECK(bM(1, Complex(2, 0)).real() ==
          doctest::Approx(2.0 / 3.0 - 0.5 * std::log(3.0)).epsilon(1e-12));
    CHECK(bMQuadrature(0, 2.0) == doctest::Approx(std::log(3.0)).epsilon(1e-11));

    for (int m = 0; m <= 5; ++m) {
        for (double T : {1.01, 1.1, 2.0, 10.0}) {
            double cf = bM(m, Complex(T, 0)).real();
            double qd = bMQuadrature(m, T);
            CHECK(cf == doctest::Approx(qd).epsilon(1e-9));
        }
    }

    // Recurrence B_m = T/(m (T^2-1)^m) - (2m-1)/(2m) B_{m-1}.
    {
        int m = 3;
        double T = 1.5;
        double lhs = bM(m, Complex(T, 0)).real();
        double rhs = T / (m * std::pow(T * T - 1, m)) -
                     (2.0 * m - 1) / (2.0 * m) * bM(m - 1, Complex(T, 0)).real();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }

    // Tail bound at (m,T) = (2,3).
    CHECK(bMQuadrature(2, 3.0) <=
          2.0 * std::pow(3.0, -5) / (5.0 * std::pow(1.0 - 1.0 / 9.0, 3)));

    // Decay: T^{2m+1} bM stays bounded (and so does the weaker T^{m+1} bM).
    for (int m = 1; m <= 3; ++m) {
        double prev = 0.0;
        for (double T : {10.0, 20.0, 40.0, 80.0}) {
            double scaled = std::pow(T, 2 * m + 1) * bM(m, Complex(T, 0)).real();
            CHECK(std::abs(scaled) < 10.0);
            (void)prev;
            prev = scaled;
        }
    }
    CHECK_THROWS_AS(bM(1, Complex(0.5, 0)), ConfigError);
    CHECK_THROWS_AS(bMQuadrature(1, 1.0), ConfigError);
}

TEST_CASE("bM complex arguments stay consistent with the integral") {
    // Along a small vertical offset the closed form is the analytic
    // continuation; compare with a numerically integrated straight path
    // from a real anchor.
    Complex T(2.0, 0.3);
    Complex anchor(2.0, 0.0);
    int m = 2;
    // Integrate dB/dT = -2 (T^2-1)^{-(m+1)} along the segment.
    int K = 2000;
    Complex acc = bM(m, anchor);
    for (int k = 0; k < K; ++k) {
        Complex a = anchor + (T - anchor) * ((k + 0.0) / K);
        Complex b = anchor + (T - anchor) * ((k + 1.0) / K);
        Complex mid = 0.5 * (a + b);
        acc += -2.0 * std::pow(mid * mid - 1.0, -(m + 1.0)) * (b - a);
    }
    CHECK(std::abs(acc - bM(m, T)) < 1e-8);
}

TEST_CASE("BmDerivative") {
    BmDerivative d01(0, 1);
    CHECK(d01(2.0) == doctest::Approx(-2.0 / 3.0));

    // d/dT [-2 (T^2-1)^{-2}] = 8T (T^2-1)^{-3} -> 16/27 at T = 2.
    BmDerivative d12(1, 2);
    CHECK(d12(2.0) == doctest::Approx(16.0 / 27.0).epsilon(1e-12));

    // Finite-difference consistency against bM and against lower orders.
    double h = 1e-5;
    for (int m = 0; m <= 3; ++m) {
        for (double T : {1.5, 2.0, 4.0}) {
            BmDerivative d1(m, 1);
            double fd = (bM(m, Complex(T + h, 0)).real() -
                         bM(m, Complex(T - h, 0)).real()) / (2 * h);
            CHECK(d1(T) == doctest::Approx(fd).epsilon(1e-7));
            for (int p = 2; p <= 3; ++p) {
                BmDerivative dp(m, p), dpm1(m, p - 1);
                double fdp = (dpm1(T + h) - dpm1(T - h)) / (2 * h);
                CHECK(dp(T) == doctest::Approx(fdp).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("legendreTildeP family") {
    for (int l = 1; l <= 4; ++l) {
        Poly bottom = legendreTildeP(l, -l);
        REQUIRE(bottom.degree() == 0);
        CHECK(bottom(0.0) == doctest::Approx(1.0));
    }
    Poly p10 = legendreTildeP(1, 0);
    CHECK(p10.degree() == 1);
    CHECK(p10(1.0) == doctest::Approx(2.0));
    CHECK(p10(0.5) == doctest::Approx(1.0));

    // Ptilde_m^0 = 2^m m! P_m; check m=2 coefficients 12 xi^2 - 4.
    Poly p20 = legendreTildeP(2, 0);
    auto c = p20.coeffs();
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(-4.0));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK(c[2] == doctest::Approx(12.0));

    CHECK_THROWS_AS(legendreTildeP(2, 3), ConfigError);
}

TEST_CASE("Legendre recurrence as exact polynomial identity") {
    Poly t2m1({Rational(-1), Rational(0), Rational(1)});
    for (int l = 1; l <= 6; ++l) {
        for (int mt = -l; mt <= l - 1; ++mt) {
            Poly lhs = t2m1 * legendreTildeP(l, mt).derivative();
            Poly rhs = legendreTildeP(l, mt + 1) +
                       Poly::monomial(1, Rational(2 * mt)) * legendreTildeP(l, mt);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("sPoly") {
    CHECK(sPoly(3, 0).isZero());
    Poly s1 = sPoly(3, 1);
    REQUIRE(s1.degree() == 0);
    CHECK(s1(0.0) == doctest::Approx(2.0));
    for (int m = 1; m <= 5; ++m) {
        for (int p = 0; p <= m; ++p) {
            CHECK(sPoly(m, p).degree() <= p - 1);
        }
    }
    CHECK_THROWS_AS(sPoly(2, 3), ConfigError);
}

TEST_CASE("greenKernel vs legendreQ") {
    CHECK(greenKernel(0, 2.0) == doctest::Approx(std::log(3.0)));
    // Proportionality with a single m-dependent constant; the measured
    // constant must match (-1)^m (2m)!/2^{m-1}.
    for (int m = 1; m <= 3; ++m) {
        double ref = greenKernel(m, 1.5) / legendreQ(m, 1.5);
        for (double t : {2.0, 5.0, 20.0}) {
            CHECK(greenKernel(m, t) / legendreQ(m, t) ==
                  doctest::Approx(ref).epsilon(1e-8));
        }
        double predicted = std::tgamma(2 * m + 1.0) /
                           (std::pow(2.0, m - 1) * std::tgamma(m + 1.0));
        if (m % 2 != 0) predicted = -predicted;
        CHECK(ref == doctest::Approx(predicted).epsilon(1e-8));
    }
    // Decay ~ t^{-m-1}.
    for (int m = 1; m <= 3; ++m) {
        double r = greenKernel(m, 40.0) / greenKernel(m, 20.0);
        CHECK(std::abs(r) < 1.2 * std::pow(0.5, m + 1));
        CHECK(std::abs(r) > 0.8 * std::pow(0.5, m + 1));
    }
}

TEST_CASE("greenKernel log/polynomial split") {
    // greenKernel - Ptilde_m^0 * (log part of bM) is a polynomial of degree
    // <= m-1: fit on 2m nodes and check the residual elsewhere.
    for (int m = 1; m <= 3; ++m) {
        auto smooth = [&](double t) {
            return greenKernel(m, t) -
                   legendreTildeP(m, 0)(t) * bMLogCoefficient(m) *
                       std::log((t + 1) / (t - 1));
        };
        // Newton interpolation through m nodes (degree <= m-1).
        std::vector<double> xs, fs;
        for (int k = 0; k < m; ++k) {
            xs.push_back(1.5 + k);
            fs.push_back(smooth(xs.back()));
        }
        std::vector<double> dd = fs; // divided differences
        for (int j = 1; j < m; ++j)
            for (int i = m - 1; i >= j; --i)
                dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
        auto interp = [&](double t) {
            double acc = dd[m - 1];
            for (int i = m - 2; i >= 0; --i) acc = acc * (t - xs[i]) + dd[i];
            return acc;
        };
        for (double t : {1.7, 2.3, 3.1, 7.7}) {
            CHECK(smooth(t) == doctest::Approx(interp(t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("legendreQ recurrence vs Neumann integral and ODE") {
    CHECK(legendreQ(0, 2.0) == doctest::Approx(0.5 * std::log(3.0)));
    CHECK(legendreQ(1, 2.0) == doctest::Approx(std::log(3.0) - 1.0).epsilon(1e-12));
    for (int m = 0; m <= 3; ++m) {
        for (double t : {1.5, 2.0, 5.0}) {
            CHECK(legendreQ(m, t) ==
                  doctest::Approx(legendreQNeumann(m, t)).epsilon(1e-9));
        }
    }
    // ODE (1-t^2) Q'' - 2t Q' + m(m+1) Q = 0, via central differences.
    double h = 1e-4;
    for (int m = 1; m <= 3; ++m) {
        double t = 2.0;
        double q = legendreQ(m, t);
        double qp = (legendreQ(m, t + h) - legendreQ(m, t - h)) / (2 * h);
        double qpp = (legendreQ(m, t + h) - 2 * q + legendreQ(m, t - h)) / (h * h);
        double ode = (1 - t * t) * qpp - 2 * t * qp + m * (m + 1.0) * q;
        CHECK(std::abs(ode) < 1e-5);
    }
}
