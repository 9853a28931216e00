// Integral binary quadratic forms of negative discriminant at level N:
// CM points, the Gamma_0(N) action, class representatives, stabilizers,
// the lattice dictionary, and fast enumeration by hyperbolic height.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "merolift/geometry.hpp"

namespace merolift {

/// Q(X,Y) = A X^2 + B X Y + C Y^2 with integer coefficients.
struct QForm {
    long long A = 0, B = 0, C = 0;

    friend bool operator==(const QForm&, const QForm&) = default;
    friend auto operator<=>(const QForm&, const QForm&) = default;
};

/// Exact discriminant B^2 - 4AC.
long long discriminant(const QForm& q);

/// Q(z, 1) = A z^2 + B z + C.
Complex qEval(const QForm& q, const UhpPoint& z);
Complex qEval(const QForm& q, Complex z);

/// The invariant height Q_z = (A|z|^2 + B u + C)/v.  For positive-definite Q
/// this equals sqrt(|D|) * coshDist(z, cmPoint(Q)).
double qZ(const QForm& q, const UhpPoint& z);

/// The unique upper half-plane root of Q(z,1) = 0 (requires A > 0, D < 0):
/// (-B + i sqrt(|D|)) / (2A).
UhpPoint cmPoint(const QForm& q);

/// Gamma_0(N)-compatible action on forms, in the convention that makes
/// cmPoint(gamma . Q) = moebius(gamma, cmPoint(Q)):
///   (gamma . Q)(X, Y) = Q(a X - b Y, -c X + d Y)   for gamma = (a,b;c,d).
/// Requires gamma integral with determinant 1; level N | c is checked when
/// N > 0 is supplied.
QForm gamma0Act(const Mat2R& gamma, const QForm& q, long long N = 0);

/// A Gamma_0(N)-orbit decomposition of the forms with N | A, B == beta
/// (mod 2N) and fixed discriminant D.
struct ClassData {
    long long N = 1;
    long long beta = 0;
    long long D = -3;
    std::vector<QForm> reps;
    std::vector<int> stabilizerOrders;

    std::string toJson() const;
    static ClassData fromJson(const std::string& text);
};

/// Orbit representatives of the level-N, residue-beta forms of discriminant
/// D < 0 (positive definite only).  For N = 1 these are the classically
/// reduced forms |B| <= A <= C with sign normalization.
/// Throws ConfigError unless D == beta^2 (mod 4N).
ClassData classRepresentatives(long long N, long long beta, long long D);

/// Order of the stabilizer of Q inside Gamma_0(N) / {+-I} (1, 2 or 3).
int automorphOrder(const QForm& q, long long N);

/// The trace-zero lattice vector attached to Q at level N:
///   ( B/(2 sqrt N)   C/sqrt N  )
///   ( -A/sqrt N     -B/(2 sqrt N) )
/// with quadratic-space norm -2 det = D / (2N).
std::array<std::array<double, 2>, 2> latticeVector(const QForm& q, long long N);

/// All level-valid forms of discriminant D with qZ(Q, z) <= sqrt(|D|) * Tmax,
/// i.e. whose CM point lies within hyperbolic cosh-distance Tmax of z.
/// Exact finite set; the inner scan solves B^2 == D (mod 4A) so the cost is
/// proportional to the number of returned forms, not to the scan window.
/// Results are sorted by (A, B, C) for deterministic summation.
std::vector<QForm> enumerateByHeight(long long N, long long beta, long long D,
                                     const UhpPoint& z, double Tmax);

/// Brute-force oracle for enumerateByHeight: box enumeration over generous
/// coefficient ranges, filtered by the same height predicate.  Exponentially
/// slower; use only in tests with small Tmax.
std::vector<QForm> enumerateByHeightBox(long long N, long long beta,
                                        long long D, const UhpPoint& z,
                                        double Tmax, long long box);

} // namespace merolift
