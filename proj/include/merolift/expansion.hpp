// Laurent data of meromorphic forms in the disc coordinate zeta = A_w(z):
// analytic per-form expansion, Cauchy-contour extraction oracle, the psi
// polynomial, the c-coefficient convolution, and the alpha_{p,0} Taylor
// coefficients of the radial kernel.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "merolift/lift.hpp"

namespace merolift {

/// Finitely truncated two-sided series sum_n coeffs[n - nMin] * zeta^n,
/// together with the chart radius on which the window is valid (distance in
/// the chart to the nearest singularity other than the centre).
struct LaurentSeries {
    int nMin = 0;
    std::vector<Complex> coeffs;
    double convergenceRadius = 1.0;

    int nMax() const { return nMin + static_cast<int>(coeffs.size()) - 1; }

    /// Coefficient a_n; zero outside the stored window.
    Complex at(int n) const;

    /// {"nMin":..,"convergenceRadius":..,"coeffs":[re0,im0,re1,im1,...]}.
    std::string toJson() const;
    static LaurentSeries fromJson(const std::string& text);
};

/// Laurent coefficients a_n(w), n in [nMin, nMax], of the weight-(2m+2)
/// meromorphic form of `spec` around w, in the convention
///   f(z) = (1 - zeta)^{2m+2} / (2 i t)^{m+1} * sum_n a_n(w) zeta^n,
/// zeta = awMap(w, z), t = Im w.  Each lattice term A^{-(m+1)} psi_Q^{-(m+1)}
/// expands as a product of two binomial series; a form whose root equals w
/// contributes the pole window n >= -(m+1).  The lattice sum is truncated so
/// the coefficient tail, measured at chart radius convergenceRadius / 2, is
/// below spec.tol (throws NonConvergent if that cannot be reached).
LaurentSeries laurentOfF(const LiftSpec& spec, const UhpPoint& w, int nMax);

/// The same per-form expansion applied to a frozen form set (no truncation
/// logic): the exact Laurent data of pref * sum_Q s_Q Q(z,1)^{-(m+1)} over
/// exactly the given forms.  The per-form identity underlying laurentOfF
/// holds termwise, so this decouples expansion-vs-contour comparisons from
/// lattice truncation.
LaurentSeries laurentOnSet(const LiftSpec& spec,
                           const std::vector<WeightedForm>& forms,
                           const UhpPoint& w, int nMax);

/// Cauchy coefficient extraction on the chart circle |zeta| = rho: samples
/// evaluator(awInverse(w, rho e^{i phi})) * (2it)^{m+1} / (1-zeta)^{2m+2}
/// on >= 4 (nMax - nMin + 1) equispaced angles and discrete-Fourier-inverts.
/// Runs at rho and rho/2 and throws AliasingDetected when the two windows
/// disagree beyond crossTol of the window scale (plus a roundoff floor,
/// since sample noise is amplified by r^{-n} per coefficient).  The default
/// budget assumes a near-exact evaluator; pass a looser crossTol when the
/// evaluator itself carries truncation error, since that error is amplified
/// differently at the two radii.  The evaluator must be analytic on the
/// closed annulus rho/2 <= |zeta| <= rho.
LaurentSeries laurentContourOracle(
    const std::function<Complex(const UhpPoint&)>& evaluator, int m,
    const UhpPoint& w, double rho, int nMin, int nMax,
    double crossTol = 1e-8);

/// The degree-2 polynomial (ascending coefficients, size 3)
///   psi(w, w0, zeta) = (w - w0 - (wbar - w0) zeta)(w - w0bar - (wbar - w0bar) zeta),
/// with psi(0) = (w - w0)(w - w0bar) != 0.  Rejects w == w0.
std::vector<Complex> psiPoly(const UhpPoint& w, const UhpPoint& w0);

/// The series |r|^{m/2} psi(w, w0, zeta)^m / (2 i t0 t)^m * sum a_n zeta^n:
/// full convolution window [nMin, nMax + 2m] (entries above the input nMax
/// treat the missing a_n as zero).  Rejects w == w0.
LaurentSeries cCoeffs(int m, double r, const LaurentSeries& aSeries,
                      const UhpPoint& w, const UhpPoint& w0);

/// Taylor coefficient alpha_{p,0} of the composed radial kernel
///   zeta |-> B_m(coshDist(w, w0) - slope * zeta),
///   slope = (wbar - w0)(wbar - w0bar) / (2 t0 t):
/// equals (-1)^p B_m^(p)(coshDist(w, w0)) (wbar-w0)^p (wbar-w0bar)^p
///        / (p! (2 t0 t)^p).
/// Rejects w == w0.
Complex alphaP0(int m, int p, const UhpPoint& w, const UhpPoint& w0);

/// Coefficient transport factor (j(gamma, wbar)/j(gamma, w))^{m+1+n}:
/// a_n(w) = a_n(gamma w) * coefficientTransport(gamma, w, m, n).
Complex coefficientTransport(const Mat2R& gamma, const UhpPoint& w, int m,
                             int n);

} // namespace merolift
