// Regularized pairing of two meromorphic forms of weight 2m+2: the finite
// residue formula over pole orbits (two independent per-pole residue
// methods) and the brute-force regularization oracle that integrates the
// sesquilinear density over the level-1 modular surface with guard-disc
// constant terms.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "merolift/expansion.hpp"

namespace merolift {

/// One lift-orbit entry of the assembled pairing: the orbit representative
/// (a quadratic form), its CM point w0, the orbit-summed inner residue
/// (family multiplicity included), the family sign and the stabilizer order.
struct PoleContribution {
    QForm orbitRep;
    UhpPoint pole;
    Complex residue{0.0, 0.0};
    int sign = 1;
    int stabOrder = 1;
};

enum class PairingMethod { residueFormula, oracle };

struct PairingResult {
    Complex value{0.0, 0.0};
    std::vector<PoleContribution> perPoleBreakdown;
    PairingMethod method = PairingMethod::residueFormula;
    double epsilon = 0.0;
    double errorBudget = 0.0;

    std::string toJson() const;
};

/// The global assembly constant m! / (2i (-8 pi i)^m).  The pairing value is
/// reported in the first-slot convention (lift-derivative against conj(g),
/// matching the oracle's integrand), i.e. the conjugate of the residue-side
/// assembly; see regularizedPairing.
Complex pairingConstant(int m);

/// Residue at the g-pole w of the composed disc kernel, from explicit
/// Laurent data `a` of g around w (chart convention of LaurentSeries):
///   sum_{p >= 0} c_{-1-p} * alpha_{p,0},
/// with c = cCoeffs(m, r, a, w, w0) and alpha_{p,0} = alphaP0(m, p, w, w0).
/// Only the principal part of `a` (n <= -1) enters.  Rejects w == w0.
Complex residueFromLaurent(const LaurentSeries& a, const UhpPoint& w,
                           const UhpPoint& w0, int m, double r);

/// residueFromLaurent with the principal Laurent data taken analytically
/// from the unique form of gSpec rooted at w (exact: the other lattice
/// terms are analytic at w and contribute nothing to the principal part).
/// Throws ConfigError if no form of gSpec has its CM point at w.
Complex residueAtPole(const LiftSpec& gSpec, const UhpPoint& w,
                      const UhpPoint& w0, int m, double r);

/// Independent contour method: trapezoid residue of
///   Psi(zeta) = |r|^{m/2} * [g in the w-chart] * psi(w,w0,zeta)^m /
///               (2 i t0 t)^m * B_m(coshDist(w,w0) - slope * zeta),
///   slope = (wbar - w0)(wbar - w0bar) / (2 t0 t),
/// on >= 512 nodes at radii rho and rho/2 (AliasingDetected on mismatch);
/// the chart factor is g(awInverse(w, zeta)) (2it)^{m+1} / (1-zeta)^{2m+2}.
/// DomainViolation when the B_m argument leaves Re > 1 (guaranteed for
/// rho < |awMap(w, w0)|); the evaluator must be analytic on the closed
/// annulus rho/2 <= |zeta| <= rho.
Complex residueContour(const std::function<Complex(const UhpPoint&)>& g,
                       const UhpPoint& w, const UhpPoint& w0, int m, double r,
                       double rho);

/// residueContour with g = the meromorphic form of gSpec and the radius
/// chosen automatically below min(|awMap(w, w0)|, chart pole gap of g).
Complex residueContour(const LiftSpec& gSpec, const UhpPoint& w,
                       const UhpPoint& w0, int m, double r);

struct PairingOptions {
    /// Relative target for the truncated sum over each g-pole orbit (the
    /// per-orbit tail decays like T^{-m} in the cosh cut-off T).
    double relTol = 1e-9;
    double initialRadius = 64.0;
    double radiusCap = 2.0e6;
    /// Optional replacement orbit representatives for the lift side (tests
    /// assert invariance under Gamma_0(N)-translation of representatives).
    std::vector<QForm> plusReps;
    std::vector<QForm> minusReps;
};

/// The finite residue formula: conj( C(m) * sum_{j,+-} sign_j / |Gamma_j| *
/// sum_{poles w of g, orbit(w) != orbit(w0j)} residue(w, w0j) ), the inner
/// sum running over the full pole set of g truncated at an adaptively grown
/// cosh radius (geometric criterion, hence exactly representative-
/// invariant).  The coincident orbit is skipped (its disc constant term
/// vanishes).  ConfigError on mismatched m or N.
PairingResult regularizedPairing(const LiftSpec& gSpec,
                                 const LiftSpec& liftSpec,
                                 const PairingOptions& opts = {});

struct OracleParams {
    double Y = 8.0;          ///< cusp truncation height of the exterior
    double rOut = 0.10;      ///< chart radius of the excised guard discs
    double quadTol = 2e-7;   ///< absolute quadrature budget (exterior+annuli)
    double evalTol = 1e-6;   ///< absolute truncation target of the frozen sums
    int angularNodes = 96;   ///< trapezoid nodes for annulus angles
    int laurentNMax = 14;    ///< upper Laurent window for the disc series
    bool crossCheck = true;  ///< re-run disc terms at eps/2 and compare
    /// Test seam: replaces the integrand density h(z) (default
    /// deltaPhi_lift(z) * conj(fMero_g(z)) * v^{2m}, integrated du dv).
    std::function<Complex(const UhpPoint&)> integrandOverride;
};

/// Brute-force regularization oracle at level 1: exterior quadrature over
/// the fundamental domain minus the guard discs of every singular orbit,
/// plus, per orbit, 1/ell times (numeric chart annulus eps..rOut + the
/// analytic constant term of the eps-disc from the Laurent data).  The
/// exterior is cached, so repeated value(eps) calls only redo disc terms.
class RegularizationOracle {
public:
    RegularizationOracle(const LiftSpec& gSpec, const LiftSpec& liftSpec,
                         const OracleParams& params = {});
    ~RegularizationOracle();

    /// Full oracle value; EpsilonInconsistent on invalid guard geometry or
    /// a failed eps/2 cross-check.
    Complex value(double eps);

    Complex exterior();
    int orbitCount() const;
    const UhpPoint& orbitPoint(int k) const;
    int orbitOrder(int k) const;
    /// Numeric chart-annulus integral rIn <= |zeta| <= rOutAnn around orbit
    /// k (no 1/ell factor).
    Complex annulus(int k, double rIn, double rOutAnn);
    /// Analytic constant term of the eps-disc around orbit k (no 1/ell).
    Complex discCT(int k, double eps) const;
    double errorBudget() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot wrapper around RegularizationOracle.
Complex regularizationOracle(const LiftSpec& gSpec, const LiftSpec& liftSpec,
                             double eps, const OracleParams& params = {});

/// The disc constant term of the collapsed chart density
///   (1/4^m) F(zeta) conj(G(zeta)) (1-|zeta|^2)^{2m} dxi deta:
///   (2 pi / 4^m) sum_{j=0}^{2m} C(2m,j)(-1)^j sum_n aF_n conj(aG_n)
///     * CT_{s=0} eps^{s+k}/(s+k),  k = 2n+2j+2
/// with CT = eps^k/k for k != 0 and ln(eps) for k = 0.
Complex discConstantTerm(const LaurentSeries& aF, const LaurentSeries& aG,
                         int m, double eps);

/// Constant term, at s = 0, of the radial factor of the lift's own guard
/// disc, s * int_0^eps B_m((1+rho^2)/(1-rho^2)) rho^{s-1} drho, assembled
/// by the same CT rules:
///   B_m((1+eps^2)/(1-eps^2)) + sum_{l != m} c_l eps^{2l-2m}/(2l-2m)
///     + c_m ln(eps),   c_l = 2^{1-2m} C(2m,l) (-1)^l.
/// Vanishes identically (the pair l <-> 2m-l cancellation); exposed so the
/// vanishing can be asserted numerically against the size of its terms.
double liftPoleConstantTerm(int m, double eps);

/// Scale of the individual terms entering liftPoleConstantTerm (for
/// relative smallness assertions).
double liftPoleConstantTermScale(int m, double eps);

} // namespace merolift
