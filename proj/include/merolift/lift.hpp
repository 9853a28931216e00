// Evaluation of the meromorphic form built from quadratic forms, its
// incomplete-beta lift, the 2m+1 lowering-operator components (including
// the real middle component with the Green's-function normalization), and
// the associated antiholomorphic completion.
#pragma once

#include <vector>

#include "merolift/errors.hpp"
#include "merolift/geometry.hpp"
#include "merolift/qforms.hpp"
#include "merolift/specfun.hpp"

namespace merolift {

/// Parameters of a lift: order m >= 1, level N, residue class beta mod 2N,
/// negative discriminant D with D == beta^2 (mod 4N), and a target absolute
/// truncation error for the lattice sums.
struct LiftSpec {
    int m;
    long long N;
    long long beta;
    long long D;
    double tol;

    LiftSpec(int m_, long long N_, long long beta_, long long D_,
             double tol_ = 1e-8);

    /// True when the +beta and -beta residue families are the same set
    /// (2*beta == 0 mod 2N); combined with odd m the two signed copies
    /// cancel and every evaluation is identically zero.
    bool familiesCoincide() const;
    bool vanishes() const;

    double r() const { return static_cast<double>(D) / (4.0 * N); }
};

/// A truncated-evaluation result: value, number of lattice terms summed,
/// and a rigorous bound on the discarded tail.
struct EvalResult {
    Complex value{0.0, 0.0};
    long long termsUsed = 0;
    double tailBound = 0.0;
};

/// A quadratic form together with its signed family weight
/// (+1 for the beta family, (-1)^m for the -beta family; 1 + (-1)^m on a
/// single copy when the families coincide).
struct WeightedForm {
    QForm q;
    double weight;
};

/// All contributing forms with cosh-distance height <= Tmax from z, in a
/// deterministic order (beta family sorted by (A,B,C), then -beta family).
std::vector<WeightedForm> contributingForms(const LiftSpec& spec,
                                            const UhpPoint& z, double Tmax);

/// Smallest cosh-radius Tmax such that the per-term envelope times a
/// doubled empirical lattice-point count bounds the tail by spec.tol.
double truncationBound(const LiftSpec& spec, const UhpPoint& z);

/// The weight-(2m+2) meromorphic form: |D|^{(m+1)/2}/(2 N^{m/2}) times the
/// signed sum of Q(z,1)^{-(m+1)} over both residue families.
EvalResult fMero(const LiftSpec& spec, const UhpPoint& z);

/// The lift m!/(8 sqrt(N) pi i)^m * sum_Q Q(zbar,1)^m / v^{2m} * B_m kernel.
EvalResult phiLift(const LiftSpec& spec, const UhpPoint& z);

/// Component p in 0..2m of the vector-valued frame:
/// (4 v^2 d/dzbar)^p applied to the lift, divided by p!.  Components with
/// p >= m come from the per-term lowering-operator closed form with index
/// j = 2m - p; components with p < m use the reflection
/// comp_p = conj(comp_{2m-p}) / (4 v^2)^{m-p}, anchored at
/// comp_0 = phiLift and comp_{2m} = (4 v^2)^m * conj(phiLift).  With this
/// normalization the raising operator (d/dz + k/(2iv) at weight k = 2m-2p)
/// satisfies the uniform ladder
///   delta_{2m-2p} comp_p = (2m-p+1) comp_{p-1}  for all p in 1..2m.
EvalResult liftComponent(const LiftSpec& spec, int p, const UhpPoint& z);

/// The single-form summand of liftComponent (prefactor included, family
/// weight excluded); exposed so the large-height decay structure of the
/// per-form terms can be inspected directly.
Complex componentSummand(const LiftSpec& spec, int p, const QForm& q,
                         const UhpPoint& z);

/// The weight-raising image of the lift (a multiple of fMero); evaluated
/// from its own closed-form lattice sum.  Equals the weight-2m raising
/// operator applied to phiLift in the arithmetic normalization, i.e.
/// (1/2 pi i)(d/dz + m/(iv)) phiLift.
EvalResult deltaPhi(const LiftSpec& spec, const UhpPoint& z);

/// The constant c with deltaPhi == c * fMero, exposed for the dual
/// closed-form agreement checks.
Complex deltaPhiMeroConstant(const LiftSpec& spec);

/// The real middle component divided by greenNormalization(spec): a
/// weight-0 eigenfunction of v^2 * (d_uu + d_vv) with eigenvalue m(m+1)
/// and logarithmic singularity ln|z-w|^2 (coefficient exactly 1) at each
/// contributing CM point w.
double greenValue(const LiftSpec& spec, const UhpPoint& z);

/// The constant dividing the middle component in greenValue.
double greenNormalization(const LiftSpec& spec);

/// The antiholomorphic completion: signed sum of Q(z,1)^m/(2 (N|D|)^{m/2})
/// times the theta integral (= half the incomplete-beta kernel).  Equals
/// liftComponent(2m) divided by 4 m! |D|^{m/2} / (-4 pi i)^m.
EvalResult mathcalF(const LiftSpec& spec, const UhpPoint& z);

/// The constant c with liftComponent(2m) == c * mathcalF.
Complex mathcalFComponentConstant(const LiftSpec& spec);

/// Sesquilinear pairing density of two component vectors of length 2m+1:
/// sum_p (-4)^{m-p} p! (2m-p)!/(2m)! * f_p * conj(g_p) * v^{2m-2p}.
Complex vvPairingDensity(const std::vector<Complex>& fComps,
                         const std::vector<Complex>& gComps, double v);

} // namespace merolift
