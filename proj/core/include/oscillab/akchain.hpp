/// \file akchain.hpp
/// \brief Leading perturbation terms, the assembled quasi-periodic
/// perturbation P, and the conjugation chain (U_j, L_j, tail) built on top
/// of a schedule.
///
/// The assembled series is finite: a depth-D schedule carries the dilation
/// parameters phi_1..phi_D, so the terms F_1..F_D exist and everything
/// beyond is truncated.  With that truncation the chain identities are
/// exact algebraic statements, and the conjugation residual of U_j between
/// (omega, J + P) and (omega, L_j + tail) vanishes to roundoff.

#pragma once

#include "oscillab/qp.hpp"
#include "oscillab/schedule.hpp"
#include "oscillab/sl2.hpp"

namespace oscillab {

/// The chain at level j: the closed-form transformation U_j(t), the constant
/// normal form L_j, and the residual perturbation P_{j+1} truncated at the
/// schedule depth.
struct ConjugationChain {
    int depth = 1;   ///< j
    TimeChain U;     ///< U_1(t) = R_{<k0+k1> t}; deeper levels append
                     ///< (Z_n, R_{<k_{n+1}> t}) factor pairs
    Mat2 L;          ///< [[0, phi_j + lam_j], [-(phi_j - lam_j), 0]]
    TrigPolySl2 tail; ///< P_{j+1} = F_{j+1} + deeper chain-conjugated terms
};

/// The diagonal dilation Z_n = diag(z_n, 1/z_n).
Mat2 dilation_factor(const AkSchedule& sched, int n);

/// F_j as an exact trig polynomial.  F_0 is the constant (<k0+k1> - 1) J
/// (the rotation conjugation in its defining formula commutes with J);
/// F_1 = phi_1 J + lam_1 (cos(2<k_1,.>) H + sin(2<k_1,.>) E); for j >= 2
/// the same two-mode form at k_j is conjugated by Z_{j-1}.
/// Throws DepthExceeded when j exceeds the schedule depth, and
/// PrecisionExhausted when k_j has no 64-bit representation.
TrigPolySl2 leading_term(const AkSchedule& sched, int j);

/// The finite sum P = F_0 + R_{<k0,.>} F_1 R^{-1} + R_{<k0+k1,.>} F_2 R^{-1}
/// + chain-conjugated deeper terms, truncated at min(J + 1, depth).
/// Throws NormBudgetExceeded when majorant_norm(P, r) >= sched.eps.
TrigPolySl2 assemble_perturbation(const AkSchedule& sched, int J);

/// The chain at level 1 <= j <= depth.  conjugation_residual of the result
/// against (omega, J + P) and (omega, L + tail) is roundoff-small at every
/// t; at depth 1 the tail is exactly empty.
ConjugationChain conjugation_chain(const AkSchedule& sched, int j);

} // namespace oscillab
