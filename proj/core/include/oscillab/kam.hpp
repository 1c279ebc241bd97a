/// \file kam.hpp
/// \brief Numerical almost-reducibility iteration for (omega, J + P):
/// resonance scanning, non-resonant homological steps, resonant rotation
/// renormalization, and conjugation tracking.
///
/// The step is the constructive skeleton of the classical scheme: a
/// first-order homological solve in the eigenbasis of the constant part,
/// exponentiated and applied *exactly* (truncated matrix exponential series
/// on an internal general-matrix trig polynomial), so the quadratic
/// remainder is computed, not estimated.  Contraction is measured per step;
/// nothing is proven.

#pragma once

#include <string>
#include <vector>

#include "oscillab/qp.hpp"
#include "oscillab/sl2.hpp"

namespace oscillab {

/// One factor of an accumulated conjugation: exp of a trig polynomial,
/// a constant normalizer, or a half-angle rotation (the only 2T^d-periodic
/// ingredient).
struct ConjFactor {
    enum class Kind { ExpPoly, Constant, HalfRotation };
    Kind kind = Kind::Constant;
    TrigPolySl2 Z; ///< ExpPoly: the exponent
    Mat2 C = Mat2::identity(); ///< Constant factor
    KVec k;        ///< HalfRotation: R_{<k, omega t>/2}

    Mat2 value(const FrequencyData& freq, double t) const;
};

/// Ordered product of conjugation factors evaluated at time t.
Mat2 conj_value(const std::vector<ConjFactor>& factors,
                const FrequencyData& freq, double t);

/// One line of the run log: {l, kind, k_res, normA, normF_log, r_l, N_l}.
struct KamHistoryEntry {
    int l = 0;
    std::string kind;        ///< "nonresonant" | "resonant"
    KVec k_res;              ///< resonance site (zero if non-resonant)
    double normA = 0;        ///< ||A_l||
    double normF_log = 0;    ///< ln majorant of F_l at r_l
    double r_l = 0;
    double N_l = 0;          ///< truncation range 2|ln eps_l|/(r_l - r_{l+1})
};

/// Immutable iteration state.
struct KamState {
    FrequencyData freq;
    Mat2 A;          ///< current constant part A_l (traceless)
    TrigPolySl2 F;   ///< current perturbation F_l, majorant <= eps
    double eps = 0;  ///< current smallness bound
    double r = 0;    ///< current width r_l
    double r0 = 0;   ///< initial width (sets the shrink ladder
                     ///< r_{l+1} = r_l - r0 / 2^{l+2})
    int l = 0;       ///< step index
    /// Resonance threshold; 0 means the default eps^{1/15}.
    double res_threshold = 0;
    std::vector<ConjFactor> conj;        ///< accumulated conjugation
    std::vector<KamHistoryEntry> history;
};

/// Fresh state for (omega, constant + pert): eps from the measured
/// majorant, r from the series width.
KamState initial_state(const QpSystem& sys);

/// All k with 0 < |k|_1 <= N and |2 xi - <k>| < threshold, sorted by
/// violation depth (deepest first, then lexicographic for determinism).
std::vector<KVec> resonance_scan(double xi, const FrequencyData& freq, int N,
                                 double threshold);

struct KamStepResult {
    std::vector<ConjFactor> Y; ///< this step's transformation factors
    KamState state;            ///< the new state (Y already appended)
};

/// One step.  Non-resonant branch: truncate F at N_l, solve the first-order
/// homological equation mode-wise in the eigenbasis of A (divisors i<k>,
/// i(<k> -+ 2 xi)), absorb the average into A, and compute the new
/// perturbation exactly through the truncated exponential.  Resonant branch
/// (some active mode within threshold of 2 xi): normalize A by C_A, solve
/// the non-resonant components, shift the resonant mode to zero frequency
/// by the half-angle rotation, and absorb it into the (now small) constant
/// part.  Resonance detection runs over the *active support* of the
/// truncated perturbation: with binary64-scale budgets an exhaustive
/// |k| <= N_l scan is resonant at every step and the skeleton could never
/// contract.  Throws SmallDivisorBlowup (divisor below 1e-14 outside the
/// declared resonant set) and NotElliptic (hyperbolic constant part).
KamStepResult kam_step(const KamState& state);

/// Snapshot taken just in front of each resonant step: the normal form
/// L_j, the perturbation bound, the accumulated transformation, and the
/// growth-envelope comparison sup_t ||U_j|| <= |ln eps_j|^{2 tau}.
struct KamSnapshot {
    int l = 0;                 ///< step index of the resonant step
    Mat2 L;                    ///< A at the snapshot
    double P_norm_log = 0;     ///< ln majorant of the perturbation
    double eps_log = 0;        ///< ln eps_j
    std::vector<ConjFactor> U; ///< accumulated conjugation before the step
    double sup_U = 0;          ///< sampled sup_t ||U(t)||
    double envelope = 0;       ///< |ln eps_j|^{2 tau}
    bool envelope_ok = false;  ///< sup_U <= envelope
};

/// Iterate kam_step until the perturbation reaches the floor (1e-13), the
/// step budget runs out, or three consecutive steps fail to contract
/// (Stalled).  Returns the resonant-step snapshots; a run whose
/// perturbation vanishes without any resonance yields one terminal
/// snapshot.
std::vector<KamSnapshot> almost_reduce(const QpSystem& sys, int max_steps);

} // namespace oscillab
