/// \file evolve.hpp
/// \brief State evolution under quasi-periodic quadratic Hamiltonians and
/// the oscillation probes: cocycle-lift and Magnus-type propagation with
/// norm series, the spike-and-return diagnostics at the schedule's aligned
/// times, the exponential growth envelope, and the t^s decay probe.
///
/// The aligned times T_j of a deep schedule reach ~1e85, far beyond any
/// range where binary64 can reduce an angle mod 2pi.  Every probe at T_j or
/// 4T_j therefore evaluates the closed-form matrices from the schedule's
/// *stored* reduced phases (AkSchedule::spin / ret), never by multiplying
/// a rotation speed by t.

#pragma once

#include <string>
#include <vector>

#include "oscillab/grid.hpp"
#include "oscillab/kam.hpp"
#include "oscillab/logreal.hpp"
#include "oscillab/qp.hpp"
#include "oscillab/schedule.hpp"

namespace oscillab {

/// One probe of a run: time and the norm family of the state there.
struct ProbeSample {
    double t = 0;
    double hs_norm = 0; ///< spectral H^s norm
    double l2_norm = 0;
    double xs = 0;      ///< || |x|^s psi ||
    double ds = 0;      ///< || |xi|^s F psi ||
};

/// Record of one evolution run.  l2_drift is the largest relative deviation
/// of l2_norm from its initial value along the run; unitary evolution keeps
/// it below 1e-6.
struct RunRecord {
    std::string method; ///< "cocycle_lift" | "magnus"
    std::string schedule_ref; ///< caller-set provenance label (may be empty)
    double s = 0;
    std::vector<double> probes;
    std::vector<ProbeSample> series;
    double psi0_hs = 0;
    double psi0_l2 = 0;
    /// Envelope data (caller-filled: beta = sup-norm bound of the
    /// coefficient matrix, upsilon from estimate_upsilon).
    double beta = 0;
    double upsilon = 0;
    /// Distinguished times (the 4 T_j present in `probes`) for the decay
    /// probe's monotone subsequence.
    std::vector<double> markers;
    double l2_drift = 0;
    GridState final_state; ///< state at the last probe / at t_end
};

/// Evolve by the exact lift psi(t) = M(Phi(t)) psi0 with Phi the classical
/// fundamental matrix: the cocycle is marched once through the sorted probe
/// list (RK4, step dt), and each probe applies a single metaplectic
/// operator to psi0.  Throws StepTooLarge (via integrate_cocycle),
/// TailEscape / NormCapExceeded (via apply_meta), and TypeMismatch when the
/// probe list is unsorted / negative or dt <= 0.
RunRecord evolve_cocycle_lift(const QpSystem& sys, const GridState& psi0,
                              const std::vector<double>& probes, double dt,
                              double s);

/// Independent cross-check integrator: midpoint-frozen stepping, each step
/// contributing the exact propagator of the frozen quadratic Hamiltonian.
/// The per-step factors are composed in SL(2,R) and applied to the state in
/// bounded chunks (the representation is a homomorphism up to a global
/// sign, so the evolution is identical to one application per step, without
/// accumulating per-application grid noise).  First order in dt for
/// time-dependent coefficients.
/// Norm samples are recorded at ~32 evenly spaced times plus t_end.
/// Requires dt <= 1e-2 / ||sys|| (constant norm + perturbation majorant);
/// throws StepTooLarge otherwise.
RunRecord evolve_magnus(const QpSystem& sys, const GridState& psi0,
                        double t_end, double dt, double s);

/// Per-level oscillation diagnostics at the aligned times.
struct OscillationLevel {
    int j = 0;
    LogReal T;              ///< T_j
    double spike_hs = 0;    ///< ||psi(T_j)||_{H^s}
    double return_hs = 0;   ///< ||psi(4T_j)||_{H^s}
    /// True when the dominant-part matrix exceeds the grid cap and the
    /// norms come from the Gaussian closed form (requires psi0 = ground
    /// state and s = 1) instead of an actual metaplectic application.
    bool closed_form = false;
    double spike_over_f_log = 0;  ///< ln( spike_hs / f(T_j) )
    /// ln( spike_hs / (T_j^{(1 - (3/4) g(T_j)) s} ||D^s psi0||) ): the
    /// measured constant of the spike lower bound, reported raw.
    double spike_constant_log = 0;
    double matrix_bound = 0;      ///< ||U_j(4T_j) e^{4T_j L_j} U_j^{-1}(0)||
    bool matrix_bound_ok = false; ///< matrix_bound < 8
    /// max over entries of |U_j(4T_j)_{ab}| / ((5/4) Zprod^{+-1}), where
    /// Zprod = prod z_n and the exponent follows the column (+ for the
    /// first column, - for the second).
    double entrywise_max = 0;
    bool entrywise_ok = false;    ///< entrywise_max < 1
    /// Crude surrogate for the integral-term fraction of the Duhamel
    /// split: exp(ln T_j + ln ||tail||_r + 2 ln Zprod - ln sigma_max of
    /// the dominant matrix); 0 when the tail is empty.
    double duhamel_fraction = 0;
    double gamma_ratio = 0; ///< Gamma_s(U_j^{-1}(0) psi0) / Gamma_s(psi0)
};

struct OscillationReport {
    double s = 0;
    double gamma_psi0 = 0;
    std::vector<OscillationLevel> levels;
};

/// Evaluate the spike-and-return diagnostics for every level 1 <= j <=
/// depth.  The dominant linear part U_j(t) e^{t L_j} U_j^{-1}(0) is formed
/// as a single 2x2 matrix from the stored reduced phases, then applied by
/// one metaplectic operator when its norm is within the grid cap; beyond
/// the cap the Gaussian closed form ||M(W) h_0||_{H^1} = ||W||_F / sqrt(2)
/// takes over (ground state, s = 1 only -- NormCapExceeded otherwise).
/// Throws DepthExceeded when the schedule has depth 0.
OscillationReport probe_oscillation(const AkSchedule& sched,
                                    const GridState& psi0, double s);

struct EnvelopeResult {
    bool pass = false;
    /// min over probes of [ln(2 psi0_hs) + 4 beta upsilon t - ln hs(t)]
    /// (positive = bounded by the envelope everywhere).
    double margin = 0;
};

/// Check the exponential a-priori envelope hs(t) <= 2 e^{4 beta upsilon t}
/// hs(0) at every probe of the run.
EnvelopeResult envelope_check(const RunRecord& run, double beta,
                              double upsilon);

struct UpperBoundReport {
    std::vector<double> times;  ///< positive-time probes
    std::vector<double> ratios; ///< hs(t) / t^s
    /// Ratios at the run's marker times (the 4 T_j subsequence).
    std::vector<double> marker_times, marker_ratios;
    bool markers_decreasing = false; ///< strict decay along the markers
    /// Per reduction snapshot: ln( |ln eps_j|^{(4s+4) tau} eps_j^{s/16} ),
    /// the decay prefactor of the norm bound active on the j-th time
    /// window (reported, not asserted).
    std::vector<double> snapshot_bound_logs;
};

/// Desk-scale surrogate for the o(t^s) upper bound: the ratio hs(t)/t^s
/// along the run, its restriction to the marker subsequence, and the
/// per-snapshot bound prefactors from an almost-reducibility run.
UpperBoundReport upper_bound_probe(const std::vector<KamSnapshot>& kam_out,
                                   const RunRecord& run, double tau = 2.0);

} // namespace oscillab
