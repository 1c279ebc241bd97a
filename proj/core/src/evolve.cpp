#include "oscillab/evolve.hpp"

#include <algorithm>
#include <cmath>

#include "oscillab/akchain.hpp"
#include "oscillab/errors.hpp"
#include "oscillab/sobolev.hpp"

namespace oscillab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGridCap = 32.0;

/// Reduce an angle into (-pi, pi].  The inputs here are small multiples of
/// already-reduced schedule phases, so no precision is lost.
double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

Mat2 rot(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, s, -s, c};
}

/// H^s norm of a grid state.  For s = 1 the spectral definition satisfies
/// ||psi||_{H^1}^2 = ||X psi||^2 + ||D psi||^2 exactly (the number operator
/// is X^2 + D^2), which evaluates by quadrature with no Hermite truncation:
/// strongly squeezed spike states carry H^1 mass beyond any fixed Hermite
/// cutoff and would otherwise fail the transform's tail check.
double sobolev_norm(const GridState& psi, double s, const AuxNorms& aux) {
    if (s == 1.0) return std::sqrt(aux.xs * aux.xs + aux.ds * aux.ds);
    return hs_norm_grid(psi, s);
}

ProbeSample sample_state(const GridState& psi, double t, double s) {
    ProbeSample p;
    p.t = t;
    p.l2_norm = psi.l2_norm();
    const AuxNorms aux = aux_norms(psi, s);
    p.xs = aux.xs;
    p.ds = aux.ds;
    p.hs_norm = sobolev_norm(psi, s, aux);
    return p;
}

} // namespace

RunRecord evolve_cocycle_lift(const QpSystem& sys, const GridState& psi0,
                              const std::vector<double>& probes, double dt,
                              double s) {
    if (dt <= 0) throw TypeMismatch("evolve_cocycle_lift: dt must be > 0");
    if (probes.empty())
        throw TypeMismatch("evolve_cocycle_lift: empty probe list");
    if (probes.front() < 0 || !std::is_sorted(probes.begin(), probes.end()))
        throw TypeMismatch(
            "evolve_cocycle_lift: probes must be sorted and nonnegative");

    RunRecord rec;
    rec.method = "cocycle_lift";
    rec.s = s;
    rec.probes = probes;
    rec.psi0_hs = sobolev_norm(psi0, s, aux_norms(psi0, s));
    rec.psi0_l2 = psi0.l2_norm();

    Mat2 Phi = Mat2::identity();
    double tcur = 0;
    GridState psi = psi0;
    for (double t : probes) {
        if (t > tcur) {
            // March the 2x2 cocycle forward once; each probe reuses the
            // accumulated fundamental matrix (Phi(t) = Phi(tcur..t) Phi(tcur)).
            Phi = integrate_cocycle(sys, tcur, t, dt) * Phi;
            tcur = t;
            psi = apply_meta(Phi, psi0, MetaPath::Fast);
        } else {
            psi = psi0;
        }
        rec.series.push_back(sample_state(psi, t, s));
        const double drift =
            std::fabs(rec.series.back().l2_norm - rec.psi0_l2) / rec.psi0_l2;
        rec.l2_drift = std::max(rec.l2_drift, drift);
    }
    rec.final_state = psi;
    return rec;
}

RunRecord evolve_magnus(const QpSystem& sys, const GridState& psi0,
                        double t_end, double dt, double s) {
    if (dt <= 0 || t_end < 0)
        throw TypeMismatch("evolve_magnus: dt > 0 and t_end >= 0 required");
    double sys_norm = mat_norm(sys.constant);
    if (!sys.pert.empty())
        sys_norm += majorant_norm(sys.pert, sys.pert.width);
    if (dt > 1e-2 / sys_norm)
        throw StepTooLarge("evolve_magnus: dt exceeds 1e-2 / ||sys||");

    RunRecord rec;
    rec.method = "magnus";
    rec.s = s;
    rec.psi0_hs = sobolev_norm(psi0, s, aux_norms(psi0, s));
    rec.psi0_l2 = psi0.l2_norm();

    GridState psi = psi0;
    rec.probes.push_back(0.0);
    rec.series.push_back(sample_state(psi, 0.0, s));
    if (t_end > 0) {
        const long long nsteps =
            std::max<long long>(1, (long long)std::ceil(t_end / dt));
        const double h = t_end / (double)nsteps;
        const long long stride = std::max<long long>(1, nsteps / 32);
        // The frozen steps are composed in SL(2,R) and applied to the state
        // one chunk at a time.  The metaplectic representation is a
        // homomorphism up to a global sign, so this is the same method as
        // one application per step; applying thousands of near-identity
        // operators in sequence, however, exponentially amplifies grid-
        // boundary spray until the transform's tail guard trips, while the
        // composed 2x2 product is exact.
        Mat2 chunk = Mat2::identity();
        long long in_chunk = 0;
        for (long long i = 0; i < nsteps; ++i) {
            // Freeze the coefficient matrix at the step midpoint; each
            // factor is the exact propagator of that constant quadratic
            // Hamiltonian.
            const Mat2 A = system_matrix(sys, ((double)i + 0.5) * h);
            chunk = expm(A, h) * chunk;
            ++in_chunk;
            const bool sample_due = (i + 1) % stride == 0 || i + 1 == nsteps;
            if (sample_due || mat_norm(chunk) > 8.0 || in_chunk >= 256) {
                psi = apply_meta(chunk, psi, MetaPath::Fast);
                chunk = Mat2::identity();
                in_chunk = 0;
            }
            if (sample_due) {
                const double t = (double)(i + 1) * h;
                rec.probes.push_back(t);
                rec.series.push_back(sample_state(psi, t, s));
                const double drift =
                    std::fabs(rec.series.back().l2_norm - rec.psi0_l2) /
                    rec.psi0_l2;
                rec.l2_drift = std::max(rec.l2_drift, drift);
            }
        }
    }
    rec.final_state = psi;
    return rec;
}

namespace {

/// U_j(m T_j) from the stored reduced phases: the rotation speeds are
/// <k_0+k_1> and <k_{n+1}>, whose phases at T_j sit in ret[j][0] and
/// ret[j][n]; an integer multiple m only scales the reduced phase.
Mat2 chain_matrix(const AkSchedule& sched, int j, int mult) {
    Mat2 M = rot(wrap_angle(mult * sched.ret[j][0]));
    for (int n = 1; n <= j - 1; ++n)
        M = M * dilation_factor(sched, n) *
            rot(wrap_angle(mult * sched.ret[j][n]));
    return M;
}

/// e^{m T_j L_j} in the z-parameterization: [[cos a, z^2 sin a],
/// [-z^{-2} sin a, cos a]] with a the reduced phase of <k_{j+1}> m T_j.
/// (z^2 = (phi+lam)/<k_{j+1}> and (phi-lam)/<k_{j+1}> = z^{-2}.)
Mat2 normal_flow(const AkSchedule& sched, int j, int mult) {
    const double a = wrap_angle(mult * sched.spin[j]);
    const double z2 = std::exp(2.0 * sched.z[j].lg);
    return {std::cos(a), z2 * std::sin(a), -std::sin(a) / z2, std::cos(a)};
}

bool is_ground_state(const GridState& psi) {
    if (psi.N < 16) return false;
    const GridState h0 = GridState::hermite(psi.N, 0);
    return phase_aligned_distance(psi, h0) <= 1e-8 * psi.l2_norm();
}

} // namespace

OscillationReport probe_oscillation(const AkSchedule& sched,
                                    const GridState& psi0, double s) {
    if (sched.depth() < 1)
        throw DepthExceeded("probe_oscillation: schedule depth must be >= 1");

    OscillationReport rep;
    rep.s = s;
    rep.gamma_psi0 = gamma_s(psi0, s);
    const double psi0_ds = aux_norms(psi0, s).ds;
    const bool gaussian_fallback = (s == 1.0) && is_ground_state(psi0);

    for (int j = 1; j <= sched.depth(); ++j) {
        OscillationLevel lv;
        lv.j = j;
        lv.T = sched.T[j];

        double z_log = 0; // ln prod z_n, n = 1..j-1
        for (int n = 1; n <= j - 1; ++n) z_log += sched.z[n].lg;
        const Mat2 U0inv = {std::exp(-z_log), 0, 0, std::exp(z_log)};

        const Mat2 U_T = chain_matrix(sched, j, 1);
        const Mat2 U_4T = chain_matrix(sched, j, 4);
        const Mat2 W_T = U_T * normal_flow(sched, j, 1) * U0inv;
        const Mat2 W_4T = U_4T * normal_flow(sched, j, 4) * U0inv;

        const bool on_grid = std::isfinite(mat_norm(W_T)) &&
                             mat_norm(W_T) <= kGridCap &&
                             mat_norm(W_4T) <= kGridCap &&
                             std::exp(std::fabs(z_log)) <= kGridCap;
        if (on_grid) {
            const GridState spike = apply_meta(W_T, psi0, MetaPath::Fast);
            const GridState ret = apply_meta(W_4T, psi0, MetaPath::Fast);
            lv.spike_hs = sobolev_norm(spike, s, aux_norms(spike, s));
            lv.return_hs = sobolev_norm(ret, s, aux_norms(ret, s));
            const GridState back = apply_meta(U0inv, psi0, MetaPath::Fast);
            lv.gamma_ratio = gamma_s(back, s) / rep.gamma_psi0;
        } else if (gaussian_fallback) {
            // Beyond the grid cap the image of the ground state is still a
            // Gaussian, with ||M(W) h_0||_{H^1}^2 = ||W||_F^2 / 2 exactly
            // (the quadratic form X^2 + D^2 transports by W^T W, and h_0
            // has <X^2> = <D^2> = 1/2, <XD+DX> = 0).
            lv.closed_form = true;
            lv.spike_hs = frob_norm(W_T) / std::sqrt(2.0);
            lv.return_hs = frob_norm(W_4T) / std::sqrt(2.0);
            // U_j^{-1}(0) dilates h_0 by 1/prod z_n: Gamma_1^2 = 1 + lam^4.
            const double g_back = std::sqrt(1.0 + std::exp(-4.0 * z_log));
            lv.gamma_ratio = g_back / rep.gamma_psi0;
        } else {
            throw NormCapExceeded(
                "probe_oscillation: dominant matrix exceeds the grid cap and "
                "the closed form needs psi0 = h_0, s = 1");
        }

        lv.spike_over_f_log =
            std::log(lv.spike_hs) - sched.f_spec.value(sched.T[j]).lg;
        lv.spike_constant_log =
            std::log(lv.spike_hs) -
            ((1.0 - 0.75 * sched.g_T[j]) * s * sched.T[j].lg +
             std::log(psi0_ds));

        lv.matrix_bound = mat_norm(W_4T);
        lv.matrix_bound_ok = lv.matrix_bound < 8.0;

        const double col1 = 1.25 * std::exp(z_log);
        const double col2 = 1.25 * std::exp(-z_log);
        lv.entrywise_max = std::max(
            std::max(std::fabs(U_4T.a11), std::fabs(U_4T.a21)) / col1,
            std::max(std::fabs(U_4T.a12), std::fabs(U_4T.a22)) / col2);
        lv.entrywise_ok = lv.entrywise_max < 1.0;

        const ConjugationChain chain = conjugation_chain(sched, j);
        if (!chain.tail.empty()) {
            const double tail_log =
                std::log(majorant_norm(chain.tail, chain.tail.width));
            lv.duhamel_fraction = std::exp(sched.T[j].lg + tail_log +
                                           2.0 * z_log -
                                           std::log(sigma_max(W_T)));
        }
        rep.levels.push_back(lv);
    }
    return rep;
}

EnvelopeResult envelope_check(const RunRecord& run, double beta,
                              double upsilon) {
    EnvelopeResult res;
    if (run.series.empty()) return res;
    double margin = std::numeric_limits<double>::infinity();
    const double base = std::log(2.0 * run.psi0_hs);
    for (const ProbeSample& p : run.series) {
        const double rhs = base + 4.0 * beta * upsilon * p.t;
        const double lhs =
            p.hs_norm > 0 ? std::log(p.hs_norm)
                          : -std::numeric_limits<double>::infinity();
        margin = std::min(margin, rhs - lhs);
    }
    res.margin = margin;
    res.pass = margin >= 0;
    return res;
}

UpperBoundReport upper_bound_probe(const std::vector<KamSnapshot>& kam_out,
                                   const RunRecord& run, double tau) {
    UpperBoundReport rep;
    for (const ProbeSample& p : run.series) {
        if (p.t <= 0) continue;
        rep.times.push_back(p.t);
        rep.ratios.push_back(p.hs_norm / std::pow(p.t, run.s));
    }
    for (double m : run.markers) {
        for (size_t i = 0; i < rep.times.size(); ++i) {
            if (std::fabs(rep.times[i] - m) <= 1e-9 * std::max(1.0, m)) {
                rep.marker_times.push_back(rep.times[i]);
                rep.marker_ratios.push_back(rep.ratios[i]);
                break;
            }
        }
    }
    rep.markers_decreasing = true;
    for (size_t i = 1; i < rep.marker_ratios.size(); ++i)
        if (rep.marker_ratios[i] >= rep.marker_ratios[i - 1])
            rep.markers_decreasing = false;
    for (const KamSnapshot& snap : kam_out) {
        const double abs_ln_eps = std::fabs(snap.eps_log);
        rep.snapshot_bound_logs.push_back(
            (4.0 * run.s + 4.0) * tau * std::log(abs_ln_eps) +
            (run.s / 16.0) * snap.eps_log);
    }
    return rep;
}

} // namespace oscillab
