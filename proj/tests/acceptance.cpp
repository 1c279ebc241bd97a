// Acceptance suite: ten end-to-end criteria, one pass/fail line each.
//
// Each criterion runs in isolation (exceptions are failures, not aborts)
// and prints exactly one line; the process exit code is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oscillab/akchain.hpp"
#include "oscillab/errors.hpp"
#include "oscillab/evolve.hpp"
#include "oscillab/grid.hpp"
#include "oscillab/kam.hpp"
#include "oscillab/qp.hpp"
#include "oscillab/rng.hpp"
#include "oscillab/schedule.hpp"
#include "oscillab/sl2.hpp"
#include "oscillab/sobolev.hpp"

using namespace oscillab;
using cd = std::complex<double>;

namespace {

Mat2 random_sl2(Rng& rng, double scale) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1),
                 c = rng.uniform(-1, 1);
    return expm(Mat2{a, b, c, -a} * scale, 1.0);
}

std::vector<GridState> corpus(int N) {
    std::vector<GridState> out;
    out.push_back(GridState::hermite(N, 0));
    out.push_back(GridState::hermite(N, 1));
    out.push_back(GridState::hermite(N, 4));
    out.push_back(GridState::gaussian(N, {0.5, -0.3}));
    GridState mix = GridState::hermite(N, 0);
    const GridState h2 = GridState::hermite(N, 2);
    const GridState h3 = GridState::hermite(N, 3);
    for (int i = 0; i < N; ++i)
        mix.v[i] = (mix.v[i] + h2.v[i] + h3.v[i]) / std::sqrt(3.0);
    out.push_back(mix);
    return out;
}

// --- 1: homomorphism over seeded pairs -------------------------------------

bool crit_homomorphism() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240817);
    const std::vector<GridState> states = corpus(4096);
    for (int i = 0; i < 50; ++i) {
        const Mat2 A = random_sl2(rng, 0.6);
        const Mat2 B = random_sl2(rng, 0.6);
        if (mat_norm(A) > 10 || mat_norm(B) > 10) return false;
        for (const GridState& psi : states) {
            const GridState lhs = apply_meta(A * B, psi, MetaPath::Fast);
            const GridState rhs = apply_meta(
                A, apply_meta(B, psi, MetaPath::Fast), MetaPath::Fast);
            if (phase_aligned_distance(lhs, rhs) > 1e-6 * psi.l2_norm())
                return false;
        }
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return sec <= 120.0;
}

// --- 2: rotation eigenphases ------------------------------------------------

bool crit_eigenphase() {
    const int N = 1024;
    for (const double t : {0.1, 0.4, 0.7, 1.1, 1.6, 2.2, 2.9, 3.7, 4.5, 5.8}) {
        const Mat2 R = expm(Mat2::J(), t);
        double sigma = 0; // one global sign per call (per t)
        for (int n = 0; n <= 20; ++n) {
            const GridState hn = GridState::hermite(N, n);
            const GridState out = apply_meta(R, hn, MetaPath::Fast);
            const cd expect =
                std::exp(cd(0.0, -t * (n + 0.5))); // harmonic eigenphase
            const cd c = grid_inner(hn, out) / expect;
            if (n == 0) sigma = c.real() >= 0 ? 1.0 : -1.0;
            // || M h_n - sigma e^{-it(n+1/2)} h_n || = |c - sigma| + O(offdiag)
            double diff2 = 0;
            for (int j = 0; j < N; ++j)
                diff2 += std::norm(out.v[j] - sigma * expect * hn.v[j]);
            if (std::sqrt(diff2 * hn.dx()) > 1e-6) return false;
        }
    }
    return true;
}

// --- 3: chirp-derivative table ---------------------------------------------

using bf = boost::multiprecision::cpp_bin_float_50;
struct cbf {
    bf re, im;
};

cbf chirp_bf(const bf& G, const bf& x) {
    const bf a = G * x * x;
    return {cos(a), sin(a)};
}

/// Central finite difference of order alpha at 50-digit precision (the high
/// alpha cancellation destroys binary64 and even 80-bit floats).
cbf fd_central(int alpha, const bf& G, const bf& x, const bf& h) {
    bf accr = 0, acci = 0, c = 1;
    for (int k = 0; k <= alpha; ++k) {
        const bf xk = x + (bf(alpha) / 2 - k) * h;
        const cbf f = chirp_bf(G, xk);
        const int s = (k % 2 == 0) ? 1 : -1;
        accr += s * c * f.re;
        acci += s * c * f.im;
        c = c * (alpha - k) / (k + 1);
    }
    const bf hp = pow(h, alpha);
    return {accr / hp, acci / hp};
}

cbf fd_richardson(int alpha, const bf& G, const bf& x, const bf& h) {
    const cbf a = fd_central(alpha, G, x, h);
    const cbf b = fd_central(alpha, G, x, h / 2);
    return {(b.re * 4 - a.re) / 3, (b.im * 4 - a.im) / 3};
}

bool crit_chirp_table() {
    const ChirpDerivTable t = chirp_coeffs(12);
    // Exact integer identities: p_{alpha,0} = 1 and sum_{k>=1} p_{alpha,k}
    // <= alpha!.
    bigint fact = 1;
    for (int alpha = 1; alpha <= 12; ++alpha) {
        fact *= alpha;
        const auto& row = t.row(alpha);
        if (row.empty() || row[0] != 1) return false;
        bigint tail = 0;
        for (size_t k = 1; k < row.size(); ++k) tail += row[k];
        if (tail > fact) return false;
    }
    // Assembled derivative against high-precision finite differences.
    for (int alpha = 1; alpha <= 8; ++alpha)
        for (const double G : {0.2, 0.35})
            for (const double x : {-0.6, -0.1, 0.45}) {
                const cd got = chirp_derivative(t, alpha, G, x);
                const cbf ref = fd_richardson(alpha, bf(G), bf(x), bf(0.02));
                const double rr = ref.re.convert_to<double>();
                const double ri = ref.im.convert_to<double>();
                const double mag = std::max(1.0, std::hypot(rr, ri));
                if (std::hypot(got.real() - rr, got.imag() - ri) > 1e-6 * mag)
                    return false;
            }
    return true;
}

// --- 4: propagator norm-bound audits ---------------------------------------

bool crit_propagator_audits() {
    const std::vector<GridState> states = corpus(1024);
    const std::vector<Mat2> Ls = {Mat2::J(),
                                  Mat2::J() * 2.0,
                                  {0, 2.0, -0.5, 0},
                                  {0.2, 1.1, -0.9, -0.2},
                                  {0, 4.0, -1.0, 0}};
    const std::vector<double> ts = {0.3, 0.8, 1.7};
    for (const double s : {0.0, 1.0, 2.0}) {
        // First pass: fit one C_s / c_s over the whole (L, t, psi) grid.
        double C_s = 0, c_s = 1e300;
        bool any_lower = false;
        for (const Mat2& L : Ls)
            for (const double t : ts) {
                const PropagatorAuditResult a =
                    propagator_bound_audit(L, t, s, states);
                C_s = std::max(C_s, a.max_upper_ratio);
                for (const AuditRecord& rec : a.records)
                    if (rec.applicable && rec.quantity.find("lower") !=
                                              std::string::npos)
                        any_lower = true;
                if (a.min_lower_ratio > 0)
                    c_s = std::min(c_s, a.min_lower_ratio);
            }
        if (!(C_s > 0)) return false;
        if (s > 0 && !any_lower) return false; // hypotheses never met: no audit
        C_s *= 1.0 + 1e-9;
        c_s = (c_s < 1e300) ? c_s * (1.0 - 1e-9) : 1.0;
        // Second pass: zero violations under the single fitted pair.
        for (const Mat2& L : Ls)
            for (const double t : ts) {
                const PropagatorAuditResult a =
                    propagator_bound_audit(L, t, s, states, C_s, c_s);
                if (a.upper_violations != 0 || a.lower_violations != 0)
                    return false;
            }
    }
    return true;
}

// --- 5: conjugation exactness on the built depth-1 schedule -----------------

bool crit_chain_exactness() {
    const AkSchedule sched =
        build_schedule(golden_frequency(), 1.0, FSpec::power_delta(1.0, 0.75),
                       16.0, 0.1, 1, ScheduleMode::Relaxed, {});
    const VerificationReport rep = verify_schedule(sched);
    if (!rep.all_pass) return false;
    for (const IneqRecord& e : rep.entries)
        if (e.applicable && !(e.margin >= 0)) return false;

    const TrigPolySl2 P = assemble_perturbation(sched, 1);
    const ConjugationChain ch = conjugation_chain(sched, 1);
    const QpSystem sysA{sched.freq, Mat2::J(), P};
    const QpSystem sysB{sched.freq, ch.L, ch.tail};
    const double tol = 1e-12 * (1.0 + majorant_norm(P, sched.r));
    Rng rng(5);
    const double span = 4.0 * sched.T[1].to_double();
    for (int i = 0; i < 200; ++i)
        if (conjugation_residual(ch.U, sysA, sysB, rng.uniform(0.0, span)) >
            tol)
            return false;
    return true;
}

// --- 6: spike-and-return oscillation ---------------------------------------

bool crit_oscillation() {
    // The deep preset is the regime where the asymptotic ratio is visible;
    // the desk preset's level 1 is too shallow (ratio 3.5) and is covered
    // by the unit tests instead.
    const OscillationReport rep =
        probe_oscillation(extreme_preset(), GridState::hermite(256, 0), 1.0);
    if (rep.levels.size() != 1) return false;
    const OscillationLevel& lv = rep.levels[0];
    return lv.spike_hs / lv.return_hs >= 5.0 && lv.matrix_bound < 8.0 &&
           lv.matrix_bound_ok;
}

// --- 7: reduction contraction and soundness ---------------------------------

double cocycle_mismatch(const std::vector<ConjFactor>& Y,
                        const QpSystem& oldSys, const QpSystem& newSys,
                        double t) {
    const Mat2 phiOld = integrate_cocycle(oldSys, 0.0, t, 5e-4);
    const Mat2 phiNew = integrate_cocycle(newSys, 0.0, t, 5e-4);
    const Mat2 y0 = conj_value(Y, oldSys.freq, 0.0);
    const Mat2 yt = conj_value(Y, oldSys.freq, t);
    return mat_norm(phiOld * y0 - yt * phiNew);
}

bool crit_kam_contraction() {
    Rng rng(20240817);
    TrigPolySl2 P;
    P.d = 2;
    P.width = 0.1;
    for (const KVec& k : {KVec::of({1, 0}), KVec::of({0, 1})}) {
        const double a1 = rng.uniform(-1, 1);
        const double a2 = rng.uniform(-1, 1);
        P.add_cos(k, Mat2{a1, rng.uniform(-1, 1), rng.uniform(-1, 1), -a1});
        P.add_sin(k, Mat2{a2, rng.uniform(-1, 1), rng.uniform(-1, 1), -a2});
    }
    P = P * (1e-3 / majorant_norm(P, 0.1));

    const QpSystem sys{golden_frequency(), Mat2::J() * 1.45, P};
    KamState st = initial_state(sys);
    st.res_threshold = 2e-3; // spectrum is non-resonant by construction
    for (int l = 0; l < 3; ++l) {
        if (st.F.empty()) break;
        const QpSystem before{sys.freq, st.A, st.F};
        const KamStepResult res = kam_step(st);
        st = res.state;
        const QpSystem after{sys.freq, st.A, st.F};
        if (cocycle_mismatch(res.Y, before, after, 5.0) > 1e-6) return false;
    }
    return (st.F.empty() ? 0.0 : majorant_norm(st.F, st.r)) <= 1e-7;
}

// --- 8: cross-method evolution ----------------------------------------------

bool crit_cross_method() {
    const AkSchedule sched = demo_preset();
    const QpSystem sys{sched.freq, Mat2::J(),
                       assemble_perturbation(sched, sched.depth())};
    const double T0 = sched.T[0].to_double();
    const GridState h0 = GridState::hermite(512, 0);
    const RunRecord ref = evolve_cocycle_lift(sys, h0, {T0}, 1e-4, 1.0);
    const RunRecord m1 = evolve_magnus(sys, h0, T0, 1e-3, 1.0);
    const RunRecord m2 = evolve_magnus(sys, h0, T0, 5e-4, 1.0);
    const double d1 = phase_aligned_distance(ref.final_state, m1.final_state);
    const double d2 = phase_aligned_distance(ref.final_state, m2.final_state);
    return d1 <= 1e-4 && d1 / d2 >= 3.0;
}

// --- 9: exponential envelope on every run -----------------------------------

bool crit_envelope() {
    const double ups = estimate_upsilon(1.0, 256);
    const auto passes = [&](const QpSystem& sys, const RunRecord& run) {
        const double beta =
            mat_norm(sys.constant) +
            (sys.pert.empty() ? 0.0 : majorant_norm(sys.pert, sys.pert.width));
        return envelope_check(run, beta, ups).pass;
    };

    // Desk-preset run over the full spike-and-return window.
    const AkSchedule sched = demo_preset();
    const QpSystem sysP{sched.freq, Mat2::J(),
                        assemble_perturbation(sched, sched.depth())};
    const double T0 = sched.T[0].to_double(), T1 = sched.T[1].to_double();
    const GridState h0 = GridState::hermite(4096, 0);
    if (!passes(sysP, evolve_cocycle_lift(sysP, h0,
                                          {0.0, T0, 4 * T0, T1, 4 * T1}, 1e-3,
                                          1.0)))
        return false;

    // The same system under the independent integrator.
    if (!passes(sysP, evolve_magnus(sysP, GridState::hermite(512, 0), T0,
                                    1e-3, 1.0)))
        return false;

    // Constant elliptic flows.
    QpSystem sysC;
    sysC.freq = golden_frequency();
    sysC.pert.d = 2;
    sysC.pert.width = 0.1;
    for (const Mat2& L : {Mat2::J() * 2.0, Mat2{0, 2.0, -0.5, 0}}) {
        sysC.constant = L;
        if (!passes(sysC, evolve_cocycle_lift(sysC, GridState::hermite(256, 1),
                                              {0.5, 1.5, 3.0}, 1e-3, 1.0)))
            return false;
    }
    return true;
}

// --- 10: fast path performance ----------------------------------------------

bool crit_fast_path() {
    const int N = 16384;
    const Mat2 A{0.6, 1.2, -0.5, 0.6667};
    const GridState psi = GridState::gaussian(N, {0.3, 0.2});
    using clock = std::chrono::steady_clock;
    // Warm the transform plans so timing measures the algorithms.
    apply_meta(A, psi, MetaPath::Fast);
    const auto t0 = clock::now();
    const GridState fast = apply_meta(A, psi, MetaPath::Fast);
    const auto t1 = clock::now();
    const GridState ref = apply_meta(A, psi, MetaPath::Reference);
    const auto t2 = clock::now();
    const double sec_fast = std::chrono::duration<double>(t1 - t0).count();
    const double sec_ref = std::chrono::duration<double>(t2 - t1).count();
    return phase_aligned_distance(fast, ref) <= 1e-8 &&
           sec_ref / sec_fast >= 10.0;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)();
    };
    const Criterion criteria[] = {
        {"metaplectic homomorphism (50 seeded pairs, 5-state corpus)",
         crit_homomorphism},
        {"rotation eigenphases e^{-it(n+1/2)}, n <= 20, 10 times",
         crit_eigenphase},
        {"chirp-derivative table: integer identities + finite differences",
         crit_chirp_table},
        {"propagator norm-bound audits, fitted C_s, s in {0,1,2}",
         crit_propagator_audits},
        {"conjugation exactness + schedule ledger all-pass",
         crit_chain_exactness},
        {"spike-and-return oscillation with matrix bound < 8",
         crit_oscillation},
        {"reduction contraction to 1e-7 with cocycle soundness",
         crit_kam_contraction},
        {"cross-method evolution agreement, 2nd-order improvement",
         crit_cross_method},
        {"exponential growth envelope on every run", crit_envelope},
        {"fast metaplectic path: 1e-8 accuracy, >= 10x speedup",
         crit_fast_path},
    };

    int failures = 0;
    int idx = 0;
    for (const Criterion& c : criteria) {
        ++idx;
        bool ok = false;
        std::string note;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            note = std::string("  [") + e.what() + "]";
        }
        std::printf("%s %2d: %s%s\n", ok ? "PASS" : "FAIL", idx, c.name,
                    note.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures;
}
