/// \file test_kam.cpp
/// \brief Tests for the almost-reducibility iteration: resonance scanning,
/// homological contraction, resonant renormalization, and conjugation
/// soundness against independently integrated cocycles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oscillab/akchain.hpp"
#include "oscillab/errors.hpp"
#include "oscillab/kam.hpp"
#include "oscillab/qp.hpp"
#include "oscillab/schedule.hpp"

using namespace oscillab;

namespace {

double maj(const TrigPolySl2& F, double r) {
    return F.empty() ? 0.0 : majorant_norm(F, r);
}

/// || Phi_old(t) Y(0) - Y(t) Phi_new(t) || with both fundamental matrices
/// integrated independently; zero iff x = Y x' conjugates the systems.
double cocycle_mismatch(const std::vector<ConjFactor>& Y,
                        const QpSystem& oldSys, const QpSystem& newSys,
                        double t) {
    const Mat2 phiOld = integrate_cocycle(oldSys, 0.0, t, 5e-4);
    const Mat2 phiNew = integrate_cocycle(newSys, 0.0, t, 5e-4);
    const Mat2 y0 = conj_value(Y, oldSys.freq, 0.0);
    const Mat2 yt = conj_value(Y, oldSys.freq, t);
    return mat_norm(phiOld * y0 - yt * phiNew);
}

/// Deterministic non-resonant perturbation: support {(1,0), (0,1)}, all
/// divisors of magnitude >= 0.382 against 2 xi = 2, scaled to the target
/// majorant at width 0.1.
TrigPolySl2 tame_pert(double target_majorant) {
    TrigPolySl2 F;
    F.d = 2;
    F.width = 0.1;
    F.add_cos(KVec::of({1, 0}), Mat2{0.3, 0.7, 0.2, -0.3});
    F.add_sin(KVec::of({1, 0}), Mat2{-0.1, 0.4, 0.6, 0.1});
    F.add_cos(KVec::of({0, 1}), Mat2{0.5, -0.2, 0.3, -0.5});
    F.add_sin(KVec::of({0, 1}), Mat2{0.2, 0.1, -0.4, -0.2});
    return F * (target_majorant / majorant_norm(F, 0.1));
}

} // namespace

TEST_CASE("resonance scan") {
    const FrequencyData freq = golden_frequency();
    SUBCASE("exact half-pairing is always found") {
        const KVec k = KVec::of({1, 1});
        const double xi = pairing(k, freq) / 2.0;
        const auto hits = resonance_scan(xi, freq, 5, 1e-6);
        REQUIRE(!hits.empty());
        CHECK(hits.front() == k);
    }
    SUBCASE("zero threshold finds nothing") {
        CHECK(resonance_scan(0.5, freq, 10, 0.0).empty());
    }
    SUBCASE("xi = 1/2 against the exhaustive ledger") {
        // 2 xi = 1 = <(1,0)> exactly; no other |k|_1 <= 10 pairing comes
        // within 1e-3 (the nearest fractional part of b*phihat is 0.056
        // away at b = 8).
        const auto hits = resonance_scan(0.5, freq, 10, 1e-3);
        REQUIRE(hits.size() == 1);
        CHECK(hits.front() == KVec::of({1, 0}));
    }
}

TEST_CASE("single steps") {
    const FrequencyData freq = golden_frequency();
    SUBCASE("empty perturbation is a fixed point") {
        QpSystem sys{freq, Mat2::J(), {}};
        sys.pert.d = 2;
        sys.pert.width = 0.1;
        const KamState st = initial_state(sys);
        const KamStepResult res = kam_step(st);
        CHECK(res.Y.empty());
        CHECK(res.state.l == st.l);
        CHECK(res.state.F.empty());
    }
    SUBCASE("constant perturbation is absorbed in one step") {
        TrigPolySl2 F;
        F.d = 2;
        F.width = 0.1;
        const Mat2 M{1e-3, 5e-4, 5e-4, -1e-3};
        F.add_const(M);
        QpSystem sys{freq, Mat2::J(), F};
        const KamStepResult res = kam_step(initial_state(sys));
        CHECK(res.state.F.empty());
        CHECK(mat_norm(res.state.A - (Mat2::J() + M)) <= 1e-15);
        REQUIRE(res.Y.size() == 1);
        CHECK(res.Y[0].kind == ConjFactor::Kind::ExpPoly);
        CHECK(res.Y[0].Z.empty()); // nothing to solve: Y = identity
        CHECK(res.state.history.back().kind == "nonresonant");
    }
    SUBCASE("hyperbolic constant part is rejected") {
        QpSystem sys{freq, Mat2{0.1, 1.0, 1.0, -0.1}, tame_pert(1e-3)};
        CHECK_THROWS_AS(kam_step(initial_state(sys)), NotElliptic);
    }
}

TEST_CASE("non-resonant contraction") {
    // 2 xi = 2.9 keeps every divisor of the support (and of its quadratic
    // offspring) at distance >= 0.9.  A constant part J would NOT do: the
    // offspring mode (2,0) pairs to exactly 2 = 2 xi, an exact resonance.
    const FrequencyData freq = golden_frequency();
    const Mat2 A0 = Mat2::J() * 1.45;
    QpSystem sys{freq, A0, tame_pert(1e-3)};
    KamState st = initial_state(sys);
    st.res_threshold = 2e-3; // declared override: spectrum is non-resonant

    double prev = maj(st.F, st.r);
    CHECK(prev == doctest::Approx(1e-3).epsilon(1e-12));
    for (int l = 0; l < 3; ++l) {
        if (maj(st.F, st.r) == 0.0) break; // already annihilated
        const QpSystem oldSys{freq, st.A, st.F};
        const KamStepResult res = kam_step(st);
        st = res.state;
        CHECK(st.history.back().kind == "nonresonant");
        const double cur = maj(st.F, st.r);
        // Quadratic-flavored contraction, measured: at least the ^1.5 and
        // ^1.2 envelopes until the floor.
        if (prev > 1e-13) {
            CHECK(cur <= std::pow(prev, 1.5));
            CHECK(cur <= std::pow(prev, 1.2));
        }
        // Exponent smallness per the scheme: ||Z|| < eps^{1/2}.
        REQUIRE(res.Y.size() == 1);
        CHECK(maj(res.Y[0].Z, st.r) < std::sqrt(prev));
        // Soundness against independently integrated cocycles.
        const QpSystem newSys{freq, st.A, st.F};
        CHECK(cocycle_mismatch(res.Y, oldSys, newSys, 5.0) <= 1e-6);
        prev = cur;
    }
    CHECK(prev <= 1e-7);
    // End-to-end: the accumulated conjugation links the original system to
    // the final one directly.
    const QpSystem first{freq, A0, tame_pert(1e-3)};
    const QpSystem last{freq, st.A, st.F};
    CHECK(cocycle_mismatch(st.conj, first, last, 5.0) <= 1e-6);
}

TEST_CASE("resonant renormalization") {
    const FrequencyData freq = golden_frequency();
    // 2 xi = 1.1 sits 0.1 away from <(1,0)> = 1: resonant under the 0.2
    // override.  A second, non-resonant mode rides along.
    const Mat2 A = Mat2::J() * 0.55;
    TrigPolySl2 F;
    F.d = 2;
    F.width = 0.1;
    F.add_cos(KVec::of({1, 0}), Mat2{1.0, 0.0, 0.0, -1.0} * 1e-4);
    F.add_sin(KVec::of({0, 1}), Mat2{0.0, 1.0, 1.0, 0.0} * 2e-4);
    QpSystem sys{freq, A, F};
    KamState st = initial_state(sys);
    st.res_threshold = 0.2;

    const KamStepResult res = kam_step(st);
    const KamState& ns = res.state;
    const KamHistoryEntry& h = ns.history.back();

    SUBCASE("bookkeeping") {
        CHECK(h.kind == "resonant");
        CHECK(h.k_res == KVec::of({1, 0}));
        REQUIRE(res.Y.size() == 3);
        CHECK(res.Y[0].kind == ConjFactor::Kind::Constant);
        CHECK(res.Y[1].kind == ConjFactor::Kind::ExpPoly);
        CHECK(res.Y[2].kind == ConjFactor::Kind::HalfRotation);
        CHECK(res.Y[2].k == KVec::of({1, 0}));
    }
    SUBCASE("renormalization shrinks the constant part") {
        CHECK(mat_norm(ns.A) < mat_norm(A));
        // The new rotation frequency is the detuning |xi - <k>/2| up to the
        // absorbed average.
        CHECK(ns.A.det() > 0);
        const double xi_new = std::sqrt(ns.A.det());
        CHECK(xi_new == doctest::Approx(0.05).epsilon(2e-2));
        // Lower bound of the scheme: xi > gamma / |ln eps|^tau.
        CHECK(xi_new >
              freq.gamma / std::pow(std::fabs(std::log(st.eps)), freq.tau));
    }
    SUBCASE("removed mode is absent and the step is sound") {
        CHECK(ns.F.modes.count(KVec::of({1, 0})) == 0);
        CHECK(ns.F.modes.count(KVec::of({-1, 0})) == 0);
        CHECK(maj(ns.F, ns.r) < st.eps);
        const QpSystem newSys{freq, ns.A, ns.F};
        CHECK(cocycle_mismatch(res.Y, sys, newSys, 5.0) <= 1e-6);
    }
}

TEST_CASE("almost reducibility driver") {
    const FrequencyData freq = golden_frequency();
    SUBCASE("zero perturbation: one terminal snapshot") {
        QpSystem sys{freq, Mat2::J(), {}};
        sys.pert.d = 2;
        sys.pert.width = 0.1;
        const auto snaps = almost_reduce(sys, 10);
        REQUIRE(snaps.size() == 1);
        CHECK(mat_norm(snaps[0].L - Mat2::J()) == 0.0);
        CHECK(snaps[0].U.empty());
        CHECK(snaps[0].P_norm_log <= std::log(1e-250));
    }
    SUBCASE("non-resonant run reaches the floor") {
        const Mat2 A0 = Mat2::J() * 1.45; // detuned spectrum, see above
        QpSystem sys{freq, A0, tame_pert(1e-4)};
        const auto snaps = almost_reduce(sys, 10);
        REQUIRE(snaps.size() == 1); // no resonant step occurred
        CHECK(snaps[0].P_norm_log <= std::log(1e-13));
        CHECK(snaps[0].envelope_ok);
        // The normal form stays within the absorbed averages.
        CHECK(mat_norm(snaps[0].L - A0) <= 2e-4);
    }
    SUBCASE("resonant step snapshots the pre-resonant state") {
        const Mat2 A = Mat2::J() * 0.55;
        TrigPolySl2 F;
        F.d = 2;
        F.width = 0.1;
        F.add_cos(KVec::of({1, 0}), Mat2{1.0, 0.0, 0.0, -1.0} * 1e-4);
        QpSystem sys{freq, A, F};
        const auto snaps = almost_reduce(sys, 2);
        REQUIRE(!snaps.empty());
        CHECK(mat_norm(snaps[0].L - A) == 0.0);
        CHECK(snaps[0].U.empty()); // resonance hit on the first step
        CHECK(snaps[0].sup_U == doctest::Approx(2.0)); // identity
        CHECK(snaps[0].envelope_ok);
    }
}

TEST_CASE("planted resonance of the assembled perturbation") {
    // The depth-1 schedule plants its oscillation at +-2(k0+k1); with
    // A = J (2 xi = 2) that mode pairs to 1.889 and is the deepest
    // violator, so the first step is resonant exactly there and the
    // half-angle rotation runs at the combined seed direction k0 + k1.
    const AkSchedule sc = demo_preset();
    const TrigPolySl2 P = assemble_perturbation(sc, 1);
    QpSystem sys{sc.freq, Mat2::J(), P};
    const KamStepResult res = kam_step(initial_state(sys));
    const KamHistoryEntry& h = res.state.history.back();
    CHECK(h.kind == "resonant");
    CHECK(h.k_res == KVec::of({-8, 16}));
    // After renormalization the constant part collapses to the planted
    // near-parabolic normal form: the detuning (1 - <k0+k1>) J cancels
    // against the absorbed constant term, leaving the lam_1-scale matrix.
    CHECK(mat_norm(res.state.A) < 0.5);
    CHECK(mat_norm(res.state.A) > 1e-2);
}
