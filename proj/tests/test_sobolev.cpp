/// \file test_sobolev.cpp
/// \brief Tests for the Hermite transform, spectral Sobolev norms, the
/// exact chirp-derivative table (cross-checked against a high-order finite
/// difference oracle), the bound auditors, and the commutator constant.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "oscillab/errors.hpp"
#include "oscillab/grid.hpp"
#include "oscillab/rng.hpp"
#include "oscillab/sobolev.hpp"

using namespace oscillab;

namespace {

using cd = std::complex<double>;
using cld = std::complex<long double>;
constexpr int N = 1024;

/// Independent derivative oracle: the entire function f(z) = e^{iGz^2}
/// satisfies f^{(alpha)}(x) = alpha!/(2 pi i) Contour f(z)/(z-x)^{alpha+1} dz.
/// The trapezoid rule on a circle of radius r converges spectrally, so this
/// shares no code (and no recurrence) with the table under test.
cld chirp_derivative_cauchy(int alpha, long double G, long double x) {
    const int M = 256;
    const long double r = 0.7L;
    const long double two_pi = 6.283185307179586476925L;
    cld acc{0.0L, 0.0L};
    for (int m = 0; m < M; ++m) {
        const long double th = two_pi * m / M;
        const cld z = x + r * cld{std::cos(th), std::sin(th)};
        const cld iGz2 = cld{0.0L, G} * z * z;
        const cld f = std::exp(iGz2);
        // f(z) e^{-i alpha theta}
        const long double ph = -static_cast<long double>(alpha) * th;
        acc += f * cld{std::cos(ph), std::sin(ph)};
    }
    long double fact = 1.0L;
    for (int i = 2; i <= alpha; ++i) fact *= i;
    long double ralpha = 1.0L;
    for (int i = 0; i < alpha; ++i) ralpha *= r;
    return acc * (fact / (ralpha * M));
}

} // namespace

TEST_CASE("hermite_analyze and synthesize") {
    SUBCASE("pure Hermite states are delta coefficients") {
        for (int n : {0, 1, 4, 11}) {
            const HermiteState h = hermite_analyze(GridState::hermite(N, n), 64);
            for (int m = 0; m < 64; ++m) {
                const double expect = (m == n) ? 1.0 : 0.0;
                CHECK(std::abs(h.coeffs[m] - expect) <= 1e-9);
            }
        }
    }
    SUBCASE("round trip on a coherent state") {
        const GridState g = GridState::gaussian(N, cd(1.2, 0.4));
        const HermiteState h = hermite_analyze(g, 128);
        const GridState back = hermite_synthesize(h, N);
        double diff = 0;
        for (int j = 0; j < N; ++j) diff += std::norm(back.v[j] - g.v[j]);
        CHECK(std::sqrt(diff * g.dx()) <= 1e-9);
        CHECK(h.l2_norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("truncation-tail detection") {
        // A displaced Gaussian with mean occupation |zeta|^2 = 9 is not
        // representable with 16 modes.
        const GridState g = GridState::gaussian(N, cd(3.0, 0.0));
        CHECK_THROWS_AS(hermite_analyze(g, 16), TruncationTail);
        CHECK_NOTHROW(hermite_analyze(g, 128));
    }
}

TEST_CASE("spectral Sobolev norms") {
    const GridState h0 = GridState::hermite(N, 0);
    const GridState h2 = GridState::hermite(N, 2);
    GridState mix = h0;
    for (int j = 0; j < N; ++j) {
        mix.v[j] = (h0.v[j] + h2.v[j]) / std::sqrt(2.0);
    }
    // ((2*0+1)^2 + (2*2+1)^2)/2 = (1 + 25)/2 = 13.
    CHECK(hs_norm_grid(mix, 2.0) ==
          doctest::Approx(std::sqrt(13.0)).epsilon(1e-9));
    CHECK(hs_norm_grid(h0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hs_norm_grid(mix, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aux norms and gamma_s") {
    const GridState h0 = GridState::hermite(N, 0);
    const AuxNorms a = aux_norms(h0, 1.0);
    // <x^2> = <xi^2> = 1/2 for the ground state.
    CHECK(a.xs == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(a.ds == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(a.classic_hs == doctest::Approx(std::sqrt(1.5)).epsilon(1e-9));

    CHECK(gamma_s(h0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gamma_s(h0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    GridState z = GridState::make(64);
    CHECK_THROWS_AS(gamma_s(z, 1.0), ZeroState);
}

TEST_CASE("chirp-derivative table: exact rows and invariants") {
    const ChirpDerivTable t = chirp_coeffs(16);
    CHECK(t.row(1) == std::vector<bigint>{1});
    CHECK(t.row(2) == std::vector<bigint>{1, 1});
    CHECK(t.row(3) == std::vector<bigint>{1, 3});
    CHECK(t.row(4) == std::vector<bigint>{1, 6, 3});
    CHECK(t.row(12) ==
          std::vector<bigint>{1, 66, 1485, 13860, 51975, 62370, 10395});

    for (int alpha = 1; alpha <= 16; ++alpha) {
        bigint fact = 1, tail = 0;
        for (int i = 2; i <= alpha; ++i) fact *= i;
        const auto& row = t.row(alpha);
        for (std::size_t k = 0; k < row.size(); ++k) {
            CHECK(row[k] >= 1);
            if (k >= 1) tail += row[k];
        }
        CHECK(tail <= fact);
        if (alpha == 12) CHECK(tail == 140151);
    }
    CHECK_THROWS(chirp_coeffs(65));
}

TEST_CASE("chirp_derivative matches the contour-integral oracle") {
    const ChirpDerivTable t = chirp_coeffs(8);
    for (double G : {0.13, -0.7, 1.0}) {
        for (double x : {0.0, 0.6, -1.4}) {
            for (int alpha = 1; alpha <= 8; ++alpha) {
                const cd got = chirp_derivative(t, alpha, G, x);
                const cld want = chirp_derivative_cauchy(alpha, G, x);
                const double ref = std::max(1.0, (double)std::abs(want));
                CHECK(std::abs(got - cd((double)want.real(),
                                        (double)want.imag())) <= 1e-8 * ref);
            }
        }
    }
}

TEST_CASE("chirped-scaled image norm audit") {
    const GridState h0 = GridState::hermite(N, 0);
    SUBCASE("G = 0, K = 1 is the identity") {
        // c_s = 0.6 < 1/sqrt(2): the two-term lower bound sums ||D u|| and
        // ||X u||, which for the ground state is sqrt(2) ||u||_{H^1}.
        const UgkAuditResult r = ugk_audit(0.0, 1.0, h0, 1.0, 1.0, 0.6);
        CHECK(r.measured == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r.upper.pass);
        for (const AuditRecord& rec : r.lowers) {
            CHECK(rec.applicable); // every hypothesis holds at G = 0, K = 1
            CHECK(rec.pass);
        }
    }
    SUBCASE("G = 0, s = 0 reduces to the exact scaling factor") {
        const UgkAuditResult r = ugk_audit(0.0, 2.0, h0, 0.0, 1.05);
        CHECK(r.measured ==
              doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
        CHECK(r.upper.bound_rhs ==
              doctest::Approx(1.05 / std::sqrt(2.0)).epsilon(1e-8));
        CHECK(r.upper.pass);
    }
    SUBCASE("small chirp at K = 1 keeps all bounds active") {
        const UgkAuditResult r = ugk_audit(1e-4, 1.0, h0, 1.0, 1.05, 0.6);
        CHECK(r.upper.pass);
        int applicable = 0;
        for (const AuditRecord& rec : r.lowers) {
            if (rec.applicable) {
                ++applicable;
                CHECK(rec.pass);
            }
        }
        CHECK(applicable >= 1);
    }
    SUBCASE("moderate chirp exceeds every smallness hypothesis") {
        const UgkAuditResult r = ugk_audit(0.05, 1.0, h0, 1.0);
        int applicable = 0;
        for (const AuditRecord& rec : r.lowers) applicable += rec.applicable;
        CHECK(applicable == 0);
    }
}

TEST_CASE("elliptic propagator norm audit") {
    std::vector<GridState> corpus;
    for (int n : {0, 1, 3}) corpus.push_back(GridState::hermite(N, n));
    Rng rng(77);
    {
        GridState g = GridState::make(N);
        for (int m = 0; m < 6; ++m) {
            const GridState h = GridState::hermite(N, m);
            const cd c(rng.normal(), rng.normal());
            for (int j = 0; j < N; ++j) g.v[j] += c * h.v[j];
        }
        const double nn = g.l2_norm();
        for (auto& z : g.v) z /= nn;
        corpus.push_back(g);
    }

    SUBCASE("harmonic rotation preserves every H^s norm") {
        const PropagatorAuditResult r =
            propagator_bound_audit(Mat2::J(), 0.8, 1.0, corpus);
        CHECK(r.upper_violations == 0);
        // Measured ratio is exactly 1; the bound is 1 + |sin t| >= 1.
        CHECK(r.max_upper_ratio <= 1.0 + 1e-8);
    }
    SUBCASE("anisotropic elliptic flow with fitted constants") {
        const Mat2 L{0.2, 1.5, -0.9, -0.2};
        REQUIRE(L.det() > 0);
        const PropagatorAuditResult r =
            propagator_bound_audit(L, 0.6, 1.0, corpus, 1.25, 0.5);
        CHECK(r.upper_violations == 0);
        CHECK(r.lower_violations == 0);
    }
    SUBCASE("non-elliptic generator is rejected") {
        CHECK_THROWS_AS(
            propagator_bound_audit(Mat2::E(), 0.5, 1.0, corpus), NotElliptic);
    }
}

TEST_CASE("commutator constant estimate") {
    CHECK(estimate_upsilon(0.0, 256) == 0.0);
    double stab = 1.0;
    const double u2 = estimate_upsilon(2.0, 256, &stab);
    CHECK(u2 > 0.0);
    CHECK(stab <= 0.05); // stable against doubling the truncation
    const double u1 = estimate_upsilon(1.0, 256);
    CHECK(u1 > 0.0);
    CHECK(u1 < u2); // monotone in s for these generators
}
