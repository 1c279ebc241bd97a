/// \file sobolev.hpp
/// \brief Sobolev analytics: Hermite transform, H^s / X^s / D^s norms,
/// Gamma_s, the exact chirp-derivative coefficient table, and the bound
/// auditors for the norm estimates of metaplectic images and propagators.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <string>
#include <vector>

#include "oscillab/grid.hpp"
#include "oscillab/sl2.hpp"

namespace oscillab {

using bigint = boost::multiprecision::cpp_int;

/// Hermite-basis coefficients c_n = <h_n, psi>, n = 0..N_h-1.
/// H^s is defined spectrally through these: the harmonic oscillator
/// satisfies (D^2 + X^2) h_n = (2n+1) h_n.
struct HermiteState {
    std::vector<std::complex<double>> coeffs;
    double l2_norm() const;
};

/// Project a grid state onto the first N_h Hermite functions (quadrature
/// with the stable three-term recurrence).  Requires N_h <= N/4; throws
/// TruncationTail when the top 8 coefficients carry more than 1e-10 of the
/// total mass (state not representable at this truncation).
HermiteState hermite_analyze(const GridState& psi, int N_h);

/// Rebuild a grid state from Hermite coefficients.
GridState hermite_synthesize(const HermiteState& h, int N);

/// Spectral Sobolev norm (sum (2n+1)^s |c_n|^2)^{1/2}.
double hs_norm(const HermiteState& h, double s);

/// Convenience: analyze at N_h = min(N/4, 512) then hs_norm.
double hs_norm_grid(const GridState& psi, double s);

struct AuxNorms {
    double xs = 0;         ///< || |x|^s psi ||
    double ds = 0;         ///< || |xi|^s F psi ||
    double classic_hs = 0; ///< || (1+xi^2)^{s/2} F psi ||
};

/// Moment / Fourier-multiplier norms used by the equivalence audits.
AuxNorms aux_norms(const GridState& psi, double s);

/// Gamma_s(psi) = ||psi||_{H^s} / ||D^s psi||.  Throws ZeroState.
double gamma_s(const GridState& psi, double s);

/// Exact integer coefficients of the chirp derivatives:
/// (d/dx)^alpha e^{iGx^2} = e^{iGx^2} sum_k p_{alpha,k} (2iG)^{alpha-k}
/// x^{alpha-2k}.  Row alpha has entries k = 0..floor(alpha/2).
struct ChirpDerivTable {
    std::vector<std::vector<bigint>> rows; ///< rows[alpha-1]
    const std::vector<bigint>& row(int alpha) const { return rows[alpha - 1]; }
};

/// Build the table by the derivative recurrence
/// p_{alpha+1,k} = p_{alpha,k} + (alpha-2k+2) p_{alpha,k-1} (exact integers;
/// alpha_max <= 64).
ChirpDerivTable chirp_coeffs(int alpha_max);

/// Evaluate (d/dx)^alpha e^{iGx^2} at x from the table.
std::complex<double> chirp_derivative(const ChirpDerivTable& t, int alpha,
                                      double G, double x);

/// One audited inequality: measured value vs its bound right-hand side with
/// the corpus-fitted constant.
struct AuditRecord {
    std::string quantity;
    double measured = 0;
    double bound_rhs = 0;
    double fitted_constant = 1.0;
    bool pass = false;
    bool applicable = true; ///< false when the bound's hypothesis fails
};

/// Audit of the norm bounds for U(x) = e^{iGx^2} u(Kx): the universal upper
/// bound |K|^{-1/2}(|K|+|G/K|+1/|K|)^s ||u||_{H^s}, and the three lower
/// bounds with their smallness hypotheses (checked against hyp_cap).
struct UgkAuditResult {
    double measured = 0;
    AuditRecord upper;
    std::vector<AuditRecord> lowers;
};

UgkAuditResult ugk_audit(double G, double K, const GridState& u, double s,
                         double C_s = 1.0, double c_s = 1.0,
                         double hyp_cap = 1e-3);

/// Audit of the elliptic-propagator norm bounds over a corpus of states:
/// upper  ||e^{-itL}psi||_{H^s}/||psi||_{H^s} <= C_s (1 + (|a20|+|a11|+
/// |a02|)^s |sin(t rho)/rho|^s), and the lower bound
/// >= c_s |a02|^s |sin(rho t)/rho|^s ||D^s psi|| when its hypothesis
/// (the chirp smallness of the normalized flow) holds.
struct PropagatorAuditResult {
    std::vector<AuditRecord> records; ///< one upper (+ one lower) per state
    double max_upper_ratio = 0;       ///< max measured/bound_rhs (pre-fit)
    double min_lower_ratio = 0;       ///< min measured/bound_rhs on applicable
    int upper_violations = 0;
    int lower_violations = 0;
};

PropagatorAuditResult propagator_bound_audit(const Mat2& L, double t, double s,
                                             const std::vector<GridState>& corpus,
                                             double C_s = 1.0, double c_s = 1.0);

/// Upsilon_s = max over Q in {X^2, XD, DX, D^2} of the L2 operator norm of
/// [Q, J^{s/2}] J^{-s/2} on the N_h-truncated Hermite basis (J = D^2+X^2 is
/// diagonal there).  Power iteration; throws NotConverged.  stabilization,
/// when non-null, receives |value(N_h) - value(2 N_h)| / value(2 N_h).
double estimate_upsilon(double s, int N_h, double* stabilization = nullptr);

} // namespace oscillab
