/// \file grid.hpp
/// \brief Sampled wavefunctions on a self-dual grid and the metaplectic
/// action on them: chirps, dilations, the unitary DFT, and the full
/// integral operator by reference quadrature or a fast factored path.

#pragma once

#include <complex>
#include <vector>

#include "oscillab/sl2.hpp"

namespace oscillab {

/// Complex wavefunction sampled on the self-dual grid
/// x_j = (j - N/2) * dx, dx = sqrt(2*pi/N), half-width L = sqrt(2*pi*N)/2.
/// Self-duality (dx^2 = 2*pi/N) makes the unitary DFT an endomorphism of
/// the grid: frequency samples live on the same points.
struct GridState {
    int N = 0;
    double L = 0;
    std::vector<std::complex<double>> v;

    static double self_dual_halfwidth(int N);

    /// Zero state on the self-dual grid (N must be a power of two >= 16).
    static GridState make(int N);
    /// Hermite function h_n (L2-normalized, h_0 = pi^{-1/4} e^{-x^2/2}).
    static GridState hermite(int N, int n);
    /// Coherent state centered by the complex parameter zeta:
    /// pi^{-1/4} exp(-x^2/2 + sqrt(2) zeta x - zeta^2/2 - |zeta|^2/2).
    static GridState gaussian(int N, std::complex<double> zeta);

    double dx() const { return 2.0 * L / N; }
    double x(int j) const { return (j - N / 2) * dx(); }

    double l2_norm() const;
    /// l2 mass in the outermost 1% of points on each side, relative to the
    /// total norm.  Admissible states keep this below 1e-10.
    double tail_fraction() const;
    /// Throws TailEscape when the tail invariant fails.
    void require_tail(double tol = 1e-10) const;
};

/// Pointwise multiplication by e^{i kappa x^2 / 2} (unitary).
GridState apply_chirp(double kappa, const GridState& psi);

/// lambda^{-1/2} u(x / lambda) by periodic band-limited (Dirichlet kernel)
/// resampling; negative lambda routed through a parity flip.  Throws
/// TailEscape when the dilated state leaks into the grid boundary.
GridState apply_dilation(double lambda, const GridState& psi);

/// Unitary DFT matching the continuum convention
/// (F u)(xi) = (2 pi)^{-1/2} Integral e^{-i x xi} u(x) dx on the self-dual
/// grid; direction -1 is the inverse.
GridState apply_fourier(const GridState& psi, int direction);

enum class MetaPath { Reference, Fast };

/// Apply the metaplectic operator M(A) for unit-determinant A.
///
/// The integral form with the larger of |a|, |b| is used (a = A.a11,
/// b = A.a12).  The reference path evaluates the oscillatory sum directly in
/// O(N^2); the fast path computes the identical discrete sum through a
/// Bluestein-factored scaled DFT (chirp, three FFTs, chirp) in O(N log N).
/// Square-root branches are principal: the |a|-form prefactor is
/// 1/sqrt(2 pi a), the |b|-form prefactor 1/sqrt(2 pi i b); these reproduce
/// the rotation eigenphases e^{-i theta (n+1/2)} without any per-call phase
/// fixup, and compositions close up to a global sign.
///
/// Throws NormCapExceeded when mat_norm(A) > norm_cap, TailEscape when the
/// result is not contained on the grid.
GridState apply_meta(const Mat2& A, const GridState& psi, MetaPath path,
                     double norm_cap = 32.0);

/// Quantum propagator e^{-i t L_op} psi = M(expm(L, t)) psi for the
/// quadratic Hamiltonian associated with the traceless matrix L.
GridState propagate_const(const Mat2& L, double t, const GridState& psi,
                          MetaPath path = MetaPath::Fast,
                          double norm_cap = 32.0);

/// Precomputed application plan (decomposition cached with the source).
struct MetaPlan {
    Mat2 source;
    FactorChain chain;
    MetaPath path = MetaPath::Fast;
};

MetaPlan make_meta_plan(const Mat2& A, MetaPath path);

/// Apply a plan by composing the primitive factors (chirp for shears,
/// resampling for dilations, e^{-+ i pi/4} F^{+-1} for quarter rotations).
/// Exercises the factor-chain route; the integral paths above are the
/// production ones.
GridState apply_meta_chain(const MetaPlan& plan, const GridState& psi);

/// Inner product <a, b> = sum conj(a_j) b_j dx.
std::complex<double> grid_inner(const GridState& a, const GridState& b);

/// Phase-aligned distance min_phi ||a - e^{i phi} b||_{L2}.
double phase_aligned_distance(const GridState& a, const GridState& b);

} // namespace oscillab
