/// \file qp.hpp
/// \brief Quasi-periodic sl(2,R)-valued functions on T^d as finite Fourier
/// series: evaluation, majorant norms, rotation conjugation with exact
/// frequency bookkeeping, and cocycle integration.

#pragma once

#include <array>
#include <compare>
#include <complex>
#include <map>
#include <vector>

#include "oscillab/sl2.hpp"

namespace oscillab {

using cplx = std::complex<double>;

/// Frequency vector with Diophantine constants.  The audit is finite:
/// for all 0 < |n|_1 <= N_check, dist(<n,omega>, Z) > gamma/|n|_1^tau,
/// skipping integer-resonant directions (lattice vectors whose pairing is
/// exactly an integer, e.g. n = (m, 0) for omega = (1, alpha)); no gamma > 0
/// can clear those, and no schedule mode vector is ever chosen there.
struct FrequencyData {
    std::vector<double> omega;
    double gamma = 0;
    double tau = 2;
    int d() const { return static_cast<int>(omega.size()); }
};

/// The default frequency: d=2, omega = (1, (sqrt(5)-1)/2), tau = 2, gamma
/// fitted by the finite audit up to N_check = 200.
FrequencyData golden_frequency();

struct DioAuditResult {
    double gamma_fit = 0;           ///< min over audited n of |n|^tau * dist
    std::vector<long long> worst;   ///< argmin lattice vector
    bool pass = false;              ///< gamma_fit >= declared gamma
};

/// Finite Diophantine audit over 0 < |n|_1 <= N_check (integer-resonant
/// directions excluded, see FrequencyData).
DioAuditResult diophantine_audit(const FrequencyData& freq, int N_check);

/// Lattice vector in Z^d, d <= 4.
struct KVec {
    std::array<long long, 4> c{};
    int d = 2;

    static KVec of(std::initializer_list<long long> v);
    long long norm1() const;
    bool is_zero() const;
    KVec operator+(const KVec& o) const;
    KVec operator-(const KVec& o) const;
    KVec operator-() const;
    KVec operator*(long long m) const;
    auto operator<=>(const KVec&) const = default;
};

/// <k, omega>.
double pairing(const KVec& k, const FrequencyData& freq);

/// Coefficient of one Fourier mode in the basis {J, E=diag(1,-1),
/// H=antidiag(1,1)}: A(k) = cJ*J + cE*E + cH*H, i.e. the matrix
/// [[cE, cJ+cH], [-cJ+cH, -cE]].
struct SlCoeff {
    cplx cJ{}, cE{}, cH{};
    SlCoeff operator+(const SlCoeff& o) const {
        return {cJ + o.cJ, cE + o.cE, cH + o.cH};
    }
    SlCoeff operator*(cplx z) const { return {cJ * z, cE * z, cH * z}; }
};

/// l1 matrix norm of the (complex) mode matrix.
double coeff_norm(const SlCoeff& c);

/// Finitely supported Fourier series of sl(2,R)-valued functions on T^d.
/// Reality constraint A(-k) = conj(A(k)) is maintained by all operations;
/// evaluation at real theta yields a traceless real matrix.
struct TrigPolySl2 {
    int d = 2;
    double width = 0;               ///< analyticity strip r
    std::map<KVec, SlCoeff> modes;  ///< two-sided coefficient map

    /// Add M * cos<k,theta> (real traceless M); maintains reality.
    void add_cos(const KVec& k, const Mat2& M);
    /// Add M * sin<k,theta>.
    void add_sin(const KVec& k, const Mat2& M);
    /// Add a constant term M.
    void add_const(const Mat2& M);
    /// Raw two-sided accumulation (caller maintains reality).
    void add_mode(const KVec& k, const SlCoeff& c);

    bool empty() const { return modes.empty(); }

    TrigPolySl2 operator+(const TrigPolySl2& o) const;
    TrigPolySl2 operator*(double c) const;

    /// Drop modes with coeff_norm <= tol; returns the majorant (at the
    /// series' own width) of everything dropped, so no tail is silently
    /// discarded.
    double prune(double tol);

    /// Largest |k|_1 in the support.
    long long max_norm1() const;
};

/// Fourier synthesis at theta (radians, length d).  imag_residue, when
/// non-null, receives the largest imaginary part encountered (reality check).
Mat2 eval(const TrigPolySl2& F, const std::vector<double>& theta,
          double* imag_residue = nullptr);

/// Weighted l1 majorant: sum_k ||A(k)|| e^{r |k|_1}.  Upper-bounds the
/// analytic strip sup-norm.  Throws WidthExceeded when r > F.width.
double majorant_norm(const TrigPolySl2& F, double r);

/// theta |-> R^{sign}_{<k,theta>} F(theta) R^{-sign}_{<k,theta>} with exact
/// frequency bookkeeping: in the {J,E,H} basis the (E,H) pair rotates by
/// twice the conjugation angle, so w = cE + i cH shifts modes by
/// -2*sign*k and no trigonometric expansion occurs.
TrigPolySl2 rotation_conjugate(const TrigPolySl2& F, const KVec& k, int sign);

/// Conjugation by the half-angle rotation R^{sign}_{<k,theta>/2} (mode shift
/// -sign*k); used by the resonant renormalization step.
TrigPolySl2 rotation_conjugate_half(const TrigPolySl2& F, const KVec& k,
                                    int sign);

/// Conjugation by a constant matrix C: theta |-> C^{-1} F(theta) C or
/// C F(theta) C^{-1} per sign, mode-wise (no frequency change).
TrigPolySl2 const_conjugate(const TrigPolySl2& F, const Mat2& C, int sign);

/// Quasi-periodic linear system y' = (constant + perturbation(omega t)) y.
struct QpSystem {
    FrequencyData freq;
    Mat2 constant;
    TrigPolySl2 pert;
};

/// Coefficient matrix constant + P(omega t) at time t.
Mat2 system_matrix(const QpSystem& sys, double t);

/// Fundamental matrix Phi(t1) Phi(t0)^{-1} by fixed-step RK4.  det drift
/// beyond 1e-6 signals a too-coarse step (StepTooLarge); the measured drift
/// is reported through det_drift when non-null.
Mat2 integrate_cocycle(const QpSystem& sys, double t0, double t1, double dt,
                       double* det_drift = nullptr);

/// One factor of a closed-form time-dependent conjugation: either a rotation
/// R_{speed * t} or a constant matrix.
struct TimeFactor {
    bool is_rotation = true;
    double speed = 0; ///< rotation angular speed (rad per unit time)
    Mat2 C;           ///< constant factor when !is_rotation
    Mat2 value(double t) const;
};

/// Ordered product U(t) = f_1(t) f_2(t) ... with closed-form derivative.
struct TimeChain {
    std::vector<TimeFactor> factors;
    Mat2 value(double t) const;
    Mat2 derivative(double t) const;
};

/// || U'(t) - A(t) U(t) + U(t) B(t) || for A(t), B(t) the coefficient
/// matrices of sysA, sysB.  Zero iff U conjugates sysA to sysB at t.
double conjugation_residual(const TimeChain& U, const QpSystem& sysA,
                            const QpSystem& sysB, double t);

} // namespace oscillab
