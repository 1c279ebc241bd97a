/// \file sl2.hpp
/// \brief Exact 2x2 real matrix algebra: norms, flows, elliptic
/// normalization, and the primitive-factor decompositions used by the
/// metaplectic engine.

#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace oscillab {

/// Plain 2x2 real matrix.  Group elements keep |det-1| <= 1e-12 after
/// construction/multiplication; algebra elements keep |trace| <= 1e-12.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    /// The standard rotation generator [[0,1],[-1,0]].
    static Mat2 J() { return {0, 1, -1, 0}; }
    /// diag(1,-1).
    static Mat2 E() { return {1, 0, 0, -1}; }
    /// antidiag(1,1).
    static Mat2 H() { return {0, 1, 1, 0}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }

    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat2 operator*(double c) const { return {c * a11, c * a12, c * a21, c * a22}; }
    friend Mat2 operator*(double c, const Mat2& m) { return m * c; }

    /// Inverse of a unit-determinant matrix (adjugate; exact up to the
    /// stored entries, no division by det so SL2 structure is preserved).
    Mat2 inverse_sl2() const { return {a22, -a12, -a21, a11}; }

    /// General inverse.
    Mat2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
};

/// Entrywise absolute sum: ||A|| = sum |a_ij|.
double mat_norm(const Mat2& A);

/// Frobenius norm (used by the closed-form Sobolev probes).
double frob_norm(const Mat2& A);

/// Largest singular value (conditioning guard for grid applications).
double sigma_max(const Mat2& A);

/// exp(tL) for traceless L, by the Cayley-Hamilton closed forms.
/// L^2 = -det(L)*I, so the exponential is elliptic (det>0), parabolic
/// (|det| < 1e-14, treated as 0 for continuity of all three branches), or
/// hyperbolic (det<0).
Mat2 expm(const Mat2& L, double t);

/// Result of normalizing an elliptic algebra element: C*(rho*J)*C^{-1} = L.
/// When the input has a12 < 0 the normalization applies to -L and `negated`
/// is set; callers flip the time direction.
struct EllipticData {
    double rho = 0;      ///< rotation frequency, sqrt(det L)
    Mat2 normalizer;     ///< C with C (rho J) C^{-1} = (negated ? -L : L)
    bool negated = false;
};

/// Normalize a traceless elliptic L.  Throws NotElliptic (det <= 0) or
/// DegenerateA02 (a12 == 0).
EllipticData normalize_elliptic(const Mat2& L);

enum class FactorKind { Rotation, Shear, Dilation };

/// One primitive metaplectic factor: rotation R_theta, lower shear
/// [[1,0],[kappa,1]], or dilation diag(lambda, 1/lambda).
struct Factor {
    FactorKind kind;
    double param;
    Mat2 matrix() const;
};

/// Ordered product of primitive factors; product() reproduces the source
/// matrix entrywise to <= 1e-12.
struct FactorChain {
    std::vector<Factor> factors;
    Mat2 product() const;
};

/// Constructor for the primitive matrices.  Throws ZeroDilation.
Mat2 primitive(FactorKind kind, double param);

/// Factor a unit-determinant A into at most 6 primitives.  Uses the
/// upper-left-entry chain when |a| >= |b| (ties included), the upper-right
/// chain otherwise, and prepends a quarter rotation when both |a| and |b|
/// are below 1/sqrt(2) (the rotated matrix then has a large first row).
FactorChain decompose(const Mat2& A);

} // namespace oscillab
