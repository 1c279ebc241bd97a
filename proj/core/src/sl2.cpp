/// \file sl2.cpp
/// \brief 2x2 matrix algebra implementation.

#include "oscillab/sl2.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "oscillab/errors.hpp"

namespace oscillab {

double mat_norm(const Mat2& A) {
    return std::fabs(A.a11) + std::fabs(A.a12) + std::fabs(A.a21) +
           std::fabs(A.a22);
}

double frob_norm(const Mat2& A) {
    return std::sqrt(A.a11 * A.a11 + A.a12 * A.a12 + A.a21 * A.a21 +
                     A.a22 * A.a22);
}

double sigma_max(const Mat2& A) {
    // For 2x2: sigma^2 = (f ± sqrt(f^2 - 4 det^2))/2 with f = ||A||_F^2.
    const double f = A.a11 * A.a11 + A.a12 * A.a12 + A.a21 * A.a21 +
                     A.a22 * A.a22;
    const double d = A.det();
    const double disc = std::sqrt(std::fmax(f * f - 4.0 * d * d, 0.0));
    return std::sqrt(0.5 * (f + disc));
}

Mat2 expm(const Mat2& L, double t) {
    // Traceless 2x2 satisfies L^2 = -det(L) I, so exp(tL) has a closed form
    // in each determinant class.  The |det| < 1e-14 parabolic window keeps
    // all three branches continuous across det = 0 (sin(x)/x, sinh(x)/x and
    // x -> x agree there to machine precision).
    const double d = L.det();
    const Mat2 I = Mat2::identity();
    if (std::fabs(d) < 1e-14) {
        return I + L * t;
    }
    if (d > 0) {
        const double rho = std::sqrt(d);
        return I * std::cos(rho * t) + L * (std::sin(rho * t) / rho);
    }
    const double mu = std::sqrt(-d);
    return I * std::cosh(mu * t) + L * (std::sinh(mu * t) / mu);
}

EllipticData normalize_elliptic(const Mat2& L) {
    // A vanishing upper-right entry is reported as the degenerate case even
    // though it also forces det <= 0 for traceless input.
    if (L.a12 == 0) {
        throw DegenerateA02("normalize_elliptic: vanishing upper-right entry");
    }
    const double d = L.det();
    if (d <= 0) {
        throw NotElliptic("normalize_elliptic: det(L) <= 0");
    }
    EllipticData out;
    Mat2 M = L;
    if (L.a12 < 0) {
        // Normalize -L instead; callers flip the time direction.
        M = L * -1.0;
        out.negated = true;
    }
    // In Hamiltonian-coefficient form M = [[a11, a02],[-a20, -a11]]:
    const double a02 = M.a12;
    const double a11 = M.a11;
    const double rho = std::sqrt(d);
    const double scale = 1.0 / std::sqrt(a02 * rho);
    out.rho = rho;
    out.normalizer = Mat2{a02 * scale, 0.0, -a11 * scale, rho * scale};
    return out;
}

Mat2 primitive(FactorKind kind, double param) {
    switch (kind) {
    case FactorKind::Rotation: {
        const double c = std::cos(param), s = std::sin(param);
        return {c, s, -s, c};
    }
    case FactorKind::Shear:
        return {1.0, 0.0, param, 1.0};
    case FactorKind::Dilation:
        if (param == 0.0) throw ZeroDilation("primitive: dilation(0)");
        return {param, 0.0, 0.0, 1.0 / param};
    }
    std::abort(); // unreachable
}

Mat2 Factor::matrix() const { return primitive(kind, param); }

Mat2 FactorChain::product() const {
    Mat2 P = Mat2::identity();
    for (const Factor& f : factors) P = P * f.matrix();
    return P;
}

namespace {

constexpr double kHalfSqrt2 = 0.70710678118654752; // 1/sqrt(2)

bool is_identity_factor(const Factor& f) {
    switch (f.kind) {
    case FactorKind::Rotation: return f.param == 0.0;
    case FactorKind::Shear:    return f.param == 0.0;
    case FactorKind::Dilation: return f.param == 1.0;
    }
    return false;
}

void push(std::vector<Factor>& v, FactorKind k, double p) {
    Factor f{k, p};
    if (!is_identity_factor(f)) v.push_back(f);
}

/// Core factorization for matrices with max(|a|,|b|) >= 1/sqrt(2).
void decompose_core(const Mat2& A, std::vector<Factor>& out) {
    const double a = A.a11, b = A.a12, c = A.a21, d = A.a22;
    if (std::fabs(a) >= std::fabs(b)) {
        // A = shear(c/a) dilation(a) R_{pi/2} shear(-b/a) R_{-pi/2}:
        // the rotation-conjugated shear realizes the upper shear [[1,b/a],[0,1]].
        push(out, FactorKind::Shear, c / a);
        push(out, FactorKind::Dilation, a);
        if (b != 0.0) {
            push(out, FactorKind::Rotation, std::numbers::pi / 2);
            push(out, FactorKind::Shear, -b / a);
            push(out, FactorKind::Rotation, -std::numbers::pi / 2);
        }
    } else {
        // A = shear(d/b) dilation(b) R_{pi/2} shear(a/b).
        push(out, FactorKind::Shear, d / b);
        push(out, FactorKind::Dilation, b);
        push(out, FactorKind::Rotation, std::numbers::pi / 2);
        push(out, FactorKind::Shear, a / b);
    }
}

} // namespace

FactorChain decompose(const Mat2& A) {
    FactorChain chain;
    // Exact-primitive fast paths.
    if (A.a12 == 0.0 && A.a21 == 0.0 && A.a11 == 1.0 && A.a22 == 1.0) {
        return chain; // identity -> empty chain
    }
    if (A.a12 == 0.0 && A.a11 == 1.0 && A.a22 == 1.0) {
        chain.factors.push_back({FactorKind::Shear, A.a21});
        return chain;
    }
    if (A.a12 == 0.0 && A.a21 == 0.0 && A.a11 > 0.0) {
        chain.factors.push_back({FactorKind::Dilation, A.a11});
        return chain;
    }
    if (std::fmax(std::fabs(A.a11), std::fabs(A.a12)) >= kHalfSqrt2) {
        decompose_core(A, chain.factors);
        return chain;
    }
    // Both |a| and |b| small: with det = 1, the second row of A must then
    // have a large entry, so J*A has a large first row.  A = R_{-pi/2}(J A).
    const Mat2 JA = Mat2::J() * A;
    push(chain.factors, FactorKind::Rotation, -std::numbers::pi / 2);
    decompose_core(JA, chain.factors);
    return chain;
}

} // namespace oscillab
