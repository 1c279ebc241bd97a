/// \file akchain.cpp
/// \brief Assembly of the perturbation series and the level-j conjugation
/// chains from a built schedule.

#include "oscillab/akchain.hpp"

#include <cmath>
#include <sstream>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {

/// The two-mode core phi_j J + lam_j (cos(2<k_j,.>) H + sin(2<k_j,.>) E).
/// At <k_j, theta> = 0 this is exactly [[0, phi+lam], [-(phi-lam), 0]], and
/// rotation conjugation by the angle <k_j, theta> transports that constant
/// to every theta -- which is the identity the chain step relies on.
TrigPolySl2 two_mode_core(const AkSchedule& sched, int j) {
    TrigPolySl2 F;
    F.d = sched.d();
    F.width = sched.r;
    const double phi = sched.phi[j].to_double();
    const double lam = sched.lam[j].to_double();
    const KVec twok = sched.k_vec(j) * 2;
    F.add_const(Mat2::J() * phi);
    F.add_cos(twok, Mat2::H() * lam);
    F.add_sin(twok, Mat2::E() * lam);
    return F;
}

} // namespace

Mat2 dilation_factor(const AkSchedule& sched, int n) {
    if (n < 1 || n > sched.depth()) {
        std::ostringstream os;
        os << "dilation index " << n << " outside 1.." << sched.depth();
        throw DepthExceeded(os.str());
    }
    const double z = sched.z[n].to_double();
    return {z, 0, 0, 1.0 / z};
}

TrigPolySl2 leading_term(const AkSchedule& sched, int j) {
    if (j < 0 || j > sched.depth()) {
        std::ostringstream os;
        os << "term index " << j << " outside 0.." << sched.depth()
           << " (phi_" << j << " not in the schedule)";
        throw DepthExceeded(os.str());
    }
    if (j == 0) {
        // The defining rotation conjugation commutes with J, so the term is
        // the constant (<k0+k1> - 1) J.
        TrigPolySl2 F;
        F.d = sched.d();
        F.width = sched.r;
        F.add_const(Mat2::J() * (sched.pair_k01.to_double() - 1.0));
        return F;
    }
    TrigPolySl2 F = two_mode_core(sched, j);
    if (j >= 2) F = const_conjugate(F, dilation_factor(sched, j - 1), +1);
    return F;
}

TrigPolySl2 assemble_perturbation(const AkSchedule& sched, int J) {
    const int top = std::min(J + 1, sched.depth());
    TrigPolySl2 P = leading_term(sched, 0);
    if (top >= 1)
        P = P + rotation_conjugate(leading_term(sched, 1), sched.k_vec(0), +1);
    if (top >= 2) {
        const KVec k01 = sched.k_vec(0) + sched.k_vec(1);
        P = P + rotation_conjugate(leading_term(sched, 2), k01, +1);
        // Deeper terms ride inside the alternating dilation/rotation chain
        // Z_1 R_{<k_2,.>} ... Z_{j-1} R_{<k_j,.>}, innermost factor first.
        for (int m = 3; m <= top; ++m) {
            TrigPolySl2 G = leading_term(sched, m);
            for (int n = m - 2; n >= 1; --n) {
                G = rotation_conjugate(G, sched.k_vec(n + 1), +1);
                G = const_conjugate(G, dilation_factor(sched, n), +1);
            }
            P = P + rotation_conjugate(G, k01, +1);
        }
    }
    const double maj = majorant_norm(P, sched.r);
    if (maj >= sched.eps) {
        std::ostringstream os;
        os << "majorant " << maj << " >= budget " << sched.eps;
        throw NormBudgetExceeded(os.str());
    }
    return P;
}

ConjugationChain conjugation_chain(const AkSchedule& sched, int j) {
    if (j < 1 || j > sched.depth()) {
        std::ostringstream os;
        os << "chain level " << j << " outside 1.." << sched.depth();
        throw DepthExceeded(os.str());
    }
    ConjugationChain chain;
    chain.depth = j;

    TimeFactor base;
    base.is_rotation = true;
    base.speed = sched.pair_k01.to_double();
    chain.U.factors.push_back(base);
    for (int n = 1; n <= j - 1; ++n) {
        TimeFactor zf;
        zf.is_rotation = false;
        zf.C = dilation_factor(sched, n);
        chain.U.factors.push_back(zf);
        TimeFactor rf;
        rf.is_rotation = true;
        rf.speed = sched.pair_k[n + 1].to_double();
        chain.U.factors.push_back(rf);
    }

    // L_j = [[0, phi+lam], [-(phi-lam), 0]]; the lower entry uses the
    // cancellation-free closed form of phi - lam.
    chain.L = Mat2{0, (sched.phi[j] + sched.lam[j]).to_double(),
                   -sched.phi_minus_lam[j].to_double(), 0};

    // Residual perturbation truncated at the schedule depth: the leading
    // term F_{j+1} plus deeper terms inside the alternating chain
    // Z_j R_{<k_{j+1},.>} ... Z_{l-1} R_{<k_l,.>}.  At the final level this
    // is exactly empty.
    chain.tail.d = sched.d();
    chain.tail.width = sched.r;
    if (j + 1 <= sched.depth())
        chain.tail = chain.tail + leading_term(sched, j + 1);
    for (int l = j + 1; l + 1 <= sched.depth(); ++l) {
        TrigPolySl2 G = leading_term(sched, l + 1);
        for (int n = l - 1; n >= j; --n) {
            G = rotation_conjugate(G, sched.k_vec(n + 1), +1);
            G = const_conjugate(G, dilation_factor(sched, n), +1);
        }
        chain.tail = chain.tail + G;
    }
    return chain;
}

} // namespace oscillab
