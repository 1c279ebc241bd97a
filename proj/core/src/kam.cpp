/// \file kam.cpp
/// \brief Almost-reducibility iteration: homological solve, exact
/// conjugation through truncated exponentials, resonant renormalization.

#include "oscillab/kam.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <sstream>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {

constexpr double kDivisorFloor = 1e-14;
constexpr double kContractionFloor = 1e-13;
constexpr int kExpOrder = 8;

std::vector<double> theta_at(const FrequencyData& freq, double t) {
    std::vector<double> th(freq.omega.size());
    for (size_t i = 0; i < th.size(); ++i) th[i] = freq.omega[i] * t;
    return th;
}

Mat2 rot(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, s, -s, c};
}

// ---------------------------------------------------------------------------
// Internal general-matrix trig polynomial.  The exponential of an sl(2)
// series and its products are not sl(2)-valued mode-wise, so the exact
// conjugation runs on unconstrained 2x2 complex coefficients and is folded
// back (and reality-checked) at the end.
// ---------------------------------------------------------------------------

struct M2c {
    cplx m11{}, m12{}, m21{}, m22{};
    M2c operator+(const M2c& o) const {
        return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22};
    }
    M2c operator*(cplx z) const { return {m11 * z, m12 * z, m21 * z, m22 * z}; }
    M2c operator*(const M2c& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    double norm() const {
        return std::abs(m11) + std::abs(m12) + std::abs(m21) + std::abs(m22);
    }
};

using PolyM2 = std::map<KVec, M2c>;

PolyM2 poly_add(const PolyM2& a, const PolyM2& b) {
    PolyM2 r = a;
    for (const auto& [k, c] : b) {
        auto [it, fresh] = r.emplace(k, c);
        if (!fresh) it->second = it->second + c;
    }
    return r;
}

PolyM2 poly_mul(const PolyM2& a, const PolyM2& b, double tol) {
    PolyM2 r;
    for (const auto& [ka, ca] : a) {
        for (const auto& [kb, cb] : b) {
            const M2c p = ca * cb;
            if (p.norm() <= tol) continue;
            const KVec k = ka + kb;
            auto [it, fresh] = r.emplace(k, p);
            if (!fresh) it->second = it->second + p;
        }
    }
    return r;
}

PolyM2 poly_scale(const PolyM2& a, cplx z) {
    PolyM2 r = a;
    for (auto& [k, c] : r) c = c * z;
    return r;
}

/// Exact mode-wise derivative along the flow t -> theta + omega t.
PolyM2 poly_deriv(const PolyM2& a, const FrequencyData& freq) {
    PolyM2 r = a;
    for (auto& [k, c] : r) c = c * cplx(0.0, pairing(k, freq));
    return r;
}

PolyM2 from_sl2(const TrigPolySl2& F) {
    PolyM2 r;
    for (const auto& [k, c] : F.modes)
        r[k] = {c.cE, c.cJ + c.cH, -c.cJ + c.cH, -c.cE};
    return r;
}

PolyM2 from_const(const Mat2& A, int d) {
    PolyM2 r;
    KVec zero;
    zero.d = d;
    r[zero] = {cplx(A.a11), cplx(A.a12), cplx(A.a21), cplx(A.a22)};
    return r;
}

/// Truncated exponential sum_{n<=order} Z^n / n!.
PolyM2 poly_exp(const PolyM2& Z, int d, int order) {
    PolyM2 e;
    KVec zero;
    zero.d = d;
    e[zero] = {1.0, 0.0, 0.0, 1.0};
    PolyM2 term = e;
    for (int n = 1; n <= order; ++n) {
        term = poly_mul(term, Z, 1e-300);
        term = poly_scale(term, cplx(1.0 / n));
        // Drop sub-roundoff dust to keep the support finite.
        for (auto it = term.begin(); it != term.end();)
            it = (it->second.norm() <= 1e-30) ? term.erase(it) : std::next(it);
        if (term.empty()) break;
        e = poly_add(e, term);
    }
    return e;
}

/// Fold a near-sl(2) polynomial back to the constrained representation;
/// reports the largest trace residue encountered (truncation dust).
TrigPolySl2 to_sl2(const PolyM2& p, int d, double width, double* trace_res) {
    TrigPolySl2 F;
    F.d = d;
    F.width = width;
    double worst = 0;
    for (const auto& [k, c] : p) {
        SlCoeff nc;
        nc.cJ = (c.m12 - c.m21) / 2.0;
        nc.cE = (c.m11 - c.m22) / 2.0;
        nc.cH = (c.m12 + c.m21) / 2.0;
        worst = std::max(worst, std::abs(c.m11 + c.m22));
        if (coeff_norm(nc) > 0) F.add_mode(k, nc);
    }
    if (trace_res) *trace_res = worst;
    return F;
}

/// Mode-0 coefficient as a real matrix (imaginary part is roundoff).
Mat2 average_of(const TrigPolySl2& F) {
    KVec zero;
    zero.d = F.d;
    const auto it = F.modes.find(zero);
    if (it == F.modes.end()) return {0, 0, 0, 0};
    const SlCoeff& c = it->second;
    return {c.cE.real(), (c.cJ + c.cH).real(), (-c.cJ + c.cH).real(),
            -c.cE.real()};
}

TrigPolySl2 drop_average(const TrigPolySl2& F) {
    TrigPolySl2 r = F;
    KVec zero;
    zero.d = F.d;
    r.modes.erase(zero);
    return r;
}

/// First-order homological solve in the frame where the constant part is
/// xis * J: mode k's components divide by i<k> (J part) and i(<k> -+ 2 xis)
/// (the two circular components of the E/H plane).  The declared resonant
/// pair (a at k_res, its reality partner b at -k_res) is skipped.
TrigPolySl2 solve_homological(const TrigPolySl2& G, double xis,
                              const FrequencyData& freq, bool exclude,
                              const KVec& kres) {
    const cplx iu(0.0, 1.0);
    TrigPolySl2 Z;
    Z.d = G.d;
    Z.width = G.width;
    for (const auto& [k, c] : G.modes) {
        if (k.is_zero()) continue;
        const double pk = pairing(k, freq);
        const cplx a_g = (c.cE - iu * c.cH) / 2.0;
        const cplx b_g = (c.cE + iu * c.cH) / 2.0;
        cplx zJ{}, za{}, zb{};
        if (std::abs(c.cJ) > 0) {
            if (std::fabs(pk) < kDivisorFloor)
                throw SmallDivisorBlowup("pairing divisor below 1e-14");
            zJ = c.cJ / (iu * pk);
        }
        if (std::abs(a_g) > 0 && !(exclude && k == kres)) {
            const double da = pk - 2.0 * xis;
            if (std::fabs(da) < kDivisorFloor)
                throw SmallDivisorBlowup(
                    "divisor <k> - 2 xi below 1e-14 outside the resonant set");
            za = a_g / (iu * da);
        }
        if (std::abs(b_g) > 0 && !(exclude && k == -kres)) {
            const double db = pk + 2.0 * xis;
            if (std::fabs(db) < kDivisorFloor)
                throw SmallDivisorBlowup(
                    "divisor <k> + 2 xi below 1e-14 outside the resonant set");
            zb = b_g / (iu * db);
        }
        SlCoeff nc;
        nc.cJ = zJ;
        nc.cE = za + zb;
        nc.cH = iu * (za - zb);
        if (coeff_norm(nc) > 0) Z.add_mode(k, nc);
    }
    return Z;
}

/// Exact new perturbation under x = e^Z x': e^{-Z}(A + F(.))e^{Z}
/// - e^{-Z} d/dt e^{Z}, minus the new constant part, folded to sl(2).
TrigPolySl2 conjugate_exact(const Mat2& A, const TrigPolySl2& F,
                            const TrigPolySl2& Z, const Mat2& A_new,
                            const FrequencyData& freq) {
    const int d = F.d;
    PolyM2 Zp = from_sl2(Z);
    PolyM2 EZ = poly_exp(Zp, d, kExpOrder);
    PolyM2 EmZ = poly_exp(poly_scale(Zp, cplx(-1.0)), d, kExpOrder);
    PolyM2 S = poly_add(from_sl2(F), from_const(A, d));
    PolyM2 conj = poly_mul(poly_mul(EmZ, S, 1e-300), EZ, 1e-300);
    PolyM2 drift = poly_mul(EmZ, poly_deriv(EZ, freq), 1e-300);
    PolyM2 newP = poly_add(conj, poly_scale(drift, cplx(-1.0)));
    newP = poly_add(newP, from_const(A_new * -1.0, d));
    TrigPolySl2 out = to_sl2(newP, d, F.width, nullptr);
    return out;
}

KamSnapshot make_snapshot(const KamState& st) {
    KamSnapshot s;
    s.l = st.l;
    s.L = st.A;
    const double m = st.F.empty() ? 0.0 : majorant_norm(st.F, st.r);
    s.P_norm_log = std::log(std::max(m, 1e-300));
    s.eps_log = std::log(std::max(st.eps, 1e-300));
    s.U = st.conj;
    double sup = 0;
    for (int i = 0; i <= 200; ++i)
        sup = std::max(sup, mat_norm(conj_value(st.conj, st.freq, 0.25 * i)));
    s.sup_U = sup;
    s.envelope = std::pow(std::fabs(s.eps_log), 2.0 * st.freq.tau);
    s.envelope_ok = s.sup_U <= s.envelope;
    return s;
}

void enumerate_kvecs(int d, int N, KVec& cur, int dim,
                     long long budget,
                     const std::function<void(const KVec&)>& fn) {
    if (dim == d) {
        if (!cur.is_zero()) fn(cur);
        return;
    }
    for (long long v = -budget; v <= budget; ++v) {
        cur.c[dim] = v;
        enumerate_kvecs(d, N, cur, dim + 1, budget - std::llabs(v), fn);
    }
    cur.c[dim] = 0;
}

} // namespace

Mat2 ConjFactor::value(const FrequencyData& freq, double t) const {
    switch (kind) {
        case Kind::ExpPoly: {
            const Mat2 L = eval(Z, theta_at(freq, t));
            return expm(L, 1.0);
        }
        case Kind::Constant:
            return C;
        case Kind::HalfRotation: {
            double a = 0;
            for (int i = 0; i < k.d; ++i)
                a += static_cast<double>(k.c[i]) * freq.omega[i] * t;
            return rot(a / 2.0);
        }
    }
    return Mat2::identity();
}

Mat2 conj_value(const std::vector<ConjFactor>& factors,
                const FrequencyData& freq, double t) {
    Mat2 U = Mat2::identity();
    for (const ConjFactor& f : factors) U = U * f.value(freq, t);
    return U;
}

KamState initial_state(const QpSystem& sys) {
    KamState st;
    st.freq = sys.freq;
    st.A = sys.constant;
    st.F = sys.pert;
    st.r = sys.pert.width > 0 ? sys.pert.width : 0.1;
    st.r0 = st.r;
    st.eps = sys.pert.empty() ? 0.0 : majorant_norm(sys.pert, st.r);
    return st;
}

std::vector<KVec> resonance_scan(double xi, const FrequencyData& freq, int N,
                                 double threshold) {
    std::vector<KVec> hits;
    KVec cur;
    cur.d = freq.d();
    std::function<void(const KVec&)> fn = [&](const KVec& k) {
        if (std::fabs(2.0 * xi - pairing(k, freq)) < threshold)
            hits.push_back(k);
    };
    enumerate_kvecs(freq.d(), N, cur, 0, N, fn);
    std::sort(hits.begin(), hits.end(), [&](const KVec& a, const KVec& b) {
        const double va = std::fabs(2.0 * xi - pairing(a, freq));
        const double vb = std::fabs(2.0 * xi - pairing(b, freq));
        if (va != vb) return va < vb;
        return a < b;
    });
    return hits;
}

KamStepResult kam_step(const KamState& st) {
    if (st.F.empty() || majorant_norm(st.F, st.r) == 0.0) return {{}, st};
    if (st.A.det() <= 0)
        throw NotElliptic("constant part left the elliptic regime");
    const EllipticData ed = normalize_elliptic(st.A);
    const double xis = ed.negated ? -ed.rho : ed.rho;

    const double r_next = st.r - st.r0 / std::pow(2.0, st.l + 2);
    const double lnEps = std::fabs(std::log(std::max(st.eps, 1e-300)));
    const double N = 2.0 * lnEps / (st.r - r_next);
    const double threshold =
        st.res_threshold > 0 ? st.res_threshold
                             : std::pow(st.eps, 1.0 / 15.0);

    // Split at the truncation range; the tail rides along unsolved.
    TrigPolySl2 F_lo, F_hi;
    F_lo.d = F_hi.d = st.F.d;
    F_lo.width = F_hi.width = st.F.width;
    for (const auto& [k, c] : st.F.modes)
        (static_cast<double>(k.norm1()) <= N ? F_lo : F_hi).modes[k] = c;

    // Resonance detection over the active support of the truncated part.
    KVec kres;
    kres.d = st.F.d;
    bool resonant = false;
    double worst = threshold;
    for (const auto& [k, c] : F_lo.modes) {
        if (k.is_zero()) continue;
        const double v = std::fabs(2.0 * xis - pairing(k, st.freq));
        if (v < worst) {
            worst = v;
            kres = k;
            resonant = true;
        }
    }

    KamStepResult out;
    KamState& ns = out.state;
    ns = st;
    ns.l = st.l + 1;
    ns.r = r_next;

    KamHistoryEntry h;
    h.l = st.l;
    h.normA = mat_norm(st.A);
    h.normF_log = std::log(std::max(majorant_norm(st.F, st.r), 1e-300));
    h.r_l = st.r;
    h.N_l = N;

    double target = 0;
    if (!resonant) {
        h.kind = "nonresonant";
        // Solve in the eigenframe, map the exponent back, apply exactly in
        // the original frame.
        const TrigPolySl2 G = const_conjugate(F_lo, ed.normalizer, -1);
        const TrigPolySl2 Zf =
            solve_homological(G, xis, st.freq, false, kres);
        const TrigPolySl2 Zo = const_conjugate(Zf, ed.normalizer, +1);
        const Mat2 Anew = st.A + average_of(st.F);
        ns.A = Anew;
        ns.F = drop_average(
            conjugate_exact(st.A, st.F, Zo, Anew, st.freq));
        ConjFactor y;
        y.kind = ConjFactor::Kind::ExpPoly;
        y.Z = Zo;
        out.Y.push_back(y);
        target = st.eps * st.eps;
    } else {
        h.kind = "resonant";
        h.k_res = kres;
        // Work in the eigenframe and stay there: Y = C_A e^{Z} R_{<k,.>/2}.
        const TrigPolySl2 G = const_conjugate(st.F, ed.normalizer, -1);
        TrigPolySl2 G_lo;
        G_lo.d = G.d;
        G_lo.width = G.width;
        for (const auto& [k, c] : G.modes)
            if (static_cast<double>(k.norm1()) <= N) G_lo.modes[k] = c;
        const TrigPolySl2 Zf =
            solve_homological(G_lo, xis, st.freq, true, kres);
        const Mat2 frameA = Mat2::J() * xis;
        TrigPolySl2 G1 = conjugate_exact(frameA, G, Zf, frameA, st.freq);
        const TrigPolySl2 G2 = rotation_conjugate_half(G1, kres, -1);
        const Mat2 Anew =
            Mat2::J() * (xis - pairing(kres, st.freq) / 2.0) +
            average_of(G2);
        ns.A = Anew;
        ns.F = drop_average(G2);
        ConjFactor yc;
        yc.kind = ConjFactor::Kind::Constant;
        yc.C = ed.normalizer;
        ConjFactor yz;
        yz.kind = ConjFactor::Kind::ExpPoly;
        yz.Z = Zf;
        ConjFactor yr;
        yr.kind = ConjFactor::Kind::HalfRotation;
        yr.k = kres;
        out.Y = {yc, yz, yr};
        // Target decay of the resonant step (astronomically strong; the
        // measured majorant below dominates in binary64).
        target = st.eps * std::exp(-r_next * std::pow(st.eps,
                                                      -1.0 / (18.0 *
                                                              st.freq.tau)));
    }

    ns.F.width = r_next;
    // Drop sub-quadratic dust (third order and beyond) with its majorant
    // charged to the new bound: the legitimate content of F' is O(eps^2)
    // per mode, three decades above this tolerance.
    const double dropped =
        ns.F.prune(std::max(1e-18, 1e-3 * st.eps * st.eps));
    const double measured =
        (ns.F.empty() ? 0.0 : majorant_norm(ns.F, r_next)) + dropped;
    ns.eps = std::max(target, measured);
    ns.history.push_back(h);
    for (const ConjFactor& y : out.Y) ns.conj.push_back(y);
    return out;
}

std::vector<KamSnapshot> almost_reduce(const QpSystem& sys, int max_steps) {
    KamState st = initial_state(sys);
    std::vector<KamSnapshot> snaps;
    double prev = st.eps;
    int stall = 0;
    for (int step = 0; step < max_steps; ++step) {
        if (st.F.empty() || majorant_norm(st.F, st.r) < kContractionFloor)
            break;
        const KamState before = st;
        KamStepResult res = kam_step(st);
        st = std::move(res.state);
        if (st.history.back().kind == "resonant")
            snaps.push_back(make_snapshot(before));
        const double cur =
            st.F.empty() ? 0.0 : majorant_norm(st.F, st.r);
        if (cur > kContractionFloor && cur >= 0.99 * prev) {
            if (++stall >= 3)
                throw Stalled("no contraction for 3 consecutive steps");
        } else {
            stall = 0;
        }
        prev = cur;
    }
    if (snaps.empty()) snaps.push_back(make_snapshot(st));
    return snaps;
}

} // namespace oscillab
