/// \file qp.cpp
/// \brief Quasi-periodic trig-polynomial implementation.

#include "oscillab/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {

/// Distance from x to the nearest integer.
double dist_to_z(double x) {
    return std::fabs(x - std::round(x));
}

/// Recursive enumeration of lattice vectors with |n|_1 <= N (first nonzero
/// coordinate positive would halve work, but the audit is cheap; enumerate
/// everything except 0).
template <typename Fn>
void for_each_lattice(int d, long long N, Fn&& fn) {
    std::vector<long long> n(d, 0);
    // Odometer over the box [-N, N]^d, filtered by the l1 ball.
    auto rec = [&](auto&& self, int i, long long budget) -> void {
        if (i == d) {
            bool zero = true;
            for (long long v : n) zero = zero && v == 0;
            if (!zero) fn(n);
            return;
        }
        for (long long v = -budget; v <= budget; ++v) {
            n[i] = v;
            self(self, i + 1, budget - std::llabs(v));
        }
    };
    rec(rec, 0, N);
}

} // namespace

DioAuditResult diophantine_audit(const FrequencyData& freq, int N_check) {
    DioAuditResult res;
    res.gamma_fit = std::numeric_limits<double>::infinity();
    for_each_lattice(freq.d(), N_check, [&](const std::vector<long long>& n) {
        double p = 0;
        long long norm1 = 0;
        for (int i = 0; i < freq.d(); ++i) {
            p += static_cast<double>(n[i]) * freq.omega[i];
            norm1 += std::llabs(n[i]);
        }
        const double dist = dist_to_z(p);
        if (dist == 0.0) return; // integer-resonant direction, excluded
        const double fit = std::pow(static_cast<double>(norm1), freq.tau) * dist;
        if (fit < res.gamma_fit) {
            res.gamma_fit = fit;
            res.worst = n;
        }
    });
    res.pass = res.gamma_fit >= freq.gamma;
    return res;
}

FrequencyData golden_frequency() {
    static const FrequencyData cached = [] {
        FrequencyData f;
        f.omega = {1.0, (std::sqrt(5.0) - 1.0) / 2.0};
        f.tau = 2.0;
        f.gamma = 0; // fit below
        FrequencyData probe = f;
        probe.gamma = 0;
        f.gamma = diophantine_audit(probe, 200).gamma_fit;
        return f;
    }();
    return cached;
}

// ---------------------------------------------------------------------------
// KVec

KVec KVec::of(std::initializer_list<long long> v) {
    KVec k;
    k.d = static_cast<int>(v.size());
    int i = 0;
    for (long long x : v) k.c[i++] = x;
    return k;
}

long long KVec::norm1() const {
    long long s = 0;
    for (int i = 0; i < d; ++i) s += std::llabs(c[i]);
    return s;
}

bool KVec::is_zero() const { return norm1() == 0; }

KVec KVec::operator+(const KVec& o) const {
    KVec r = *this;
    for (int i = 0; i < d; ++i) r.c[i] += o.c[i];
    return r;
}
KVec KVec::operator-(const KVec& o) const {
    KVec r = *this;
    for (int i = 0; i < d; ++i) r.c[i] -= o.c[i];
    return r;
}
KVec KVec::operator-() const {
    KVec r = *this;
    for (int i = 0; i < d; ++i) r.c[i] = -r.c[i];
    return r;
}
KVec KVec::operator*(long long m) const {
    KVec r = *this;
    for (int i = 0; i < d; ++i) r.c[i] *= m;
    return r;
}

double pairing(const KVec& k, const FrequencyData& freq) {
    double p = 0;
    for (int i = 0; i < k.d; ++i) {
        p += static_cast<double>(k.c[i]) * freq.omega[i];
    }
    return p;
}

// ---------------------------------------------------------------------------
// TrigPolySl2

double coeff_norm(const SlCoeff& c) {
    // Matrix is [[cE, cJ+cH], [-cJ+cH, -cE]].
    return 2.0 * std::abs(c.cE) + std::abs(c.cJ + c.cH) +
           std::abs(-c.cJ + c.cH);
}

namespace {

/// {J,E,H} components of a real traceless matrix.
SlCoeff decompose_mat(const Mat2& M) {
    return {cplx((M.a12 - M.a21) / 2.0, 0.0), cplx(M.a11, 0.0),
            cplx((M.a12 + M.a21) / 2.0, 0.0)};
}

} // namespace

void TrigPolySl2::add_mode(const KVec& k, const SlCoeff& c) {
    SlCoeff& slot = modes[k];
    slot = slot + c;
}

void TrigPolySl2::add_const(const Mat2& M) {
    KVec zero;
    zero.d = d;
    add_mode(zero, decompose_mat(M));
}

void TrigPolySl2::add_cos(const KVec& k, const Mat2& M) {
    const SlCoeff half = decompose_mat(M) * cplx(0.5, 0.0);
    add_mode(k, half);
    add_mode(-k, half);
}

void TrigPolySl2::add_sin(const KVec& k, const Mat2& M) {
    const SlCoeff c = decompose_mat(M);
    add_mode(k, c * cplx(0.0, -0.5));
    add_mode(-k, c * cplx(0.0, 0.5));
}

TrigPolySl2 TrigPolySl2::operator+(const TrigPolySl2& o) const {
    TrigPolySl2 r = *this;
    r.width = std::min(width, o.width);
    for (const auto& [k, c] : o.modes) r.add_mode(k, c);
    return r;
}

TrigPolySl2 TrigPolySl2::operator*(double s) const {
    TrigPolySl2 r = *this;
    for (auto& [k, c] : r.modes) c = c * cplx(s, 0.0);
    return r;
}

double TrigPolySl2::prune(double tol) {
    double dropped = 0;
    for (auto it = modes.begin(); it != modes.end();) {
        const double nrm = coeff_norm(it->second);
        if (nrm <= tol) {
            dropped += nrm * std::exp(width * static_cast<double>(
                                                  it->first.norm1()));
            it = modes.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

long long TrigPolySl2::max_norm1() const {
    long long m = 0;
    for (const auto& [k, c] : modes) m = std::max(m, k.norm1());
    return m;
}

Mat2 eval(const TrigPolySl2& F, const std::vector<double>& theta,
          double* imag_residue) {
    cplx m11 = 0, m12 = 0, m21 = 0;
    for (const auto& [k, c] : F.modes) {
        double phase = 0;
        for (int i = 0; i < k.d; ++i) {
            phase += static_cast<double>(k.c[i]) * theta[i];
        }
        const cplx e = std::exp(cplx(0.0, phase));
        m11 += c.cE * e;
        m12 += (c.cJ + c.cH) * e;
        m21 += (-c.cJ + c.cH) * e;
    }
    if (imag_residue) {
        *imag_residue = std::max({std::fabs(m11.imag()), std::fabs(m12.imag()),
                                  std::fabs(m21.imag())});
    }
    return {m11.real(), m12.real(), m21.real(), -m11.real()};
}

double majorant_norm(const TrigPolySl2& F, double r) {
    if (r > F.width + 1e-15) {
        throw WidthExceeded("majorant_norm: r exceeds analyticity width");
    }
    double s = 0;
    for (const auto& [k, c] : F.modes) {
        s += coeff_norm(c) * std::exp(r * static_cast<double>(k.norm1()));
    }
    return s;
}

namespace {

/// Shared body of the full/half rotation conjugations: the conjugation angle
/// is scale*<k0,theta>, the w = cE + i*cH component picks up the factor
/// e^{-2i*scale*<k0,theta>}, i.e. a mode shift by -2*scale*k0.
TrigPolySl2 rotation_conjugate_shift(const TrigPolySl2& F, const KVec& shift) {
    TrigPolySl2 out;
    out.d = F.d;
    out.width = F.width;
    // J components are rotation-invariant: they stay at their modes.
    for (const auto& [k, c] : F.modes) {
        if (c.cJ != cplx(0.0)) {
            out.modes[k].cJ += c.cJ;
        }
    }
    // w-components shift.
    std::map<KVec, cplx> u;
    for (const auto& [k, c] : F.modes) {
        const cplx w = c.cE + cplx(0.0, 1.0) * c.cH;
        if (w != cplx(0.0)) u[k + shift] += w;
    }
    // e = (w(k) + conj(w(-k)))/2, h = (w(k) - conj(w(-k)))/(2i).  The
    // reconstruction must run over the symmetric closure of the shifted
    // support: a mode k with only the conjugate partner -k populated still
    // receives the coefficient conj(w(-k))/2 demanded by reality.
    std::set<KVec> support;
    for (const auto& [k, w] : u) {
        support.insert(k);
        support.insert(-k);
    }
    for (const KVec& k : support) {
        cplx w(0.0), wm(0.0);
        if (auto it = u.find(k); it != u.end()) w = it->second;
        if (auto it = u.find(-k); it != u.end()) wm = it->second;
        const cplx e = (w + std::conj(wm)) / 2.0;
        const cplx h = (w - std::conj(wm)) / cplx(0.0, 2.0);
        SlCoeff& slot = out.modes[k];
        slot.cE += e;
        slot.cH += h;
    }
    // Clean up exact zeros introduced by the two passes.
    for (auto it = out.modes.begin(); it != out.modes.end();) {
        if (coeff_norm(it->second) == 0.0) {
            it = out.modes.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

} // namespace

TrigPolySl2 rotation_conjugate(const TrigPolySl2& F, const KVec& k, int sign) {
    return rotation_conjugate_shift(F, k * (-2LL * sign));
}

TrigPolySl2 rotation_conjugate_half(const TrigPolySl2& F, const KVec& k,
                                    int sign) {
    return rotation_conjugate_shift(F, k * (-1LL * sign));
}

TrigPolySl2 const_conjugate(const TrigPolySl2& F, const Mat2& C, int sign) {
    const Mat2 Ci = C.inverse();
    const Mat2& L = (sign > 0) ? C : Ci;
    const Mat2& R = (sign > 0) ? Ci : C;
    TrigPolySl2 out;
    out.d = F.d;
    out.width = F.width;
    for (const auto& [k, c] : F.modes) {
        // Entries of the complex mode matrix.
        const cplx m11 = c.cE, m12 = c.cJ + c.cH, m21 = -c.cJ + c.cH,
                   m22 = -c.cE;
        // L * M * R, entrywise complex.
        const cplx t11 = L.a11 * m11 + L.a12 * m21;
        const cplx t12 = L.a11 * m12 + L.a12 * m22;
        const cplx t21 = L.a21 * m11 + L.a22 * m21;
        const cplx t22 = L.a21 * m12 + L.a22 * m22;
        const cplx r11 = t11 * R.a11 + t12 * R.a21;
        const cplx r12 = t11 * R.a12 + t12 * R.a22;
        const cplx r21 = t21 * R.a11 + t22 * R.a21;
        // Similarity preserves trace, so r22 = -r11 up to roundoff.
        SlCoeff nc;
        nc.cE = r11;
        nc.cJ = (r12 - r21) / 2.0;
        nc.cH = (r12 + r21) / 2.0;
        out.add_mode(k, nc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cocycle integration

Mat2 system_matrix(const QpSystem& sys, double t) {
    std::vector<double> theta(sys.freq.d());
    for (int i = 0; i < sys.freq.d(); ++i) theta[i] = sys.freq.omega[i] * t;
    return sys.constant + eval(sys.pert, theta);
}

Mat2 integrate_cocycle(const QpSystem& sys, double t0, double t1, double dt,
                       double* det_drift) {
    if (dt <= 0) throw std::invalid_argument("integrate_cocycle: dt <= 0");
    const double span = t1 - t0;
    const long long n = std::max<long long>(
        1, static_cast<long long>(std::ceil(std::fabs(span) / dt)));
    const double h = span / static_cast<double>(n);
    Mat2 Phi = Mat2::identity();
    auto rhs = [&](double t, const Mat2& Y) { return system_matrix(sys, t) * Y; };
    double t = t0;
    for (long long i = 0; i < n; ++i) {
        const Mat2 k1 = rhs(t, Phi);
        const Mat2 k2 = rhs(t + h / 2, Phi + k1 * (h / 2));
        const Mat2 k3 = rhs(t + h / 2, Phi + k2 * (h / 2));
        const Mat2 k4 = rhs(t + h, Phi + k3 * h);
        Phi = Phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        t = t0 + span * static_cast<double>(i + 1) / static_cast<double>(n);
    }
    const double drift = std::fabs(Phi.det() - 1.0);
    if (det_drift) *det_drift = drift;
    if (drift > 1e-6) {
        throw StepTooLarge("integrate_cocycle: determinant drift " +
                           std::to_string(drift));
    }
    return Phi;
}

// ---------------------------------------------------------------------------
// Closed-form conjugation chains

Mat2 TimeFactor::value(double t) const {
    if (!is_rotation) return C;
    const double c = std::cos(speed * t), s = std::sin(speed * t);
    return {c, s, -s, c};
}

Mat2 TimeChain::value(double t) const {
    Mat2 P = Mat2::identity();
    for (const TimeFactor& f : factors) P = P * f.value(t);
    return P;
}

Mat2 TimeChain::derivative(double t) const {
    // d/dt of a product: sum over rotation factors of
    // prefix * (speed * J * R_{speed t}) * suffix.
    Mat2 total{0, 0, 0, 0};
    const size_t m = factors.size();
    for (size_t i = 0; i < m; ++i) {
        if (!factors[i].is_rotation || factors[i].speed == 0.0) continue;
        Mat2 term = Mat2::identity();
        for (size_t j = 0; j < m; ++j) {
            Mat2 fj = factors[j].value(t);
            if (j == i) fj = Mat2::J() * fj * factors[i].speed;
            term = term * fj;
        }
        total = total + term;
    }
    return total;
}

double conjugation_residual(const TimeChain& U, const QpSystem& sysA,
                            const QpSystem& sysB, double t) {
    const Mat2 Ut = U.value(t);
    const Mat2 dU = U.derivative(t);
    const Mat2 A = system_matrix(sysA, t);
    const Mat2 B = system_matrix(sysB, t);
    return mat_norm(dU - A * Ut + Ut * B);
}

} // namespace oscillab
