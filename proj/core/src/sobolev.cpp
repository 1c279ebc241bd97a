/// \file sobolev.cpp
/// \brief Sobolev analytics implementation.

#include "oscillab/sobolev.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {
using cd = std::complex<double>;
}

double HermiteState::l2_norm() const {
    double s = 0;
    for (const cd& c : coeffs) s += std::norm(c);
    return std::sqrt(s);
}

HermiteState hermite_analyze(const GridState& psi, int N_h) {
    if (N_h > psi.N / 4) {
        throw std::invalid_argument("hermite_analyze: N_h > N/4");
    }
    HermiteState out;
    out.coeffs.assign(N_h, cd(0.0));
    const double c0 = std::pow(std::numbers::pi, -0.25);
    const double dx = psi.dx();
    for (int j = 0; j < psi.N; ++j) {
        const double x = psi.x(j);
        double hm1 = 0.0;
        double h = c0 * std::exp(-x * x / 2.0);
        const cd w = psi.v[j] * dx;
        for (int n = 0; n < N_h; ++n) {
            out.coeffs[n] += h * w; // h_n real: <h_n, psi> = sum h_n psi dx
            const double hn = std::sqrt(2.0 / (n + 1)) * x * h -
                              std::sqrt(static_cast<double>(n) / (n + 1)) * hm1;
            hm1 = h;
            h = hn;
        }
    }
    double total = 0, tail = 0;
    for (int n = 0; n < N_h; ++n) {
        const double m = std::norm(out.coeffs[n]);
        total += m;
        if (n >= N_h - 8) tail += m;
    }
    if (total > 0 && tail > 1e-10 * total) {
        throw TruncationTail("hermite_analyze: tail fraction " +
                             std::to_string(tail / total) + " at N_h = " +
                             std::to_string(N_h));
    }
    return out;
}

GridState hermite_synthesize(const HermiteState& hst, int N) {
    GridState g = GridState::make(N);
    const int N_h = static_cast<int>(hst.coeffs.size());
    const double c0 = std::pow(std::numbers::pi, -0.25);
    for (int j = 0; j < N; ++j) {
        const double x = g.x(j);
        double hm1 = 0.0;
        double h = c0 * std::exp(-x * x / 2.0);
        cd acc = 0;
        for (int n = 0; n < N_h; ++n) {
            acc += hst.coeffs[n] * h;
            const double hn = std::sqrt(2.0 / (n + 1)) * x * h -
                              std::sqrt(static_cast<double>(n) / (n + 1)) * hm1;
            hm1 = h;
            h = hn;
        }
        g.v[j] = acc;
    }
    return g;
}

double hs_norm(const HermiteState& h, double s) {
    double acc = 0;
    for (size_t n = 0; n < h.coeffs.size(); ++n) {
        acc += std::pow(2.0 * n + 1.0, s) * std::norm(h.coeffs[n]);
    }
    return std::sqrt(acc);
}

double hs_norm_grid(const GridState& psi, double s) {
    const int N_h = std::min(psi.N / 4, 512);
    return hs_norm(hermite_analyze(psi, N_h), s);
}

AuxNorms aux_norms(const GridState& psi, double s) {
    AuxNorms out;
    const double dx = psi.dx();
    double xs = 0;
    for (int j = 0; j < psi.N; ++j) {
        xs += std::pow(std::fabs(psi.x(j)), 2.0 * s) * std::norm(psi.v[j]);
    }
    out.xs = std::sqrt(xs * dx);
    const GridState hat = apply_fourier(psi, +1);
    double ds = 0, ch = 0;
    for (int j = 0; j < hat.N; ++j) {
        const double xi = hat.x(j);
        const double m = std::norm(hat.v[j]);
        ds += std::pow(std::fabs(xi), 2.0 * s) * m;
        ch += std::pow(1.0 + xi * xi, s) * m;
    }
    out.ds = std::sqrt(ds * dx);
    out.classic_hs = std::sqrt(ch * dx);
    return out;
}

double gamma_s(const GridState& psi, double s) {
    if (psi.l2_norm() == 0.0) throw ZeroState("gamma_s: zero state");
    return hs_norm_grid(psi, s) / aux_norms(psi, s).ds;
}

// ---------------------------------------------------------------------------
// Chirp derivative table

ChirpDerivTable chirp_coeffs(int alpha_max) {
    if (alpha_max < 1 || alpha_max > 64) {
        throw std::invalid_argument("chirp_coeffs: alpha_max outside [1,64]");
    }
    ChirpDerivTable t;
    t.rows.push_back({bigint(1)}); // alpha = 1: {p_{1,0}} = {1}
    for (int alpha = 1; alpha < alpha_max; ++alpha) {
        const std::vector<bigint>& prev = t.rows.back();
        const int kmax = (alpha + 1) / 2;
        std::vector<bigint> row(kmax + 1);
        row[0] = 1;
        for (int k = 1; k <= kmax; ++k) {
            bigint v = 0;
            if (k < static_cast<int>(prev.size())) v += prev[k];
            v += bigint(alpha - 2 * k + 2) * prev[k - 1];
            row[k] = v;
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

cd chirp_derivative(const ChirpDerivTable& t, int alpha, double G, double x) {
    const std::vector<bigint>& row = t.row(alpha);
    const cd twoiG(0.0, 2.0 * G);
    cd acc = 0;
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
        acc += row[k].convert_to<double>() *
               std::pow(twoiG, static_cast<double>(alpha - k)) *
               std::pow(x, static_cast<double>(alpha - 2 * k));
    }
    return acc * std::exp(cd(0.0, G * x * x));
}

// ---------------------------------------------------------------------------
// Bound audits

UgkAuditResult ugk_audit(double G, double K, const GridState& u, double s,
                         double C_s, double c_s, double hyp_cap) {
    if (K == 0.0) throw std::invalid_argument("ugk_audit: K = 0");
    UgkAuditResult res;
    // U(x) = e^{iGx^2} u(Kx) = |K|^{-1/2} * chirp(2G) dilation(1/K) u.
    GridState U = apply_dilation(1.0 / K, u);
    U = apply_chirp(2.0 * G, U);
    const double amp = 1.0 / std::sqrt(std::fabs(K));
    for (cd& z : U.v) z *= amp;
    res.measured = hs_norm_grid(U, s);

    const double hs_u = hs_norm_grid(u, s);
    const AuxNorms aux = aux_norms(u, s);
    const double aK = std::fabs(K);

    res.upper.quantity = "ugk_upper";
    res.upper.fitted_constant = C_s;
    res.upper.bound_rhs = C_s / std::sqrt(aK) *
                          std::pow(aK + std::fabs(G / K) + 1.0 / aK, s) * hs_u;
    res.upper.measured = res.measured;
    res.upper.pass = res.measured <= res.upper.bound_rhs * (1.0 + 1e-12);

    const double gam = gamma_s(u, s);
    {
        AuditRecord r;
        r.quantity = "ugk_lower_j";
        r.fitted_constant = c_s;
        r.applicable =
            std::fabs(G / (K * K)) * (1.0 + gam) * (1.0 + gam) <= hyp_cap;
        r.bound_rhs = c_s * (std::pow(aK, s - 0.5) * aux.ds +
                             std::pow(aK, -s - 0.5) * aux.xs);
        r.measured = res.measured;
        r.pass = !r.applicable || res.measured >= r.bound_rhs * (1.0 - 1e-12);
        res.lowers.push_back(r);
    }
    {
        AuditRecord r;
        r.quantity = "ugk_lower_transf";
        r.fitted_constant = c_s;
        r.applicable = std::fabs(G / (K * K)) *
                           std::fmax(1.0, std::pow(aK, 4.0 * s)) <= hyp_cap;
        r.bound_rhs = c_s / std::sqrt(aK) *
                      std::fmin(std::pow(aK, s), std::pow(aK, -s)) * hs_u;
        r.measured = res.measured;
        r.pass = !r.applicable || res.measured >= r.bound_rhs * (1.0 - 1e-12);
        res.lowers.push_back(r);
    }
    {
        AuditRecord r;
        r.quantity = "ugk_lower_k1";
        r.fitted_constant = c_s;
        r.applicable = (K == 1.0) && std::fabs(G) <= hyp_cap;
        r.bound_rhs = c_s * hs_u;
        r.measured = res.measured;
        r.pass = !r.applicable || res.measured >= r.bound_rhs * (1.0 - 1e-12);
        res.lowers.push_back(r);
    }
    return res;
}

PropagatorAuditResult propagator_bound_audit(const Mat2& L, double t, double s,
                                             const std::vector<GridState>& corpus,
                                             double C_s, double c_s) {
    if (L.det() <= 0) throw NotElliptic("propagator_bound_audit: det(L) <= 0");
    PropagatorAuditResult res;
    res.min_lower_ratio = std::numeric_limits<double>::infinity();
    const double rho = std::sqrt(L.det());
    const double a11 = L.a11, a02 = L.a12, a20 = -L.a21;
    const double coef = std::fabs(a20) + std::fabs(a11) + std::fabs(a02);
    const double sinf = std::fabs(std::sin(t * rho) / rho);
    const Mat2 A = expm(L, t);
    for (const GridState& psi : corpus) {
        const double hs0 = hs_norm_grid(psi, s);
        const GridState evolved = apply_meta(A, psi, MetaPath::Fast);
        const double ratio = hs_norm_grid(evolved, s) / hs0;

        AuditRecord up;
        up.quantity = "propagator_upper";
        up.fitted_constant = C_s;
        up.measured = ratio;
        up.bound_rhs = C_s * (1.0 + std::pow(coef, s) * std::pow(sinf, s));
        up.pass = ratio <= up.bound_rhs * (1.0 + 1e-12);
        res.max_upper_ratio = std::fmax(
            res.max_upper_ratio, ratio / (up.bound_rhs / C_s));
        if (!up.pass) ++res.upper_violations;
        res.records.push_back(up);

        AuditRecord lo;
        lo.quantity = "propagator_lower";
        lo.fitted_constant = c_s;
        lo.measured = ratio;
        const double gam = gamma_s(psi, s);
        // The lower bound kicks in when the dilation part of the normalized
        // flow dominates the chirp corrections, quantified through Gamma_s.
        lo.applicable = std::fabs(a02) * sinf >= 4.0 * (1.0 + gam) * (1.0 + gam);
        lo.bound_rhs = c_s * std::pow(std::fabs(a02) * sinf, s) *
                       aux_norms(psi, s).ds / hs0;
        lo.pass = !lo.applicable || ratio >= lo.bound_rhs * (1.0 - 1e-12);
        if (lo.applicable) {
            res.min_lower_ratio =
                std::fmin(res.min_lower_ratio, ratio / (lo.bound_rhs / c_s));
            if (!lo.pass) ++res.lower_violations;
        }
        res.records.push_back(lo);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Upsilon estimation

namespace {

double truncated_upsilon(double s, int M) {
    using Mx = Eigen::MatrixXcd;
    Mx a = Mx::Zero(M, M); // annihilation: a h_n = sqrt(n) h_{n-1}
    for (int n = 1; n < M; ++n) a(n - 1, n) = std::sqrt(double(n));
    const Mx ad = a.adjoint();
    const double is2 = 1.0 / std::sqrt(2.0);
    const Mx X = (a + ad) * is2;
    const Mx D = (a - ad) * cd(0.0, -1.0) * is2; // D = -i d/dx
    Eigen::VectorXd js(M), jsinv(M);
    for (int n = 0; n < M; ++n) {
        js(n) = std::pow(2.0 * n + 1.0, s / 2.0);
        jsinv(n) = 1.0 / js(n);
    }
    const auto comm_norm = [&](const Mx& Q) {
        // [Q, J^{s/2}] J^{-s/2}: with diagonal J^{s/2} the entries are
        // Q_{mn} (js_n - js_m) / js_n.
        Mx B(M, M);
        for (int m = 0; m < M; ++m) {
            for (int n = 0; n < M; ++n) {
                B(m, n) = Q(m, n) * (js(n) - js(m)) * jsinv(n);
            }
        }
        // Largest singular value by power iteration on B^* B.
        const Mx BtB = B.adjoint() * B;
        Eigen::VectorXcd v = Eigen::VectorXcd::Ones(M).normalized();
        double lam = 0;
        for (int it = 0; it < 10000; ++it) {
            Eigen::VectorXcd w = BtB * v;
            const double nw = w.norm();
            if (nw == 0.0) return 0.0;
            w /= nw;
            const double lam_new = std::real(cd(w.adjoint() * (BtB * w)));
            if (std::fabs(lam_new - lam) <= 1e-8 * std::fmax(1.0, lam_new)) {
                return std::sqrt(std::fmax(lam_new, 0.0));
            }
            lam = lam_new;
            v = w;
        }
        throw NotConverged("estimate_upsilon: power iteration stalled");
    };
    const double u1 = comm_norm(X * X);
    const double u2 = comm_norm(X * D);
    const double u3 = comm_norm(D * X);
    const double u4 = comm_norm(D * D);
    return std::max({u1, u2, u3, u4});
}

} // namespace

double estimate_upsilon(double s, int N_h, double* stabilization) {
    if (N_h < 64) throw std::invalid_argument("estimate_upsilon: N_h < 64");
    if (s == 0.0) {
        if (stabilization) *stabilization = 0.0;
        return 0.0;
    }
    const double v1 = truncated_upsilon(s, N_h);
    if (stabilization) {
        const double v2 = truncated_upsilon(s, 2 * N_h);
        *stabilization = std::fabs(v1 - v2) / std::fmax(v2, 1e-300);
    }
    return v1;
}

} // namespace oscillab
