/// \file grid.cpp
/// \brief Self-dual grid states and the metaplectic engine.

#include "oscillab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr long double kPiL = std::numbers::pi_v<long double>;

// ---------------------------------------------------------------------------
// FFTW plan cache.  Plans are created once per (size, sign) with
// FFTW_ESTIMATE|FFTW_UNALIGNED so they can be executed on any buffers via
// fftw_execute_dft.  The library is used single-threaded.

fftw_plan get_plan(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    const auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cd> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

/// Unnormalized DFT, out[k] = sum_j in[j] e^{sign * 2 pi i j k / n}.
void raw_fft(std::vector<cd>& data, int sign) {
    std::vector<cd> out(data.size());
    fftw_plan p = get_plan(static_cast<int>(data.size()),
                           sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    data.swap(out);
}

/// e^{i phase} with the phase computed and reduced in long double; keeps
/// kernel phases accurate even when the raw argument is ~1e6 rad.
cd cis_l(long double phase) {
    const long double r = std::fmod(phase, 2.0L * kPiL);
    return {static_cast<double>(std::cos(r)), static_cast<double>(std::sin(r))};
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

// ---------------------------------------------------------------------------
// GridState

double GridState::self_dual_halfwidth(int N) {
    return std::sqrt(2.0 * kPi * N) / 2.0;
}

GridState GridState::make(int N) {
    if (!is_pow2(N) || N < 16) {
        throw std::invalid_argument("GridState: N must be a power of two >= 16");
    }
    GridState g;
    g.N = N;
    g.L = self_dual_halfwidth(N);
    g.v.assign(N, cd(0.0));
    return g;
}

GridState GridState::hermite(int N, int n) {
    GridState g = make(N);
    // Stable three-term recurrence for the L2-normalized Hermite functions:
    // h_{m+1}(x) = sqrt(2/(m+1)) x h_m(x) - sqrt(m/(m+1)) h_{m-1}(x).
    const double c0 = std::pow(kPi, -0.25);
    for (int j = 0; j < N; ++j) {
        const double x = g.x(j);
        double hm1 = 0.0;
        double h = c0 * std::exp(-x * x / 2.0);
        for (int m = 0; m < n; ++m) {
            const double hn = std::sqrt(2.0 / (m + 1)) * x * h -
                              std::sqrt(static_cast<double>(m) / (m + 1)) * hm1;
            hm1 = h;
            h = hn;
        }
        g.v[j] = h;
    }
    return g;
}

GridState GridState::gaussian(int N, cd zeta) {
    GridState g = make(N);
    const double c0 = std::pow(kPi, -0.25);
    const double sq2 = std::sqrt(2.0);
    for (int j = 0; j < N; ++j) {
        const double x = g.x(j);
        const cd expo = -x * x / 2.0 + sq2 * zeta * x - zeta * zeta / 2.0 -
                        std::norm(zeta) / 2.0;
        g.v[j] = c0 * std::exp(expo);
    }
    return g;
}

double GridState::l2_norm() const {
    double s = 0;
    for (const cd& z : v) s += std::norm(z);
    return std::sqrt(s * dx());
}

double GridState::tail_fraction() const {
    const int w = std::max(1, N / 100);
    double tail = 0, total = 0;
    for (int j = 0; j < N; ++j) {
        const double m = std::norm(v[j]);
        total += m;
        if (j < w || j >= N - w) tail += m;
    }
    if (total == 0) return 0;
    return std::sqrt(tail / total);
}

void GridState::require_tail(double tol) const {
    const double f = tail_fraction();
    if (f > tol) {
        throw TailEscape("grid tail mass fraction " + std::to_string(f) +
                         " exceeds " + std::to_string(tol));
    }
}

std::complex<double> grid_inner(const GridState& a, const GridState& b) {
    cd s = 0;
    for (int j = 0; j < a.N; ++j) s += std::conj(a.v[j]) * b.v[j];
    return s * a.dx();
}

double phase_aligned_distance(const GridState& a, const GridState& b) {
    // The minimizing phase is arg<a,b>.  Subtracting entrywise at that
    // phase avoids the catastrophic cancellation of the closed form
    // sqrt(|a|^2 + |b|^2 - 2|<a,b>|) for nearly equal states, where the
    // result would bottom out near sqrt(eps) instead of eps.
    const cd ip = grid_inner(b, a); // e^{i phi} = <b,a>/|<b,a>|
    const cd phase =
        std::abs(ip) > 0 ? ip / std::abs(ip) : cd(1.0, 0.0);
    double acc = 0;
    for (int j = 0; j < a.N; ++j) {
        const cd diff = a.v[j] - phase * b.v[j];
        acc += std::norm(diff);
    }
    return std::sqrt(acc * a.dx());
}

// ---------------------------------------------------------------------------
// Primitives

GridState apply_chirp(double kappa, const GridState& psi) {
    GridState out = psi;
    const long double k2 = static_cast<long double>(kappa) / 2.0L;
    for (int j = 0; j < psi.N; ++j) {
        const long double x = psi.x(j);
        out.v[j] *= cis_l(k2 * x * x);
    }
    return out;
}

GridState apply_fourier(const GridState& psi, int direction) {
    // Centered unitary DFT: out_k = N^{-1/2} e^{-i dir pi N/2} (-1)^k *
    // DFT_dir[(-1)^j psi_j](k), which equals the continuum kernel
    // e^{-i dir x_j xi_k} sampled at x_j = xi_j = (j - N/2) dx on the
    // self-dual grid (dx^2 = 2 pi / N).
    GridState out = psi;
    for (int j = 1; j < psi.N; j += 2) out.v[j] = -out.v[j];
    raw_fft(out.v, direction < 0 ? +1 : -1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(psi.N));
    // e^{-i dir pi N / 2}: unity for N divisible by 4 (enforced N >= 16).
    for (int k = 0; k < psi.N; ++k) {
        out.v[k] *= (k % 2 ? -scale : scale);
    }
    return out;
}

GridState apply_dilation(double lambda, const GridState& psi) {
    if (lambda == 0.0) throw ZeroDilation("apply_dilation: lambda = 0");
    GridState src = psi;
    if (lambda < 0) {
        // diag(lambda, 1/lambda) = diag(|lambda|, ...) * (-I); the parity
        // operator flips the grid (periodically, so index 0 maps to itself).
        GridState flip = psi;
        for (int j = 0; j < psi.N; ++j) {
            flip.v[j] = psi.v[(psi.N - j) % psi.N];
        }
        src = flip;
        lambda = -lambda;
    }
    if (lambda == 1.0) return src;
    if (lambda < 1.0) {
        // Compression: the sample points x_j / lambda would leave the grid
        // and wrap around the torus, aliasing in periodic copies.  Dilation
        // commutes with the transform as F D_lambda = D_{1/lambda} F on the
        // self-dual grid, and 1/lambda > 1 keeps the resampling in-range.
        GridState hat = apply_fourier(src, +1);
        hat = apply_dilation(1.0 / lambda, hat);
        return apply_fourier(hat, -1);
    }
    const int N = src.N;
    const double P = 2.0 * src.L; // period
    GridState out = src;
    const double amp = 1.0 / std::sqrt(lambda);
    for (int j = 0; j < N; ++j) {
        // Band-limited periodic interpolation of u at x_j / lambda with the
        // even-N Dirichlet kernel D(t) = sin(N pi t / P)/(N tan(pi t / P)).
        const double xt = src.x(j) / lambda;
        cd acc = 0;
        for (int n = 0; n < N; ++n) {
            const double t = xt - src.x(n);
            const double a = kPi * t / P;
            double w;
            const double s = std::sin(a);
            if (std::fabs(s) < 1e-300) {
                w = 1.0;
            } else {
                w = std::sin(N * a) / (N * std::tan(a));
            }
            acc += src.v[n] * w;
        }
        out.v[j] = amp * acc;
    }
    out.require_tail(1e-6);
    return out;
}

// ---------------------------------------------------------------------------
// Scaled DFT: S[j] = sum_n e^{i sigma (j - N/2)(n - N/2)} v[n].

namespace {

std::vector<cd> scaled_dft_reference(const std::vector<cd>& v, double sigma) {
    const int N = static_cast<int>(v.size());
    const long double sig = sigma;
    std::vector<cd> out(N);
    for (int j = 0; j < N; ++j) {
        const long long jp = j - N / 2;
        cd acc = 0;
        for (int n = 0; n < N; ++n) {
            const long long np = n - N / 2;
            acc += v[n] * cis_l(sig * static_cast<long double>(jp * np));
        }
        out[j] = acc;
    }
    return out;
}

std::vector<cd> scaled_dft_fast(const std::vector<cd>& v, double sigma) {
    // Bluestein: j'n' = (j'^2 + n'^2 - (j'-n')^2)/2 turns the scaled DFT
    // into a convolution with the chirp kernel g_m = e^{-i sigma m^2/2},
    // circularly embedded in length 2N (indices j-n span (-N, N)).
    const int N = static_cast<int>(v.size());
    const int M = 2 * N;
    const long double sig = sigma;
    std::vector<cd> a(M, cd(0.0)), g(M, cd(0.0));
    for (int n = 0; n < N; ++n) {
        const long long np = n - N / 2;
        a[n] = v[n] * cis_l(sig * static_cast<long double>(np * np) / 2.0L);
    }
    for (long long m = -(N - 1); m <= N - 1; ++m) {
        g[(m + M) % M] = cis_l(-sig * static_cast<long double>(m * m) / 2.0L);
    }
    raw_fft(a, -1);
    raw_fft(g, -1);
    for (int i = 0; i < M; ++i) a[i] *= g[i];
    raw_fft(a, +1);
    std::vector<cd> out(N);
    const double inv = 1.0 / M; // FFTW backward transform is unnormalized
    for (int j = 0; j < N; ++j) {
        const long long jp = j - N / 2;
        out[j] = a[j] * inv *
                 cis_l(sig * static_cast<long double>(jp * jp) / 2.0L);
    }
    return out;
}

std::vector<cd> scaled_dft(const std::vector<cd>& v, double sigma,
                           MetaPath path) {
    return path == MetaPath::Reference ? scaled_dft_reference(v, sigma)
                                       : scaled_dft_fast(v, sigma);
}

} // namespace

GridState apply_meta(const Mat2& A, const GridState& psi, MetaPath path,
                     double norm_cap) {
    if (mat_norm(A) > norm_cap) {
        throw NormCapExceeded("apply_meta: ||A|| = " +
                              std::to_string(mat_norm(A)) + " > cap " +
                              std::to_string(norm_cap));
    }
    const double a = A.a11, b = A.a12, c = A.a21, d = A.a22;
    const int N = psi.N;
    GridState out = psi;
    if (std::fabs(a) >= std::fabs(b)) {
        // Frequency-side form: (2 pi a)^{-1/2} Integral e^{i(c x^2/(2a)
        // + x xi / a - b xi^2/(2a))} u^(xi) d xi.  Principal square root:
        // for a < 0 the prefactor is -i (2 pi |a|)^{-1/2}.
        GridState hat = apply_fourier(psi, +1);
        hat = apply_chirp(-b / a, hat);
        const double sigma = 2.0 * kPi / (N * a);
        std::vector<cd> S = scaled_dft(hat.v, sigma, path);
        out.v.swap(S);
        out = apply_chirp(c / a, out);
        const cd pref = (a > 0 ? cd(1.0, 0.0) : cd(0.0, -1.0)) /
                        std::sqrt(2.0 * kPi * std::fabs(a));
        const cd scale = pref * psi.dx();
        for (cd& z : out.v) z *= scale;
    } else {
        // Position-side form: (2 pi i b)^{-1/2} Integral e^{i(d x^2/(2b)
        // - x y / b + a y^2/(2b))} u(y) dy -- the Gaussian-integral reduction
        // of the frequency-side form under the e^{-i x xi} transform
        // convention fixes the cross-term sign.  Principal square root of
        // 2 pi i b gives the prefactor phase e^{-+ i pi/4} for b >< 0.
        GridState w = apply_chirp(a / b, psi);
        const double sigma = -2.0 * kPi / (N * b);
        std::vector<cd> S = scaled_dft(w.v, sigma, path);
        out.v.swap(S);
        out = apply_chirp(d / b, out);
        const double ph = (b > 0 ? -kPi / 4 : kPi / 4);
        const cd pref = std::polar(1.0 / std::sqrt(2.0 * kPi * std::fabs(b)),
                                   ph);
        const cd scale = pref * psi.dx();
        for (cd& z : out.v) z *= scale;
    }
    out.require_tail(1e-6);
    return out;
}

GridState propagate_const(const Mat2& L, double t, const GridState& psi,
                          MetaPath path, double norm_cap) {
    return apply_meta(expm(L, t), psi, path, norm_cap);
}

MetaPlan make_meta_plan(const Mat2& A, MetaPath path) {
    return MetaPlan{A, decompose(A), path};
}

GridState apply_meta_chain(const MetaPlan& plan, const GridState& psi) {
    // M(f1 f2 ... fm) psi = M(f1)(M(f2)(... M(fm) psi)): apply right-to-left.
    GridState state = psi;
    for (auto it = plan.chain.factors.rbegin(); it != plan.chain.factors.rend();
         ++it) {
        switch (it->kind) {
        case FactorKind::Shear:
            state = apply_chirp(it->param, state);
            break;
        case FactorKind::Dilation:
            state = apply_dilation(it->param, state);
            break;
        case FactorKind::Rotation: {
            const double th = it->param;
            if (std::fabs(th - kPi / 2) < 1e-15) {
                // M(R_{pi/2}) = e^{-i pi/4} F in this branch convention
                // (matches the rotation eigenphases e^{-i pi/2 (n+1/2)}).
                state = apply_fourier(state, +1);
                const cd ph = std::polar(1.0, -kPi / 4);
                for (cd& z : state.v) z *= ph;
            } else if (std::fabs(th + kPi / 2) < 1e-15) {
                state = apply_fourier(state, -1);
                const cd ph = std::polar(1.0, kPi / 4);
                for (cd& z : state.v) z *= ph;
            } else {
                state = apply_meta(primitive(FactorKind::Rotation, th), state,
                                   plan.path);
            }
            break;
        }
        }
    }
    return state;
}

} // namespace oscillab
