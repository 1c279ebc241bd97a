/// \file schedule.cpp
/// \brief Schedule construction: seed search, convergent-ladder selection,
/// extended-precision congruence resolution, and the log-space verifier.
///
/// The congruence stages demand absolute resolution below half a lattice
/// spacing on times of size exp(O(m)) *after* a cancellation of O(m) digits
/// inside the pairing <k> of a level-m convergent; the working precision is
/// therefore scaled as ~3 bits per unit of total convergent level, with a
/// fixed guard.  Everything exported to the schedule is either an exact
/// integer (decimal string), a (sign, log) pair, or an angle already reduced
/// mod 2 pi at full precision.

#include "oscillab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "oscillab/errors.hpp"

namespace oscillab {

namespace {

using boost::multiprecision::cpp_int;
using mpf = boost::multiprecision::mpfr_float; // runtime precision

constexpr double kPi = std::numbers::pi;
constexpr double kGoldenConj = 0.6180339887498949; // (sqrt(5)-1)/2
constexpr int kMaxLevel = 2000;         // automatic selection cap
constexpr int kMaxExplicitLevel = 50000; // explicit convergent index cap
constexpr double kInf = std::numeric_limits<double>::infinity();

/// (F_n, F_{n+1}) by fast doubling.
std::pair<cpp_int, cpp_int> fib_pair(long long n) {
    if (n == 0) return {0, 1};
    auto [a, b] = fib_pair(n / 2); // (F_m, F_{m+1}), m = n/2
    const cpp_int c = a * (2 * b - a); // F_{2m}
    const cpp_int d = a * a + b * b;   // F_{2m+1}
    if (n % 2 == 0) return {c, d};
    return {d, c + d};
}

bool is_golden(const FrequencyData& f) {
    return f.d() == 2 && std::fabs(f.omega[0] - 1.0) < 1e-12 &&
           std::fabs(f.omega[1] - kGoldenConj) < 1e-12;
}

LogReal lr(const mpf& x) {
    if (x == 0) return LogReal::zero();
    const double l = static_cast<double>(log(abs(x)));
    return LogReal(x > 0 ? 1 : -1, l);
}

/// ln of a (possibly huge) decimal integer string.
double ln_decimal(const std::string& s) {
    std::size_t pos = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    const std::string digs = s.substr(pos);
    const int nd = static_cast<int>(digs.size());
    const int take = std::min(nd, 18);
    const double mant = std::stod(digs.substr(0, static_cast<std::size_t>(take)));
    return std::log(mant) + (nd - take) * std::log(10.0);
}

cpp_int nearest_int(const mpf& x) {
    const mpf f = floor(x + mpf(0.5));
    return f.convert_to<cpp_int>();
}

/// Reduce x mod 2 pi into (-pi, pi] at full precision, then narrow.
double reduced_angle(const mpf& x, const mpf& two_pi) {
    const mpf k = floor(x / two_pi + mpf(0.5));
    const mpf r = x - k * two_pi;
    return static_cast<double>(r);
}

std::vector<std::string> coord_strings(const std::vector<cpp_int>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const cpp_int& c : v) out.push_back(c.str());
    return out;
}

LogReal norm1_log(const std::vector<cpp_int>& v) {
    cpp_int n = 0;
    for (const cpp_int& c : v) n += abs(c);
    if (n == 0) return LogReal::zero();
    return LogReal::from_log(ln_decimal(n.str()));
}

/// Core builder: every convergent index is already decided.
AkSchedule build_with_levels(const FrequencyData& freq, double s,
                             const FSpec& f_spec, double eps, double r,
                             ScheduleMode mode, const KVec& k0, const KVec& k1,
                             const std::vector<int>& levels, double c1,
                             double c2, int precision_bits,
                             bool enforce_decay) {
    const int depth = static_cast<int>(levels.size());
    if (depth > 0 && !is_golden(freq)) {
        throw InfeasibleDepth(
            "the convergent ladder is defined for the default quadratic "
            "frequency only");
    }

    long long level_sum = 0;
    for (int m : levels) level_sum += m;
    const long long bits =
        precision_bits > 0 ? precision_bits : 1024 + 3 * level_sum;
    mpf::default_precision(
        static_cast<unsigned>(std::max<long long>(64, bits * 302 / 1000)));

    const mpf five(5);
    const mpf ph = (sqrt(five) - 1) / 2;
    const mpf pi_v = 4 * atan(mpf(1));
    const mpf two_pi = 2 * pi_v;

    // Lattice ladder as exact integer coordinates.
    std::vector<std::vector<cpp_int>> kc;
    kc.push_back({cpp_int(k0.c[0]), cpp_int(k0.c[1])});
    kc.push_back({cpp_int(k1.c[0]), cpp_int(k1.c[1])});
    for (int m : levels) {
        if (m < 2 || m > kMaxExplicitLevel) {
            throw InfeasibleDepth("convergent index out of range: " +
                                  std::to_string(m));
        }
        auto [fm1, fm] = fib_pair(m - 1); // (F_{m-1}, F_m)
        // Sign chosen so the pairing is +phat^m.
        if (m % 2 == 1) kc.push_back({-fm1, fm});
        else kc.push_back({fm1, -fm});
    }

    const auto pairing_of = [&](const std::vector<cpp_int>& v) {
        return mpf(v[0].str()) + mpf(v[1].str()) * ph;
    };

    std::vector<mpf> pk;
    for (const auto& v : kc) pk.push_back(pairing_of(v));
    const mpf pk01 =
        pairing_of({kc[0][0] + kc[1][0], kc[0][1] + kc[1][1]});
    if (pk[0] <= 0 || pk[1] <= 0 || pk01 <= 0) {
        throw InfeasibleDepth("seed pairings must be positive");
    }
    for (std::size_t j = 2; j < pk.size(); ++j) {
        if (pk[j] <= 0) throw InfeasibleDepth("non-positive pairing");
    }

    AkSchedule sched;
    sched.mode = mode;
    sched.s = s;
    sched.eps = eps;
    sched.r = r;
    sched.f_spec = f_spec;
    sched.freq = freq;
    sched.relax_c1 = c1;
    sched.relax_c2 = c2;
    for (const auto& v : kc) {
        sched.k.push_back(coord_strings(v));
        sched.pair_k.push_back(lr(pairing_of(v)));
        sched.knorm.push_back(norm1_log(v));
    }
    sched.pair_k01 = lr(pk01);
    sched.level.assign(kc.size(), 0);
    for (int j = 0; j < depth; ++j) sched.level[j + 2] = levels[j];

    // T_0 and the quarter-period base.
    std::vector<mpf> T;
    T.push_back(five * pi_v / (2 * pk01));
    sched.T.push_back(lr(T[0]));
    sched.g_T.push_back(f_spec.g(sched.T[0]));
    sched.Xi.emplace_back();
    sched.cong.emplace_back();
    sched.phi.push_back(LogReal::zero());
    sched.lam.push_back(LogReal::zero());
    sched.z.push_back(LogReal::zero());
    sched.phi_minus_lam.push_back(LogReal::zero());

    for (int j = 1; j <= depth; ++j) {
        const mpf& pkj1 = pk[static_cast<std::size_t>(j) + 1];

        // Mode-decay admission for the freshly selected vector.
        if (enforce_decay) {
            const double lnNext = static_cast<double>(log(pkj1));
            const double lnCur =
                static_cast<double>(log(pk[static_cast<std::size_t>(j)]));
            const double n1Cur = sched.knorm[static_cast<std::size_t>(j)]
                                     .to_double();
            if (mode == ScheduleMode::Relaxed) {
                if (lnNext > c1 * lnCur - c2 * n1Cur + 1e-12) {
                    throw InfeasibleDepth(
                        "selected vector violates the relaxed decay demand");
                }
            } else {
                const double lnN1Next =
                    sched.knorm[static_cast<std::size_t>(j) + 1].lg;
                const double rhs =
                    (n1Cur > 700) ? kInf
                                  : n1Cur + std::log1p(10 * std::exp(-n1Cur));
                if (!(lnN1Next > rhs)) {
                    throw InfeasibleDepth(
                        "selected vector violates the index-growth demand");
                }
            }
        }

        // Congruence chain: align the raw quarter period to the lattices of
        // k_j, ..., k_2 and finally to the base lattice of k_0 + k_1.
        mpf partial = five * pi_v / (2 * pkj1);
        std::vector<LogReal> xi(static_cast<std::size_t>(j));
        std::vector<std::string> cong(static_cast<std::size_t>(j));
        for (int n = j; n >= 1; --n) {
            const mpf sp =
                (n == 1) ? two_pi / pk01
                         : two_pi / pk[static_cast<std::size_t>(n)];
            const cpp_int q = nearest_int(partial / sp);
            const mpf aligned = mpf(q.str()) * sp;
            xi[static_cast<std::size_t>(n) - 1] = lr(aligned - partial);
            cong[static_cast<std::size_t>(n) - 1] = q.str();
            partial = aligned;
        }
        T.push_back(partial);
        sched.T.push_back(lr(partial));
        sched.Xi.push_back(std::move(xi));
        sched.cong.push_back(std::move(cong));
        const double gj = f_spec.g(sched.T.back());
        sched.g_T.push_back(gj);

        // Dilation ladder from the growth exponent.
        const mpf phi = exp(mpf(0.75 * gj) * log(pkj1));
        if (phi <= pkj1) {
            throw InfeasibleDepth(
                "growth exponent leaves no hyperbolic gap at level " +
                std::to_string(j));
        }
        const mpf lam = sqrt((phi - pkj1) * (phi + pkj1));
        const mpf z = sqrt((phi + lam) / pkj1);
        sched.phi.push_back(lr(phi));
        sched.lam.push_back(lr(lam));
        sched.z.push_back(lr(z));
        sched.phi_minus_lam.push_back(lr(pkj1 * pkj1 / (phi + lam)));

        if (enforce_decay && mode == ScheduleMode::Faithful) {
            // Super-exponential pairing decay (uses g at both levels).
            const double tau = freq.tau;
            const double lnCur =
                static_cast<double>(log(pk[static_cast<std::size_t>(j)]));
            const double n1Cur =
                sched.knorm[static_cast<std::size_t>(j)].to_double();
            const double small =
                std::exp(-(1.0 + 1.0 / (36.0 * tau)) * lnCur);
            const double rhs = 0.5 * sched.g_T[static_cast<std::size_t>(j) - 1] *
                                   lnCur -
                               33.0 * r * n1Cur - small;
            const double lhs = 0.5 * gj * static_cast<double>(log(pkj1));
            if (!(lhs < rhs)) {
                throw InfeasibleDepth(
                    "selected vector violates the pairing-decay demand");
            }
        }
    }

    // Probe angles, reduced at build precision.
    for (int j = 0; j <= depth; ++j) {
        const mpf& Tj = T[static_cast<std::size_t>(j)];
        sched.spin.push_back(
            reduced_angle(pk[static_cast<std::size_t>(j) + 1] * Tj, two_pi));
        std::vector<double> row;
        row.push_back(reduced_angle(pk01 * Tj, two_pi));
        for (int n = 2; n <= j; ++n) {
            row.push_back(
                reduced_angle(pk[static_cast<std::size_t>(n)] * Tj, two_pi));
        }
        sched.ret.push_back(std::move(row));
    }

    return sched;
}

} // namespace

LogReal FSpec::value(const LogReal& t) const {
    const double lt = t.lg;
    if (kind == Kind::PowerDelta) return LogReal::from_log(s * (1.0 - delta) * lt);
    const double ee = std::exp(std::exp(1.0));
    const double a = (lt > 50) ? lt : std::log(ee + std::exp(lt));
    const double c = std::log(std::log(a));
    return LogReal::from_log(s * lt - std::log(c));
}

double FSpec::g(const LogReal& t) const {
    if (kind == Kind::PowerDelta) return delta;
    const double lt = t.lg;
    const double ee = std::exp(std::exp(1.0));
    const double a = (lt > 50) ? lt : std::log(ee + std::exp(lt));
    const double c = std::log(std::log(a));
    // g = 1 - ln f / (s ln t) = ln(tripleLog) / (s ln t).
    return std::log(c) / (s * lt);
}

KVec AkSchedule::k_vec(int j) const {
    const auto& coords = k.at(static_cast<std::size_t>(j));
    KVec v;
    v.d = static_cast<int>(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        try {
            v.c[i] = std::stoll(coords[i]);
        } catch (const std::out_of_range&) {
            throw PrecisionExhausted("lattice vector k_" + std::to_string(j) +
                                     " exceeds the 64-bit range");
        }
    }
    return v;
}

const IneqRecord* VerificationReport::find(const std::string& name) const {
    for (const IneqRecord& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

std::pair<KVec, KVec> search_k0k1(const FrequencyData& freq, double eps,
                                  double r, double s, double psi0_gamma,
                                  int K_max, double smallness_cap) {
    (void)s;
    if (freq.d() != 2) {
        throw SearchExhausted("seed search is implemented for planar "
                              "frequencies");
    }
    const double w0 = freq.omega[0], w1 = freq.omega[1];
    double best = kInf;
    KVec best0, best1;
    bool found = false;
    for (long long a = -K_max; a <= K_max; ++a) {
        for (long long b = -K_max; b <= K_max; ++b) {
            const double p0 = a * w0 + b * w1;
            if (p0 <= 0.75 || p0 >= 1.0) continue;
            for (long long c = -K_max; c <= K_max; ++c) {
                for (long long d = -K_max; d <= K_max; ++d) {
                    const double p1 = c * w0 + d * w1;
                    if (p1 <= 0.0 || p1 >= 0.25) continue;
                    const double p01 = p0 + p1;
                    if (p01 <= 0.0) continue;
                    // The combined direction must pair irrationally: a zero
                    // second coordinate makes <k0 + k1> an integer, which
                    // degenerates the base lattice into a resonance.
                    if (b + d == 0) continue;
                    const double n0 = static_cast<double>(
                        std::llabs(a) + std::llabs(b));
                    const double obj =
                        std::fabs(1.0 - p01) * std::exp(2.0 * r * n0) + p1;
                    if (obj >= eps / 64.0) continue;
                    if (std::pow(p1, 0.125) * (1.0 + psi0_gamma) >
                        smallness_cap) {
                        continue;
                    }
                    if (obj < best) {
                        best = obj;
                        best0 = KVec::of({a, b});
                        best1 = KVec::of({c, d});
                        found = true;
                    }
                }
            }
        }
    }
    if (!found) {
        throw SearchExhausted(
            "no admissible seed pair within |k|_inf <= " +
            std::to_string(K_max));
    }
    return {best0, best1};
}

AkSchedule build_schedule(const FrequencyData& freq, double s,
                          const FSpec& f_spec, double eps, double r, int depth,
                          ScheduleMode mode, const ScheduleOptions& opts) {
    if (depth < 0) throw InfeasibleDepth("negative depth");
    if (mode == ScheduleMode::Faithful && depth > 2) {
        throw InfeasibleDepth(
            "the double-exponential ladder exceeds representable lattice "
            "vectors beyond depth 2");
    }
    KVec k0 = opts.k0, k1 = opts.k1;
    if (!opts.has_seeds) {
        std::tie(k0, k1) = search_k0k1(freq, eps, r, s, opts.psi0_gamma);
    }
    const double c1 = opts.relax_c1;
    const double c2 = opts.relax_c2 < 0 ? 2.0 * r : opts.relax_c2;

    if (!opts.levels.empty()) {
        if (static_cast<int>(opts.levels.size()) != depth) {
            throw InfeasibleDepth("explicit level list must match the depth");
        }
        // Explicit levels: decay demands are enforced, inequality failures
        // are reported by the verifier rather than blocking the build.
        return build_with_levels(freq, s, f_spec, eps, r, mode, k0, k1,
                                 opts.levels, c1, c2, opts.precision_bits,
                                 /*enforce_decay=*/true);
    }

    // Automatic ladder: per level, the smallest convergent index that clears
    // the decay demand and every applicable verifier inequality.
    std::vector<int> chosen;
    AkSchedule sched = build_with_levels(freq, s, f_spec, eps, r, mode, k0, k1,
                                         chosen, c1, c2, opts.precision_bits,
                                         true);
    for (int j = 1; j <= depth; ++j) {
        bool ok = false;
        const int start = chosen.empty() ? 2 : chosen.back() + 1;
        for (int m = start; m <= kMaxLevel; ++m) {
            std::vector<int> trial = chosen;
            trial.push_back(m);
            AkSchedule cand;
            try {
                cand = build_with_levels(freq, s, f_spec, eps, r, mode, k0, k1,
                                         trial, c1, c2, opts.precision_bits,
                                         true);
            } catch (const InfeasibleDepth&) {
                continue;
            }
            if (!verify_schedule(cand).all_pass) continue;
            chosen = std::move(trial);
            sched = std::move(cand);
            ok = true;
            break;
        }
        if (!ok) {
            throw InfeasibleDepth(
                "no convergent index up to " + std::to_string(kMaxLevel) +
                " satisfies every demand at depth " + std::to_string(j));
        }
    }
    return sched;
}

namespace {

void add_entry(VerificationReport& rep, std::string name, double lhs_ln,
               double rhs_ln, bool applicable) {
    IneqRecord rec;
    rec.name = std::move(name);
    rec.lhs = LogReal::from_log(lhs_ln);
    rec.rhs = LogReal::from_log(rhs_ln);
    rec.margin = rhs_ln - lhs_ln;
    rec.pass = rec.margin > 0;
    rec.applicable = applicable;
    rep.entries.push_back(std::move(rec));
    if (applicable && !rep.entries.back().pass) rep.all_pass = false;
}

void add_margin(VerificationReport& rep, std::string name, double margin,
                bool applicable) {
    IneqRecord rec;
    rec.name = std::move(name);
    rec.margin = margin;
    rec.pass = margin > 0;
    rec.applicable = applicable;
    rep.entries.push_back(std::move(rec));
    if (applicable && !rep.entries.back().pass) rep.all_pass = false;
}

std::string tag(const char* base, int j) {
    return std::string(base) + "[" + std::to_string(j) + "]";
}
std::string tag(const char* base, int j, int n) {
    return std::string(base) + "[" + std::to_string(j) + "," +
           std::to_string(n) + "]";
}

} // namespace

VerificationReport verify_schedule(const AkSchedule& sched) {
    VerificationReport rep;
    const int J = sched.depth();
    const bool faithful = sched.mode == ScheduleMode::Faithful;
    const double r = sched.r;

    // ln<k_n> with n = 1 meaning the base combination k_0 + k_1 in the
    // congruence-stage numbering, and the plain ladder values elsewhere.
    const auto lnpk = [&](int n) { return sched.pair_k[static_cast<std::size_t>(n)].lg; };
    const auto stage_lnpk = [&](int n) {
        return n == 1 ? sched.pair_k01.lg : lnpk(n);
    };
    const auto n1 = [&](int n) {
        return sched.knorm[static_cast<std::size_t>(n)].to_double();
    };

    for (int j = 1; j <= J; ++j) {
        const double gj = sched.g_T[static_cast<std::size_t>(j)];
        const double lnNext = lnpk(j + 1);
        const auto& xi = sched.Xi[static_cast<std::size_t>(j)];

        // The growth exponent must land strictly inside (0, 1).
        add_margin(rep, tag("growth_exponent", j),
                   std::min(gj, 1.0 - gj), true);

        // Index growth |k_{j+1}|_1 > e^{|k_j|_1} + 10 (faithful demand).
        {
            const double x = n1(j);
            const double rhs_ln =
                (x > 700) ? x : x + std::log1p(10 * std::exp(-x));
            // Entry order is (threshold, actual): pass when the actual norm
            // exceeds the threshold.
            add_entry(rep, tag("decay_faithful_index", j), rhs_ln,
                      sched.knorm[static_cast<std::size_t>(j) + 1].lg,
                      faithful);
        }

        // Super-exponential pairing decay (faithful demand).
        {
            const double tau = sched.freq.tau;
            const double lnCur = lnpk(j);
            const double ex = -(1.0 + 1.0 / (36.0 * tau)) * lnCur;
            const double small = (ex > 700) ? kInf : std::exp(ex);
            const double rhs =
                0.5 * sched.g_T[static_cast<std::size_t>(j) - 1] * lnCur -
                33.0 * r * n1(j) - small;
            add_entry(rep, tag("decay_faithful_rate", j), 0.5 * gj * lnNext,
                      rhs, faithful);
        }

        // Relaxed decay <k_{j+1}> <= <k_j>^{c1} e^{-c2 |k_j|_1}.
        add_entry(rep, tag("decay_relaxed", j), lnNext,
                  sched.relax_c1 * lnpk(j) - sched.relax_c2 * n1(j),
                  !faithful);

        // Chain decay: <k_{j+1}>^{g/33^{j+1-n}} < e^{-2r|k_n|} <k_n>.
        for (int n = 1; n <= j; ++n) {
            const double denom = std::pow(33.0, j + 1 - n);
            add_entry(rep, tag("chain_decay", j, n), (gj / denom) * lnNext,
                      -2.0 * r * n1(n) + lnpk(n), true);
        }

        // Pairing product: <k_{j+1}>^{g/32} < prod_{n<=j} <k_n>.
        {
            double rhs = 0;
            for (int n = 1; n <= j; ++n) rhs += lnpk(n);
            add_entry(rep, tag("pairing_product", j), (gj / 32.0) * lnNext,
                      rhs, true);
        }

        // Quarter period: |<k_{j+1}> T_j - 5 pi / 2| < <k_{j+1}>^{1 - g/32}.
        {
            LogReal sum = LogReal::zero();
            for (const LogReal& x : xi) sum = sum + x;
            const double lhs =
                sum.is_zero() ? -kInf : lnNext + sum.lg;
            add_entry(rep, tag("quarter_period", j), lhs,
                      (1.0 - gj / 32.0) * lnNext, true);
        }

        // Lattice return: dist(<k_n> T_j, 2 pi Z) < <k_n>^{1 - g(T_{n-1})/32}
        // for 2 <= n <= j.  The residual is <k_n> times the defects added
        // after its own alignment stage.
        for (int n = 2; n <= j; ++n) {
            LogReal late = LogReal::zero();
            for (int i = 1; i < n; ++i) late = late + xi[static_cast<std::size_t>(i) - 1];
            const double lhs = late.is_zero() ? -kInf : lnpk(n) + late.lg;
            const double gn = sched.g_T[static_cast<std::size_t>(n) - 1];
            add_entry(rep, tag("lattice_return", j, n), lhs,
                      (1.0 - gn / 32.0) * lnpk(n), true);
        }

        // Sine suppression: |z_n sin(<k_{n+1}> T_j)| < z_n^{-1}
        // <k_{n+1}>^{(5/8) g} for n < j.  The sine argument mod 2 pi is the
        // same late-defect residual, so it is evaluated in log space when it
        // underflows binary64.
        for (int n = 1; n < j; ++n) {
            LogReal late = LogReal::zero();
            for (int i = 1; i <= n; ++i) late = late + xi[static_cast<std::size_t>(i) - 1];
            const LogReal ang =
                LogReal::from_log(lnpk(n + 1)) * late.abs();
            double lnsin;
            if (ang.is_zero()) {
                lnsin = -kInf;
            } else if (ang.lg < std::log(1e-3)) {
                lnsin = ang.lg; // sin(x) = x to 1e-6 relative here
            } else {
                lnsin = std::log(std::fabs(std::sin(ang.to_double())));
            }
            const double lnz = sched.z[static_cast<std::size_t>(n)].lg;
            add_entry(rep, tag("sine_suppression", j, n), lnz + lnsin,
                      -lnz + 0.625 * gj * lnpk(n + 1), true);
        }

        // Dilation products over the lower levels (empty below depth 2).
        if (j >= 2) {
            double lnzsum = 0;
            for (int n = 1; n < j; ++n) lnzsum += sched.z[static_cast<std::size_t>(n)].lg;
            add_entry(rep, tag("dilation_product", j), lnzsum,
                      -(gj / 2200.0) * lnNext, true);
            add_entry(rep, tag("dilation_product_sym", j),
                      (gj / 1100.0) * lnNext + lnzsum, -lnzsum, true);
        }

        // Dilation window: margins in closed form, since the naive
        // difference of logarithms cancels to zero at deep levels.
        {
            const LogReal phi = sched.phi[static_cast<std::size_t>(j)];
            const LogReal lam = sched.lam[static_cast<std::size_t>(j)];
            const LogReal sumpl = phi + lam;
            const double ratio = (sumpl / phi).to_double(); // in (1, 2]
            // 0.5 ln(2 (phi+lam)/phi) is the exact low-side slack; the
            // high-side slack is 0.5 ln(2 phi / (phi+lam)) = 0.5 log1p(q)
            // with q = (phi-lam)/(phi+lam) kept cancellation-free.
            add_margin(rep, tag("z_window_low", j),
                       0.5 * std::log(2.0 * ratio), true);
            // The high-side slack can underflow binary64 at deep levels while
            // remaining structurally positive (lam < phi whenever the build
            // succeeded), so positivity is taken from the log-space ratio.
            const LogReal qlr =
                sched.phi_minus_lam[static_cast<std::size_t>(j)] / sumpl;
            IneqRecord recH;
            recH.name = tag("z_window_high", j);
            recH.margin = 0.5 * std::log1p(qlr.to_double());
            recH.pass = qlr.sign > 0;
            recH.applicable = true;
            if (!recH.pass) rep.all_pass = false;
            rep.entries.push_back(std::move(recH));
        }

        // Congruence sanity: every defect is at most half the spacing of the
        // lattice it aligned to, and T_j reconstructs exactly from the base
        // multiplier.
        for (int n = 1; n <= j; ++n) {
            const double lhs = xi[static_cast<std::size_t>(n) - 1].is_zero()
                                   ? -kInf
                                   : xi[static_cast<std::size_t>(n) - 1].lg;
            add_entry(rep, tag("congruence", j, n), lhs,
                      std::log(kPi) - stage_lnpk(n), true);
        }
        {
            const double lnq =
                ln_decimal(sched.cong[static_cast<std::size_t>(j)][0]);
            const double rebuilt =
                lnq + std::log(2.0 * kPi) - sched.pair_k01.lg;
            const double dev =
                std::fabs(rebuilt - sched.T[static_cast<std::size_t>(j)].lg);
            const double scale =
                std::max(1.0, std::fabs(sched.T[static_cast<std::size_t>(j)].lg));
            add_margin(rep, tag("base_lattice", j), 1e-9 * scale - dev, true);
        }

        // Internal consistency of the dilation ladder: z^2 <k> = phi + lam.
        {
            const double lhs = 2.0 * sched.z[static_cast<std::size_t>(j)].lg +
                               lnNext;
            const LogReal sumpl = sched.phi[static_cast<std::size_t>(j)] +
                                  sched.lam[static_cast<std::size_t>(j)];
            const double dev = std::fabs(lhs - sumpl.lg);
            add_margin(rep, tag("lambda_z_consistency", j), 1e-9 - dev, true);
        }
    }
    return rep;
}

AkSchedule demo_preset() {
    ScheduleOptions opts;
    opts.has_seeds = true;
    opts.k0 = KVec::of({-1, 3});
    opts.k1 = KVec::of({-3, 5});
    opts.levels = {8};
    opts.relax_c1 = 1.0;
    opts.relax_c2 = 0.1;
    return build_schedule(golden_frequency(), 1.0,
                          FSpec::power_delta(1.0, 0.75), 16.0, 0.1, 1,
                          ScheduleMode::Relaxed, opts);
}

AkSchedule extreme_preset() {
    ScheduleOptions opts;
    opts.has_seeds = true;
    opts.k0 = KVec::of({-1, 3});
    opts.k1 = KVec::of({-3, 5});
    opts.levels = {407};
    return build_schedule(golden_frequency(), 1.0,
                          FSpec::power_delta(1.0, 0.75), 16.0, 0.1, 1,
                          ScheduleMode::Relaxed, opts);
}

} // namespace oscillab
