/// \file cli.cpp
/// \brief Config resolution and command dispatch (see cli.hpp).

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "oscillab/akchain.hpp"
#include "oscillab/errors.hpp"
#include "oscillab/evolve.hpp"
#include "oscillab/grid.hpp"
#include "oscillab/io.hpp"
#include "oscillab/kam.hpp"
#include "oscillab/qp.hpp"
#include "oscillab/schedule.hpp"
#include "oscillab/sl2.hpp"
#include "oscillab/sobolev.hpp"

namespace oscillab::cli {

using io::json;

// ---- config ---------------------------------------------------------------

namespace {

[[noreturn]] void rethrow_mapped(const CLI::ParseError& e) {
    // Map the parser's taxonomy onto the library's config errors.
    if (dynamic_cast<const CLI::ConfigError*>(&e) ||
        dynamic_cast<const CLI::ExtrasError*>(&e))
        throw UnknownKey(e.what());
    if (dynamic_cast<const CLI::RequiredError*>(&e) ||
        dynamic_cast<const CLI::FileError*>(&e))
        throw MissingRequired(e.what());
    throw TypeMismatch(e.what()); // conversion, validation, everything else
}

bool is_pow2(int n) { return n >= 16 && (n & (n - 1)) == 0; }

} // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;

    CLI::App app{"oscillab — metaplectic evolution laboratory"};
    app.set_config("--config", "", "TOML-style key/value config file "
                                   "(flags override file values)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    app.add_option("--s", cfg.s, "Sobolev index s")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed of the single pseudorandom source")
        ->capture_default_str();
    app.add_option("--grid-n", cfg.grid_n, "grid size (power of two >= 16)")
        ->capture_default_str();
    app.add_option("--dt", cfg.dt, "integrator step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    app.add_option("--preset", cfg.preset, "schedule preset")
        ->check(CLI::IsMember({"demo", "extreme"}));
    app.add_option("--schedule", cfg.schedule_file, "schedule JSON to load");
    app.add_option("--depth", cfg.depth, "schedule depth")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--mode", cfg.mode, "schedule mode")
        ->check(CLI::IsMember({"relaxed", "faithful"}))
        ->capture_default_str();
    app.add_option("--eps", cfg.eps, "perturbation majorant budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--r", cfg.r, "analyticity width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--f", cfg.f_kind, "growth-target family")
        ->check(CLI::IsMember({"power_delta", "triple_log"}))
        ->capture_default_str();
    app.add_option("--delta", cfg.delta, "power_delta exponent")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    app.add_option("--state", cfg.state,
                   "initial state: gaussian:<re[,im]> | hermite:<n> | "
                   "file:<path>")
        ->capture_default_str();
    app.add_option("--probes", cfg.probes, "\"auto\" or comma-separated times")
        ->capture_default_str();
    app.add_option("--method", cfg.method, "evolution method")
        ->check(CLI::IsMember({"lift", "magnus"}))
        ->capture_default_str();
    app.add_option("--t-end", cfg.t_end, "magnus horizon (0 = last probe)")
        ->check(CLI::NonNegativeNumber);

    app.add_option("--steps", cfg.steps, "reduction step budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--pert-eps", cfg.pert_eps,
                   "majorant of the seeded random perturbation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    app.add_option("--matrix", cfg.matrix,
                   "row-major 2x2 unit-determinant matrix")
        ->expected(4);
    app.add_option("--path", cfg.path, "metaplectic path")
        ->check(CLI::IsMember({"fast", "reference"}))
        ->capture_default_str();

    app.add_option("--out", cfg.out, "JSON output path");
    app.add_option("--out-csv", cfg.out_csv, "series CSV path")
        ->capture_default_str();
    app.add_option("--out-svg", cfg.out_svg, "series SVG path")
        ->capture_default_str();
    app.add_option("--out-log", cfg.out_log, "reduction JSONL path")
        ->capture_default_str();
    app.add_option("--out-state", cfg.out_state, "binary state output path");

    CLI::App* selftest = app.add_subcommand(
        "selftest", "run the module invariant suites");
    CLI::App* schedule = app.add_subcommand(
        "schedule", "build or verify a conjugation schedule");
    schedule->require_subcommand(1);
    CLI::App* sbuild = schedule->add_subcommand("build", "construct and save");
    CLI::App* sverify = schedule->add_subcommand("verify", "reload and verify");
    sverify->add_option("file", cfg.verify_file, "schedule JSON to verify");
    CLI::App* perturb = app.add_subcommand(
        "perturb", "assemble the quasi-periodic perturbation");
    CLI::App* evolve = app.add_subcommand(
        "evolve", "run an evolution and emit CSV/SVG series");
    CLI::App* kam = app.add_subcommand(
        "kam", "run the almost-reducibility iteration");
    CLI::App* meta = app.add_subcommand(
        "meta", "apply one metaplectic operator (fast vs reference)");
    for (CLI::App* sub : {selftest, schedule, sbuild, sverify, perturb,
                          evolve, kam, meta})
        sub->fallthrough();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        cfg.cmd = "help";
        return cfg;
    } catch (const CLI::ParseError& e) {
        rethrow_mapped(e);
    }

    if (selftest->parsed()) cfg.cmd = "selftest";
    else if (sbuild->parsed()) cfg.cmd = "schedule.build";
    else if (sverify->parsed()) cfg.cmd = "schedule.verify";
    else if (perturb->parsed()) cfg.cmd = "perturb";
    else if (evolve->parsed()) cfg.cmd = "evolve";
    else if (kam->parsed()) cfg.cmd = "kam";
    else cfg.cmd = "meta";

    if (!is_pow2(cfg.grid_n))
        throw TypeMismatch("grid-n: expected a power of two >= 16");

    if (const char* env = std::getenv("OSCILLAB_PRECISION")) {
        cfg.precision = env;
        if (cfg.precision != "double" && cfg.precision != "extended")
            throw TypeMismatch(
                "OSCILLAB_PRECISION: expected 'double' or 'extended'");
    }
    return cfg;
}

// ---- shared command plumbing ----------------------------------------------

namespace {

void emit_error(const std::string& code, const std::string& msg) {
    std::cerr << json{{"error", code}, {"message", msg}}.dump() << "\n";
}

AkSchedule resolve_schedule(const RunConfig& cfg) {
    if (!cfg.schedule_file.empty()) return io::load_schedule(cfg.schedule_file);
    if (cfg.preset == "demo") return demo_preset();
    if (cfg.preset == "extreme") return extreme_preset();
    const FSpec f = cfg.f_kind == "triple_log"
                        ? FSpec::triple_log(cfg.s)
                        : FSpec::power_delta(cfg.s, cfg.delta);
    const ScheduleMode mode = cfg.mode == "faithful" ? ScheduleMode::Faithful
                                                     : ScheduleMode::Relaxed;
    ScheduleOptions opts;
    if (cfg.precision == "extended") opts.precision_bits = 512;
    return build_schedule(golden_frequency(), cfg.s, f, cfg.eps, cfg.r,
                          cfg.depth, mode, opts);
}

GridState make_state(const RunConfig& cfg) {
    const auto colon = cfg.state.find(':');
    const std::string kind = cfg.state.substr(0, colon);
    const std::string arg =
        colon == std::string::npos ? "" : cfg.state.substr(colon + 1);
    try {
        if (kind == "hermite") return GridState::hermite(cfg.grid_n, std::stoi(arg));
        if (kind == "gaussian") {
            double re = 0, im = 0;
            const auto comma = arg.find(',');
            re = std::stod(arg.substr(0, comma));
            if (comma != std::string::npos) im = std::stod(arg.substr(comma + 1));
            return GridState::gaussian(cfg.grid_n, {re, im});
        }
        if (kind == "file") return io::load_state(arg);
    } catch (const std::invalid_argument&) {
        throw TypeMismatch("state: malformed parameter in '" + cfg.state + "'");
    } catch (const std::out_of_range&) {
        throw TypeMismatch("state: parameter out of range in '" + cfg.state + "'");
    }
    throw TypeMismatch("state: expected gaussian:<re[,im]> | hermite:<n> | "
                       "file:<path>, got '" + cfg.state + "'");
}

/// "auto" expands to {0, T_0, 4T_0, ..., T_J, 4T_J}; explicit lists are
/// comma-separated reals.  markers receives the 4T_j subsequence.
std::vector<double> resolve_probes(const RunConfig& cfg,
                                   const AkSchedule& sched,
                                   std::vector<double>& markers) {
    markers.clear();
    if (cfg.probes == "auto") {
        // Aligned times {0, T_j, 4 T_j} for every level whose window is
        // integrable (4 T_j <= 1e6); deeper levels are dropped — their
        // diagnostics come from the closed-form oscillation probe, not from
        // direct integration.
        std::vector<double> out{0.0};
        for (int j = 0; j <= sched.depth(); ++j) {
            const double T = sched.T[static_cast<size_t>(j)].to_double();
            if (!std::isfinite(T) || 4 * T > 1e6) break;
            out.push_back(T);
            out.push_back(4 * T);
            markers.push_back(4 * T);
        }
        if (out.size() == 1)
            throw TypeMismatch(
                "probes: no aligned time of this schedule is within the "
                "integration range (4 T_0 > 1e6); pass explicit --probes");
        return out;
    }
    std::vector<double> out;
    std::stringstream ss(cfg.probes);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw TypeMismatch("probes: '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw MissingRequired("probes: empty list");
    std::sort(out.begin(), out.end());
    return out;
}

Mat2 random_traceless(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng), b = u(rng), c = u(rng);
    return Mat2{a, b, c, -a} * scale;
}

/// Seeded random perturbation with the requested majorant at width r.
/// The support {(1,0), (0,1)} keeps every homological divisor (and every
/// divisor of the quadratic offspring modes) away from the constant part's
/// eigenfrequency 2 xi = 2.9.
TrigPolySl2 random_perturbation(std::mt19937_64& rng, double target_majorant,
                                double r) {
    TrigPolySl2 P;
    P.d = 2;
    P.width = r;
    for (const KVec& k : {KVec::of({1, 0}), KVec::of({0, 1})}) {
        P.add_cos(k, random_traceless(rng, 1.0));
        P.add_sin(k, random_traceless(rng, 1.0));
    }
    P = P * (target_majorant / majorant_norm(P, r));
    return P;
}

// ---- subcommands ----------------------------------------------------------

int cmd_schedule_build(const RunConfig& cfg) {
    const AkSchedule sched = resolve_schedule(cfg);
    const VerificationReport rep = verify_schedule(sched);
    if (!cfg.out.empty()) io::save_schedule(cfg.out, sched);
    json out = io::to_json(rep);
    out["depth"] = sched.depth();
    out["saved"] = cfg.out;
    std::cout << out.dump(2) << "\n";
    return rep.all_pass ? 0 : 1;
}

int cmd_schedule_verify(const RunConfig& cfg) {
    if (cfg.verify_file.empty())
        throw MissingRequired("schedule verify: missing file argument");
    const AkSchedule sched = io::load_schedule(cfg.verify_file);
    const VerificationReport rep = verify_schedule(sched);
    std::cout << io::to_json(rep).dump(2) << "\n";
    return rep.all_pass ? 0 : 1;
}

int cmd_perturb(const RunConfig& cfg) {
    const AkSchedule sched = resolve_schedule(cfg);
    const TrigPolySl2 P = assemble_perturbation(sched, sched.depth());
    if (!cfg.out.empty())
        io::atomic_write(cfg.out, io::to_json(P).dump(2) + "\n");
    const json out = {{"majorant", majorant_norm(P, sched.r)},
                      {"modes", P.modes.size()},
                      {"max_norm1", P.max_norm1()},
                      {"saved", cfg.out}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_evolve(const RunConfig& cfg) {
    const AkSchedule sched = resolve_schedule(cfg);
    const TrigPolySl2 P = assemble_perturbation(sched, sched.depth());
    const QpSystem sys{sched.freq, Mat2::J(), P};
    const GridState psi0 = make_state(cfg);

    std::vector<double> markers;
    const std::vector<double> probes = resolve_probes(cfg, sched, markers);

    RunRecord run;
    if (cfg.method == "magnus") {
        const double horizon = cfg.t_end > 0 ? cfg.t_end : probes.back();
        run = evolve_magnus(sys, psi0, horizon, cfg.dt, cfg.s);
    } else {
        run = evolve_cocycle_lift(sys, psi0, probes, cfg.dt, cfg.s);
    }
    run.markers = markers;
    run.beta = mat_norm(sys.constant) + majorant_norm(P, sched.r);
    run.upsilon = estimate_upsilon(cfg.s, 256);
    const EnvelopeResult env = envelope_check(run, run.beta, run.upsilon);

    io::write_series_csv(cfg.out_csv, run);
    io::write_series_svg(cfg.out_svg, run);
    if (!cfg.out_state.empty()) io::save_state(cfg.out_state, run.final_state);

    const json out = {{"method", run.method},
                      {"samples", run.series.size()},
                      {"psi0_hs", run.psi0_hs},
                      {"final_hs", run.series.back().hs_norm},
                      {"l2_drift", run.l2_drift},
                      {"beta", run.beta},
                      {"upsilon", run.upsilon},
                      {"envelope_pass", env.pass},
                      {"envelope_margin", env.margin},
                      {"csv", cfg.out_csv},
                      {"svg", cfg.out_svg}};
    std::cout << out.dump(2) << "\n";
    return env.pass ? 0 : 1;
}

int cmd_kam(const RunConfig& cfg) {
    QpSystem sys;
    if (!cfg.schedule_file.empty() || !cfg.preset.empty()) {
        const AkSchedule sched = resolve_schedule(cfg);
        sys = QpSystem{sched.freq, Mat2::J(),
                       assemble_perturbation(sched, sched.depth())};
    } else {
        // Seeded random system.  The constant part 1.45 J keeps the
        // eigenfrequency away from every low-order lattice pairing of the
        // golden vector (2 xi = 2 hits <(2,0), omega> exactly for J itself).
        std::mt19937_64 rng(cfg.seed);
        sys = QpSystem{golden_frequency(), Mat2::J() * 1.45,
                       random_perturbation(rng, cfg.pert_eps, cfg.r)};
    }

    KamState st = initial_state(sys);
    // The seeded spectrum is non-resonant by construction; the declared
    // threshold keeps the default eps^{1/15} window from flagging distant
    // lattice pairings as resonances.
    if (cfg.schedule_file.empty() && cfg.preset.empty())
        st.res_threshold = 2.0 * cfg.pert_eps;
    const double eps0 = st.eps;
    for (int l = 0; l < cfg.steps && st.eps > 1e-13 && !st.F.empty(); ++l)
        st = kam_step(st).state;
    io::write_kam_log(cfg.out_log, st.history);

    const bool contracted = st.eps <= std::max(1e-13, 1e-4 * eps0);
    const json out = {{"steps", st.history.size()},
                      {"initial_eps", eps0},
                      {"final_eps", st.eps},
                      {"contracted", contracted},
                      {"log", cfg.out_log}};
    std::cout << out.dump(2) << "\n";
    return contracted ? 0 : 1;
}

int cmd_meta(const RunConfig& cfg) {
    const Mat2 A{cfg.matrix[0], cfg.matrix[1], cfg.matrix[2], cfg.matrix[3]};
    const GridState psi = make_state(cfg);

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const GridState fast = apply_meta(A, psi, MetaPath::Fast);
    const auto t1 = clock::now();
    const GridState ref = apply_meta(A, psi, MetaPath::Reference);
    const auto t2 = clock::now();
    const double ms_fast = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double ms_ref = std::chrono::duration<double, std::milli>(t2 - t1).count();
    const double dist = phase_aligned_distance(fast, ref);

    if (!cfg.out_state.empty())
        io::save_state(cfg.out_state,
                       cfg.path == "reference" ? ref : fast);

    const json out = {{"distance", dist},
                      {"ms_fast", ms_fast},
                      {"ms_reference", ms_ref},
                      {"speedup", ms_ref / ms_fast},
                      {"unitary_defect", std::fabs(fast.l2_norm() - psi.l2_norm())}};
    std::cout << out.dump(2) << "\n";
    return dist <= 1e-8 ? 0 : 1;
}

int cmd_selftest(const RunConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    int failures = 0;
    const auto check = [&](const char* name, auto&& fn) {
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = e.what();
        }
        std::cout << (ok ? "ok   " : "FAIL ") << name
                  << (note.empty() ? "" : "  (" + note + ")") << "\n";
        if (!ok) ++failures;
    };

    check("sl2-determinant", [&] {
        Mat2 M = Mat2::identity();
        for (int i = 0; i < 50; ++i) M = M * expm(random_traceless(rng, 1.0), 0.2);
        return std::fabs(M.det() - 1.0) <= 1e-9;
    });
    check("diophantine-audit", [&] {
        return diophantine_audit(golden_frequency(), 200).pass;
    });
    check("meta-homomorphism", [&] {
        // Mild norms: the composed matrix squeezes the state, and the
        // squeeze width must stay inside the self-dual grid at N = 1024.
        const GridState psi = GridState::hermite(1024, 2);
        for (int i = 0; i < 5; ++i) {
            const Mat2 A = expm(random_traceless(rng, 1.0), 0.5);
            const Mat2 B = expm(random_traceless(rng, 1.0), 0.5);
            const GridState lhs = apply_meta(A * B, psi, MetaPath::Fast);
            const GridState rhs =
                apply_meta(A, apply_meta(B, psi, MetaPath::Fast), MetaPath::Fast);
            if (phase_aligned_distance(lhs, rhs) > 1e-6) return false;
        }
        return true;
    });
    check("meta-fast-vs-reference", [&] {
        const Mat2 A = expm(random_traceless(rng, 1.0), 0.5);
        const GridState psi = GridState::gaussian(1024, {0.3, 0.2});
        return phase_aligned_distance(apply_meta(A, psi, MetaPath::Fast),
                                      apply_meta(A, psi, MetaPath::Reference)) <=
               1e-8;
    });
    check("hermite-eigenphase", [&] {
        const GridState h3 = GridState::hermite(1024, 3);
        const GridState prop = propagate_const(Mat2::J(), 0.7, h3);
        return phase_aligned_distance(prop, h3) <= 1e-6;
    });
    check("upsilon-stabilization", [&] {
        double stab = 0;
        estimate_upsilon(cfg.s, 128, &stab);
        return stab <= 1e-3;
    });
    check("schedule-structural-ledger", [&] {
        // The desk-scale preset fails several asymptotic decay demands by
        // design (reported, not hidden); the structural entries must pass.
        const VerificationReport rep = verify_schedule(demo_preset());
        for (const IneqRecord& e : rep.entries) {
            const bool structural =
                e.name.find("congruence") != std::string::npos ||
                e.name.find("base_lattice") != std::string::npos ||
                e.name.find("z_window") != std::string::npos ||
                e.name.find("dilation_product") != std::string::npos;
            if (structural && !e.pass) return false;
        }
        // The deep preset clears the full applicable ledger.
        return verify_schedule(extreme_preset()).all_pass;
    });
    check("chain-conjugation-residual", [&] {
        const AkSchedule sched = demo_preset();
        const QpSystem sysA{sched.freq, Mat2::J(),
                            assemble_perturbation(sched, sched.depth())};
        const ConjugationChain ch = conjugation_chain(sched, 1);
        const QpSystem sysB{sched.freq, ch.L, ch.tail};
        std::uniform_real_distribution<double> u(0.0, 100.0);
        const double scale = 1 + majorant_norm(sysA.pert, sched.r);
        for (int i = 0; i < 5; ++i)
            if (conjugation_residual(ch.U, sysA, sysB, u(rng)) > 1e-10 * scale)
                return false;
        return true;
    });
    check("kam-contraction", [&] {
        const QpSystem sys{golden_frequency(), Mat2::J() * 1.45,
                           random_perturbation(rng, 1e-3, 0.1)};
        KamState st = initial_state(sys);
        st.res_threshold = 2e-3; // declared: the spectrum is non-resonant
        for (int l = 0; l < 3 && !st.F.empty(); ++l) st = kam_step(st).state;
        return st.eps <= 1e-7;
    });
    check("evolve-flat-conservation", [&] {
        QpSystem sys;
        sys.freq = golden_frequency();
        sys.constant = Mat2::J() * 2.0;
        sys.pert.d = 2;
        sys.pert.width = 0.1;
        GridState psi = GridState::hermite(128, 0);
        const GridState h3 = GridState::hermite(128, 3);
        for (int i = 0; i < 128; ++i)
            psi.v[i] = (psi.v[i] + h3.v[i]) / std::sqrt(2.0);
        const RunRecord run =
            evolve_cocycle_lift(sys, psi, {0.5, 1.5}, 1e-3, 1.0);
        for (const ProbeSample& p : run.series)
            if (std::fabs(p.hs_norm - run.psi0_hs) > 1e-8 * run.psi0_hs)
                return false;
        return true;
    });

    std::cout << (failures == 0 ? "selftest: all passed"
                                : "selftest: " + std::to_string(failures) +
                                      " failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

// ---- dispatch -------------------------------------------------------------

int run_command(const RunConfig& cfg) {
    try {
        if (cfg.cmd == "help") return 0;
        if (cfg.cmd == "selftest") return cmd_selftest(cfg);
        if (cfg.cmd == "schedule.build") return cmd_schedule_build(cfg);
        if (cfg.cmd == "schedule.verify") return cmd_schedule_verify(cfg);
        if (cfg.cmd == "perturb") return cmd_perturb(cfg);
        if (cfg.cmd == "evolve") return cmd_evolve(cfg);
        if (cfg.cmd == "kam") return cmd_kam(cfg);
        if (cfg.cmd == "meta") return cmd_meta(cfg);
        emit_error("UnknownKey", "unknown command: " + cfg.cmd);
        return 2;
    } catch (const UnknownKey& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const TypeMismatch& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const MissingRequired& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const Error& e) {
        emit_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("Internal", e.what());
        return 1;
    }
}

int run_main(const std::vector<std::string>& args) {
    try {
        const RunConfig cfg = parse_config(args);
        return run_command(cfg);
    } catch (const Error& e) {
        emit_error(e.code(), e.what());
        return 2; // every parse_config failure is a usage error
    } catch (const std::exception& e) {
        emit_error("Internal", e.what());
        return 2;
    }
}

} // namespace oscillab::cli
