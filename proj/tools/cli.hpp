/// \file cli.hpp
/// \brief Command-line surface: config resolution and command dispatch.
///
/// Split from main() so the tests can drive the parser and the commands
/// in-process.  parse_config resolves a TOML-style config file plus flag
/// overrides into a fully validated RunConfig (flags win); run_command
/// executes one subcommand and returns the process exit code: 0 success,
/// 1 failed assertion/audit, 2 usage error.  Failures are also emitted as
/// one structured JSON object {"error", "message"} on stderr.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oscillab::cli {

/// Fully resolved configuration for one command invocation.
struct RunConfig {
    std::string cmd; ///< "selftest" | "schedule.build" | "schedule.verify" |
                     ///< "perturb" | "evolve" | "kam" | "meta"

    // shared numerics
    double s = 1.0;        ///< Sobolev index (>= 0)
    std::uint64_t seed = 20240817; ///< single pseudorandom source
    int grid_n = 1024;     ///< grid size (power of two >= 16)
    double dt = 1e-3;
    std::string precision = "double"; ///< "double" | "extended"

    // schedule source
    std::string preset;        ///< "demo" | "extreme" | "" (build/load)
    std::string schedule_file; ///< load path ("" = preset or fresh build)
    int depth = 1;
    std::string mode = "relaxed"; ///< "relaxed" | "faithful"
    double eps = 16.0;
    double r = 0.1;
    std::string f_kind = "power_delta"; ///< "power_delta" | "triple_log"
    double delta = 0.75;

    // state and probes
    std::string state = "hermite:0"; ///< gaussian:<re[,im]> | hermite:<n> |
                                     ///< file:<path>
    std::string probes = "auto";     ///< "auto" | comma-separated times
    std::string method = "lift";     ///< "lift" | "magnus"
    double t_end = 0;                ///< magnus horizon (0 = last probe)

    // kam
    int steps = 12;
    double pert_eps = 1e-3; ///< random-perturbation majorant target

    // meta
    std::vector<double> matrix{0, 1, -1, 0}; ///< row-major 2x2
    std::string path = "fast"; ///< "fast" | "reference"

    // outputs
    std::string out;      ///< schedules / Fourier series (JSON)
    std::string out_csv = "evolve.csv";
    std::string out_svg = "evolve.svg";
    std::string out_log = "kam.jsonl";
    std::string out_state; ///< binary grid state ("" = skip)

    /// Positional input of schedule.verify.
    std::string verify_file;
};

/// Resolve args (excluding argv[0]) into a validated config.  Throws
/// UnknownKey / TypeMismatch / MissingRequired; a help request returns a
/// config with cmd == "help" after printing the text.
RunConfig parse_config(const std::vector<std::string>& args);

/// Execute the configured command; never throws (errors become exit codes
/// plus JSON on stderr).
int run_command(const RunConfig& cfg);

/// Convenience wrapper for main(): parse + dispatch with full error
/// mapping (parse failures exit 2).
int run_main(const std::vector<std::string>& args);

} // namespace oscillab::cli
