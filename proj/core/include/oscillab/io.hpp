/// \file io.hpp
/// \brief Persistence and report emission: JSON for schedules, Fourier
/// series, and audit records; JSON-lines for reduction-run logs; a binary
/// container for grid states; CSV and SVG for evolution series.
///
/// All writers go through an atomic temp-file + rename, so a crashed run
/// never leaves a truncated artifact behind.  Log-scale reals serialize as
/// plain JSON numbers whenever that round-trips the stored log-magnitude
/// bit-exactly (always possible while |ln x| <= 600) and as a
/// [sign, log-magnitude] pair beyond that, where the value itself would
/// overflow binary64.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "oscillab/evolve.hpp"
#include "oscillab/grid.hpp"
#include "oscillab/kam.hpp"
#include "oscillab/logreal.hpp"
#include "oscillab/qp.hpp"
#include "oscillab/schedule.hpp"
#include "oscillab/sobolev.hpp"

namespace oscillab::io {

using nlohmann::json;

/// Write `bytes` to `path` atomically (temp file in the same directory,
/// then rename).  Throws TypeMismatch on filesystem failure.
void atomic_write(const std::string& path, const std::string& bytes);

/// Read a whole file; throws MissingRequired when it does not exist.
std::string read_file(const std::string& path);

// ---- log-scale reals ------------------------------------------------------

/// Plain number when sign * e^lg reproduces lg bit-exactly on re-reading,
/// [sign, lg] pair otherwise (in particular whenever |lg| > 600).
json logreal_to_json(const LogReal& x);
LogReal logreal_from_json(const json& j);

// ---- Fourier series -------------------------------------------------------

/// {width, modes: [{k: [..], c: [6 reals]}]} with the reality constraint
/// stored one-sided: only modes with k lexicographically >= 0 appear, and
/// c = [Re cJ, Im cJ, Re cE, Im cE, Re cH, Im cH].
json to_json(const TrigPolySl2& F);
TrigPolySl2 trigpoly_from_json(const json& j);

// ---- audit records --------------------------------------------------------

/// {quantity, measured, bound_rhs, fitted_constant, pass, applicable}.
json to_json(const AuditRecord& rec);

// ---- schedules ------------------------------------------------------------

/// {mode, s, eps, r, k, T, Xi, phi, lam, z, g, ...} plus the full derived
/// ledger (pairings, congruence multipliers, reduced probe phases), so a
/// reloaded schedule verifies and probes identically to the original.
json to_json(const AkSchedule& sched);
AkSchedule schedule_from_json(const json& j);

void save_schedule(const std::string& path, const AkSchedule& sched);
AkSchedule load_schedule(const std::string& path);

/// Verification report as JSON (per-inequality lhs/rhs/margin/pass).
json to_json(const VerificationReport& rep);

// ---- reduction-run logs ---------------------------------------------------

/// JSON lines, one record per step:
/// {l, kind, k_res, normA, normF_log, r_l, N_l}.
std::string kam_log_lines(const std::vector<KamHistoryEntry>& history);
void write_kam_log(const std::string& path,
                   const std::vector<KamHistoryEntry>& history);

// ---- grid states ----------------------------------------------------------

/// Binary container: 16-byte little-endian header (magic "OSCL", uint32 N,
/// float64 L) followed by N interleaved (re, im) float64 pairs.
void save_state(const std::string& path, const GridState& psi);
GridState load_state(const std::string& path);

// ---- evolution series -----------------------------------------------------

/// CSV with header `t,hs,l2,xs,ds`, one row per probe, 17 significant
/// digits (enough to round-trip binary64 exactly).
std::string series_csv(const RunRecord& run);
void write_series_csv(const std::string& path, const RunRecord& run);

/// Line plot of (t, hs) with vertical markers at the run's distinguished
/// times (log-scale y when the series spans more than two decades).
std::string series_svg(const RunRecord& run);
void write_series_svg(const std::string& path, const RunRecord& run);

} // namespace oscillab::io
