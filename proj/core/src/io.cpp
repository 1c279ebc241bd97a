/// \file io.cpp
/// \brief Persistence and report emission (see io.hpp).

#include "oscillab/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "oscillab/errors.hpp"

namespace oscillab::io {

namespace fs = std::filesystem;

// ---- files ----------------------------------------------------------------

void atomic_write(const std::string& path, const std::string& bytes) {
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("IoFailure", "cannot open " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error("IoFailure", "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw Error("IoFailure",
                    "rename to " + target.string() + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingRequired("file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- small JSON helpers ---------------------------------------------------

namespace {

const json& require_key(const json& j, const char* key) {
    if (!j.is_object()) throw TypeMismatch("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw MissingRequired(std::string("missing key: ") + key);
    return *it;
}

double get_num(const json& j, const char* key) {
    const json& v = require_key(j, key);
    if (!v.is_number()) throw TypeMismatch(std::string(key) + ": expected a number");
    return v.get<double>();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw TypeMismatch(what + ": " + e.what());
    }
}

json kvec_to_json(const KVec& k) {
    json a = json::array();
    for (int i = 0; i < k.d; ++i) a.push_back(k.c[static_cast<size_t>(i)]);
    return a;
}

std::vector<json> logreal_vec(const std::vector<LogReal>& v) {
    std::vector<json> out;
    out.reserve(v.size());
    for (const LogReal& x : v) out.push_back(logreal_to_json(x));
    return out;
}

std::vector<LogReal> logreal_vec_from(const json& j, const char* key) {
    const json& a = require_key(j, key);
    if (!a.is_array()) throw TypeMismatch(std::string(key) + ": expected an array");
    std::vector<LogReal> out;
    out.reserve(a.size());
    for (const json& e : a) out.push_back(logreal_from_json(e));
    return out;
}

} // namespace

// ---- log-scale reals ------------------------------------------------------

json logreal_to_json(const LogReal& x) {
    if (x.sign == 0) return 0.0;
    const double v = x.to_double();
    // Emit a plain number only when re-reading it reproduces the stored
    // log-magnitude bit-exactly, so save -> load is the identity on the
    // ledger and every derived margin matches.
    if (std::isfinite(v) && v != 0.0 && std::log(std::fabs(v)) == x.lg)
        return v;
    return json::array({x.sign, x.lg});
}

LogReal logreal_from_json(const json& j) {
    if (j.is_number()) return LogReal::from_double(j.get<double>());
    if (j.is_array() && j.size() == 2 && j[0].is_number_integer() &&
        j[1].is_number())
        return LogReal(j[0].get<int>(), j[1].get<double>());
    throw TypeMismatch("log-scale real: expected a number or a [sign, log] pair");
}

// ---- Fourier series -------------------------------------------------------

json to_json(const TrigPolySl2& F) {
    json modes = json::array();
    const KVec zero{{}, F.d};
    for (const auto& [k, c] : F.modes) {
        if (k < zero) continue; // reality constraint stored one-sided
        modes.push_back({{"k", kvec_to_json(k)},
                         {"c", {c.cJ.real(), c.cJ.imag(), c.cE.real(),
                                c.cE.imag(), c.cH.real(), c.cH.imag()}}});
    }
    return {{"width", F.width}, {"d", F.d}, {"modes", modes}};
}

TrigPolySl2 trigpoly_from_json(const json& j) {
    TrigPolySl2 F;
    F.width = get_num(j, "width");
    F.d = static_cast<int>(get_num(j, "d"));
    if (F.d < 1 || F.d > 4) throw TypeMismatch("d: expected 1..4");
    const json& modes = require_key(j, "modes");
    if (!modes.is_array()) throw TypeMismatch("modes: expected an array");
    for (const json& m : modes) {
        const json& kj = require_key(m, "k");
        const json& cj = require_key(m, "c");
        if (!kj.is_array() || static_cast<int>(kj.size()) != F.d)
            throw TypeMismatch("mode k: expected an array of length d");
        if (!cj.is_array() || cj.size() != 6)
            throw TypeMismatch("mode c: expected 6 reals");
        KVec k{{}, F.d};
        for (int i = 0; i < F.d; ++i) {
            if (!kj[static_cast<size_t>(i)].is_number_integer())
                throw TypeMismatch("mode k: expected integers");
            k.c[static_cast<size_t>(i)] = kj[static_cast<size_t>(i)].get<long long>();
        }
        for (const json& x : cj)
            if (!x.is_number()) throw TypeMismatch("mode c: expected numbers");
        const SlCoeff c{{cj[0].get<double>(), cj[1].get<double>()},
                        {cj[2].get<double>(), cj[3].get<double>()},
                        {cj[4].get<double>(), cj[5].get<double>()}};
        F.add_mode(k, c);
        if (!k.is_zero()) // restore the conjugate half of the support
            F.add_mode(-k, {std::conj(c.cJ), std::conj(c.cE), std::conj(c.cH)});
    }
    return F;
}

// ---- audit records --------------------------------------------------------

json to_json(const AuditRecord& rec) {
    return {{"quantity", rec.quantity},
            {"measured", rec.measured},
            {"bound_rhs", rec.bound_rhs},
            {"fitted_constant", rec.fitted_constant},
            {"pass", rec.pass},
            {"applicable", rec.applicable}};
}

// ---- schedules ------------------------------------------------------------

json to_json(const AkSchedule& sched) {
    json j;
    j["mode"] = sched.mode == ScheduleMode::Faithful ? "faithful" : "relaxed";
    j["s"] = sched.s;
    j["eps"] = sched.eps;
    j["r"] = sched.r;
    j["f_spec"] = {{"kind", sched.f_spec.kind == FSpec::Kind::TripleLog
                                ? "triple_log"
                                : "power_delta"},
                   {"s", sched.f_spec.s},
                   {"delta", sched.f_spec.delta}};
    j["freq"] = {{"omega", sched.freq.omega},
                 {"gamma", sched.freq.gamma},
                 {"tau", sched.freq.tau}};
    j["relax_c1"] = sched.relax_c1;
    j["relax_c2"] = sched.relax_c2;
    j["k"] = sched.k;
    j["level"] = sched.level;
    j["pair_k"] = logreal_vec(sched.pair_k);
    j["pair_k01"] = logreal_to_json(sched.pair_k01);
    j["knorm"] = logreal_vec(sched.knorm);
    j["T"] = logreal_vec(sched.T);
    {
        json xi = json::array();
        for (const auto& row : sched.Xi) xi.push_back(logreal_vec(row));
        j["Xi"] = xi;
    }
    j["cong"] = sched.cong;
    j["g"] = sched.g_T;
    j["phi"] = logreal_vec(sched.phi);
    j["lam"] = logreal_vec(sched.lam);
    j["z"] = logreal_vec(sched.z);
    j["phi_minus_lam"] = logreal_vec(sched.phi_minus_lam);
    j["spin"] = sched.spin;
    j["ret"] = sched.ret;
    return j;
}

AkSchedule schedule_from_json(const json& j) {
    AkSchedule s;
    {
        const json& m = require_key(j, "mode");
        if (!m.is_string()) throw TypeMismatch("mode: expected a string");
        const std::string ms = m.get<std::string>();
        if (ms == "faithful")
            s.mode = ScheduleMode::Faithful;
        else if (ms == "relaxed")
            s.mode = ScheduleMode::Relaxed;
        else
            throw TypeMismatch("mode: expected 'faithful' or 'relaxed'");
    }
    s.s = get_num(j, "s");
    s.eps = get_num(j, "eps");
    s.r = get_num(j, "r");
    {
        const json& f = require_key(j, "f_spec");
        const json& kind = require_key(f, "kind");
        if (!kind.is_string()) throw TypeMismatch("f_spec.kind: expected a string");
        const std::string ks = kind.get<std::string>();
        if (ks == "triple_log")
            s.f_spec.kind = FSpec::Kind::TripleLog;
        else if (ks == "power_delta")
            s.f_spec.kind = FSpec::Kind::PowerDelta;
        else
            throw TypeMismatch("f_spec.kind: expected 'triple_log' or 'power_delta'");
        s.f_spec.s = get_num(f, "s");
        s.f_spec.delta = get_num(f, "delta");
    }
    {
        const json& f = require_key(j, "freq");
        const json& om = require_key(f, "omega");
        if (!om.is_array()) throw TypeMismatch("freq.omega: expected an array");
        s.freq.omega = om.get<std::vector<double>>();
        s.freq.gamma = get_num(f, "gamma");
        s.freq.tau = get_num(f, "tau");
    }
    s.relax_c1 = get_num(j, "relax_c1");
    s.relax_c2 = get_num(j, "relax_c2");
    try {
        s.k = require_key(j, "k").get<std::vector<std::vector<std::string>>>();
        s.level = require_key(j, "level").get<std::vector<int>>();
        s.cong =
            require_key(j, "cong").get<std::vector<std::vector<std::string>>>();
        s.g_T = require_key(j, "g").get<std::vector<double>>();
        s.spin = require_key(j, "spin").get<std::vector<double>>();
        s.ret = require_key(j, "ret").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw TypeMismatch(std::string("schedule ledger: ") + e.what());
    }
    s.pair_k = logreal_vec_from(j, "pair_k");
    s.pair_k01 = logreal_from_json(require_key(j, "pair_k01"));
    s.knorm = logreal_vec_from(j, "knorm");
    s.T = logreal_vec_from(j, "T");
    {
        const json& xi = require_key(j, "Xi");
        if (!xi.is_array()) throw TypeMismatch("Xi: expected an array");
        for (const json& row : xi) {
            if (!row.is_array()) throw TypeMismatch("Xi: expected arrays of rows");
            std::vector<LogReal> r;
            for (const json& e : row) r.push_back(logreal_from_json(e));
            s.Xi.push_back(std::move(r));
        }
    }
    s.phi = logreal_vec_from(j, "phi");
    s.lam = logreal_vec_from(j, "lam");
    s.z = logreal_vec_from(j, "z");
    s.phi_minus_lam = logreal_vec_from(j, "phi_minus_lam");
    return s;
}

void save_schedule(const std::string& path, const AkSchedule& sched) {
    atomic_write(path, to_json(sched).dump(2) + "\n");
}

AkSchedule load_schedule(const std::string& path) {
    return schedule_from_json(parse_json(read_file(path), path));
}

json to_json(const VerificationReport& rep) {
    json entries = json::array();
    for (const IneqRecord& e : rep.entries)
        entries.push_back({{"name", e.name},
                           {"lhs", logreal_to_json(e.lhs)},
                           {"rhs", logreal_to_json(e.rhs)},
                           {"margin", e.margin},
                           {"pass", e.pass},
                           {"applicable", e.applicable}});
    return {{"all_pass", rep.all_pass}, {"entries", entries}};
}

// ---- reduction-run logs ---------------------------------------------------

std::string kam_log_lines(const std::vector<KamHistoryEntry>& history) {
    std::string out;
    for (const KamHistoryEntry& h : history) {
        const json line = {{"l", h.l},           {"kind", h.kind},
                           {"k_res", kvec_to_json(h.k_res)},
                           {"normA", h.normA},   {"normF_log", h.normF_log},
                           {"r_l", h.r_l},       {"N_l", h.N_l}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

void write_kam_log(const std::string& path,
                   const std::vector<KamHistoryEntry>& history) {
    atomic_write(path, kam_log_lines(history));
}

// ---- grid states ----------------------------------------------------------

void save_state(const std::string& path, const GridState& psi) {
    std::string bytes;
    bytes.reserve(16 + 16 * static_cast<size_t>(psi.N));
    bytes.append("OSCL", 4);
    const uint32_t n = static_cast<uint32_t>(psi.N);
    bytes.append(reinterpret_cast<const char*>(&n), 4);
    bytes.append(reinterpret_cast<const char*>(&psi.L), 8);
    for (const std::complex<double>& z : psi.v) {
        const double re = z.real(), im = z.imag();
        bytes.append(reinterpret_cast<const char*>(&re), 8);
        bytes.append(reinterpret_cast<const char*>(&im), 8);
    }
    atomic_write(path, bytes);
}

GridState load_state(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 16 || bytes.compare(0, 4, "OSCL") != 0)
        throw TypeMismatch(path + ": not a grid-state file (bad magic)");
    uint32_t n = 0;
    double L = 0;
    std::memcpy(&n, bytes.data() + 4, 4);
    std::memcpy(&L, bytes.data() + 8, 8);
    if (bytes.size() != 16 + 16 * static_cast<size_t>(n))
        throw TypeMismatch(path + ": truncated grid-state payload");
    GridState psi;
    psi.N = static_cast<int>(n);
    psi.L = L;
    psi.v.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        double re = 0, im = 0;
        std::memcpy(&re, bytes.data() + 16 + 16 * i, 8);
        std::memcpy(&im, bytes.data() + 24 + 16 * i, 8);
        psi.v[i] = {re, im};
    }
    return psi;
}

// ---- evolution series -----------------------------------------------------

namespace {

std::string num17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string num6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

} // namespace

std::string series_csv(const RunRecord& run) {
    std::string out = "t,hs,l2,xs,ds\n";
    for (const ProbeSample& p : run.series) {
        out += num17(p.t);
        out += ',';
        out += num17(p.hs_norm);
        out += ',';
        out += num17(p.l2_norm);
        out += ',';
        out += num17(p.xs);
        out += ',';
        out += num17(p.ds);
        out += '\n';
    }
    return out;
}

void write_series_csv(const std::string& path, const RunRecord& run) {
    atomic_write(path, series_csv(run));
}

std::string series_svg(const RunRecord& run) {
    const double W = 800, H = 500, ml = 70, mr = 20, mt = 20, mb = 50;
    double tmin = 0, tmax = 1, ymin = std::numeric_limits<double>::infinity(),
           ymax = -std::numeric_limits<double>::infinity();
    for (const ProbeSample& p : run.series) {
        tmax = std::max(tmax, p.t);
        ymin = std::min(ymin, p.hs_norm);
        ymax = std::max(ymax, p.hs_norm);
    }
    if (!(ymax > ymin)) {
        ymin = ymin - 0.5;
        ymax = ymin + 1.0;
    }
    const bool logy = ymin > 0 && ymax / ymin > 100.0;
    const auto yval = [&](double y) { return logy ? std::log10(y) : y; };
    const double y0 = yval(ymin), y1 = yval(ymax);
    const auto px = [&](double t) {
        return ml + (t - tmin) / (tmax - tmin) * (W - ml - mr);
    };
    const auto py = [&](double y) {
        return H - mb - (yval(y) - y0) / (y1 - y0) * (H - mt - mb);
    };

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
        "height=\"500\" viewBox=\"0 0 800 500\">\n"
        "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    // axes
    svg += "<line x1=\"" + num6(ml) + "\" y1=\"" + num6(H - mb) + "\" x2=\"" +
           num6(W - mr) + "\" y2=\"" + num6(H - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num6(ml) + "\" y1=\"" + num6(mt) + "\" x2=\"" +
           num6(ml) + "\" y2=\"" + num6(H - mb) + "\" stroke=\"black\"/>\n";
    // marker lines (the distinguished probe times)
    for (const double m : run.markers) {
        if (m < tmin || m > tmax) continue;
        svg += "<line x1=\"" + num6(px(m)) + "\" y1=\"" + num6(mt) +
               "\" x2=\"" + num6(px(m)) + "\" y2=\"" + num6(H - mb) +
               "\" stroke=\"#cc3333\" stroke-dasharray=\"4 3\"/>\n";
        svg += "<text x=\"" + num6(px(m) + 3) + "\" y=\"" + num6(mt + 12) +
               "\" font-size=\"11\" fill=\"#cc3333\">t=" + num6(m) +
               "</text>\n";
    }
    // series polyline
    svg += "<polyline fill=\"none\" stroke=\"#2255aa\" stroke-width=\"1.5\" "
           "points=\"";
    for (const ProbeSample& p : run.series)
        svg += num6(px(p.t)) + "," + num6(py(p.hs_norm)) + " ";
    svg += "\"/>\n";
    // axis labels
    svg += "<text x=\"" + num6(W / 2) + "\" y=\"" + num6(H - 12) +
           "\" font-size=\"13\" text-anchor=\"middle\">t</text>\n";
    svg += "<text x=\"16\" y=\"" + num6(H / 2) +
           "\" font-size=\"13\" transform=\"rotate(-90 16 " + num6(H / 2) +
           ")\" text-anchor=\"middle\">" +
           (logy ? "log10 Sobolev norm" : "Sobolev norm") + "</text>\n";
    svg += "<text x=\"" + num6(ml - 6) + "\" y=\"" + num6(H - mb + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num6(ymin) +
           "</text>\n";
    svg += "<text x=\"" + num6(ml - 6) + "\" y=\"" + num6(mt + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num6(ymax) +
           "</text>\n";
    svg += "<text x=\"" + num6(W - mr) + "\" y=\"" + num6(H - mb + 16) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num6(tmax) +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void write_series_svg(const std::string& path, const RunRecord& run) {
    atomic_write(path, series_svg(run));
}

} // namespace oscillab::io
