// Persistence round-trip tests: JSON, JSON-lines, binary states, CSV, SVG.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oscillab/akchain.hpp"
#include "oscillab/errors.hpp"
#include "oscillab/io.hpp"

using namespace oscillab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path p;
    TempDir() : p(fs::temp_directory_path() / "oscillab_io_test") {
        fs::create_directories(p);
    }
    ~TempDir() { fs::remove_all(p); }
    std::string file(const char* name) const { return (p / name).string(); }
};

} // namespace

TEST_CASE("log-scale reals: plain numbers and deep pairs") {
    const LogReal a = LogReal::from_double(3.25);
    const LogReal b = LogReal::from_log(1e4); // value overflows binary64
    const LogReal c = LogReal(-1, -2.0e3);
    const LogReal z;

    const LogReal a2 = io::logreal_from_json(io::logreal_to_json(a));
    CHECK(a2.sign == a.sign);
    CHECK(a2.lg == a.lg); // bit-exact by the serializer's own criterion
    CHECK(io::logreal_to_json(a).is_number());

    for (const LogReal& x : {b, c}) {
        const auto j = io::logreal_to_json(x);
        CHECK(j.is_array()); // |log| > 600: stored as (sign, log) pair
        const LogReal y = io::logreal_from_json(j);
        CHECK(y.sign == x.sign);
        CHECK(y.lg == x.lg);
    }
    CHECK(io::logreal_from_json(io::logreal_to_json(z)).is_zero());
    CHECK_THROWS_AS(io::logreal_from_json(io::json("x")), TypeMismatch);
}

TEST_CASE("Fourier series JSON round trip") {
    TrigPolySl2 F;
    F.d = 2;
    F.width = 0.3;
    F.add_cos(KVec::of({1, -2}), {0, 0.7, -0.2, 0});
    F.add_sin(KVec::of({-1, 3}), {0.1, 0.4, 0.3, -0.1});
    F.add_const(Mat2::J() * 0.05);

    const auto j = io::to_json(F);
    // One-sided storage: 3 stored modes for the 5-mode two-sided support.
    CHECK(j["modes"].size() == 3);
    const TrigPolySl2 G = io::trigpoly_from_json(j);
    CHECK(G.width == F.width);
    CHECK(G.modes.size() == F.modes.size());
    for (const auto& theta :
         {std::vector<double>{0.0, 0.0}, {1.3, -0.7}, {2.9, 4.1}}) {
        const Mat2 a = eval(F, theta), b = eval(G, theta);
        CHECK(mat_norm(a + b * -1.0) <= 1e-14 * (1 + mat_norm(a)));
    }
    CHECK_THROWS_AS(io::trigpoly_from_json(io::json{{"width", 0.1}}),
                    MissingRequired);
}

TEST_CASE("schedule save / load / verify round trip") {
    TempDir tmp;
    const AkSchedule sched = demo_preset();
    const std::string path = tmp.file("sched.json");
    io::save_schedule(path, sched);
    CHECK_FALSE(fs::exists(path + ".tmp")); // atomic: no temp residue
    const AkSchedule back = io::load_schedule(path);

    CHECK(back.depth() == sched.depth());
    CHECK(back.T[1].lg == sched.T[1].lg);
    CHECK(back.z[1].lg == sched.z[1].lg);
    CHECK(back.spin == sched.spin);
    CHECK(back.ret == sched.ret);
    CHECK(back.cong == sched.cong);

    const VerificationReport r1 = verify_schedule(sched);
    const VerificationReport r2 = verify_schedule(back);
    REQUIRE(r1.entries.size() == r2.entries.size());
    CHECK(r1.all_pass == r2.all_pass);
    for (size_t i = 0; i < r1.entries.size(); ++i) {
        CHECK(r1.entries[i].pass == r2.entries[i].pass);
        CHECK(r1.entries[i].margin == r2.entries[i].margin);
    }
    // Identical report implies identical JSON emission too.
    CHECK(io::to_json(r1).dump() == io::to_json(r2).dump());

    CHECK_THROWS_AS(io::load_schedule(tmp.file("absent.json")),
                    MissingRequired);
    io::atomic_write(tmp.file("garbage.json"), "{ not json");
    CHECK_THROWS_AS(io::load_schedule(tmp.file("garbage.json")), TypeMismatch);
}

TEST_CASE("deep schedule survives the (sign, log) encoding") {
    TempDir tmp;
    const AkSchedule sched = extreme_preset();
    const std::string path = tmp.file("deep.json");
    io::save_schedule(path, sched);
    const AkSchedule back = io::load_schedule(path);
    // T_1 ~ e^{196}: the value overflows nothing but its double image
    // cannot carry the log; the pair encoding must keep it bit-exact.
    CHECK(back.T[1].lg == sched.T[1].lg);
    CHECK(back.pair_k[2].lg == sched.pair_k[2].lg);
    CHECK(back.Xi[1][0].lg == sched.Xi[1][0].lg);
    const VerificationReport r1 = verify_schedule(sched);
    const VerificationReport r2 = verify_schedule(back);
    CHECK(io::to_json(r1).dump() == io::to_json(r2).dump());
}

TEST_CASE("grid state binary container") {
    TempDir tmp;
    const GridState psi = GridState::gaussian(128, {0.4, -0.3});
    const std::string path = tmp.file("state.oscl");
    io::save_state(path, psi);
    const GridState back = io::load_state(path);
    CHECK(back.N == psi.N);
    CHECK(back.L == psi.L);
    REQUIRE(back.v.size() == psi.v.size());
    for (size_t i = 0; i < psi.v.size(); ++i)
        CHECK(back.v[i] == psi.v[i]); // bit-exact
    CHECK(fs::file_size(path) == 16 + 16 * 128);

    io::atomic_write(tmp.file("bad.oscl"), "NOPE12345678901234567890");
    CHECK_THROWS_AS(io::load_state(tmp.file("bad.oscl")), TypeMismatch);
}

TEST_CASE("series CSV and SVG emission") {
    RunRecord run;
    run.s = 1.0;
    run.series = {{0.0, 1.0, 1.0, 0.7071, 0.7071},
                  {0.5, 1.25, 1.0, 0.9, 0.8},
                  {2.0, 3.0, 1.0, 2.5, 1.7}};
    run.markers = {0.5};

    const std::string csv = io::series_csv(run);
    CHECK(csv.rfind("t,hs,l2,xs,ds\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    // 17 significant digits: 1/3 must appear in full precision.
    RunRecord r2 = run;
    r2.series[0].hs_norm = 1.0 / 3.0;
    CHECK(io::series_csv(r2).find("0.33333333333333331") != std::string::npos);
    // Determinism: emission is a pure function of the record.
    CHECK(io::series_csv(run) == csv);

    const std::string svg = io::series_svg(run);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos); // marker line

    TempDir tmp;
    io::write_series_csv(tmp.file("run.csv"), run);
    CHECK(io::read_file(tmp.file("run.csv")) == csv);
}

TEST_CASE("reduction log lines") {
    KamHistoryEntry a{1, "nonresonant", KVec::of({0, 0}), 1.0, -13.8, 0.1, 42.0};
    KamHistoryEntry b{2, "resonant", KVec::of({-8, 16}), 0.99, -20.5, 0.09, 57.0};
    const std::string lines = io::kam_log_lines({a, b});
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
    const auto j = io::json::parse(lines.substr(0, lines.find('\n')));
    CHECK(j["l"] == 1);
    CHECK(j["kind"] == "nonresonant");
    CHECK(j["normF_log"] == -13.8);
    const auto j2 = io::json::parse(lines.substr(lines.find('\n') + 1));
    CHECK(j2["k_res"][0] == -8);
    CHECK(j2["k_res"][1] == 16);
}

TEST_CASE("audit record JSON") {
    const AuditRecord rec{"upper", 0.5, 1.0, 1.7, true, true};
    const auto j = io::to_json(rec);
    CHECK(j["quantity"] == "upper");
    CHECK(j["measured"] == 0.5);
    CHECK(j["bound_rhs"] == 1.0);
    CHECK(j["fitted_constant"] == 1.7);
    CHECK(j["pass"] == true);
}
