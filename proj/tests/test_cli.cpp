#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "evq/core.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

// Runs the CLI through the shell and captures stdout+stderr.
Run evq_cli(const std::string& args, const std::string& env = {}) {
    std::string cmd = env + (env.empty() ? "" : " ") + "\"" EVQ_CLI_PATH "\" " + args + " 2>&1";
    Run r{0, {}};
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("evq_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("solve prints every output with units") {
    auto r = evq_cli("solve --lambda 1 --service-h 1 --plugs 1 --capacity 2");
    CHECK(r.code == 0);
    for (const char* s : {"O1 mean_queue", "O2 mean_wait", "O3 mean_service", "O4 mean_total_time",
                          "O5 energy_per_session", "veh", "kWh", " h\n"})
        CHECK(r.out.find(s) != std::string::npos);
    CHECK(r.out.find("0.333333333333 veh") != std::string::npos);
}

TEST_CASE("solve usage errors exit 2 and name the flag") {
    auto r = evq_cli("solve --lambda 1 --service-h 1 --capacity 2");
    CHECK(r.code == 2);
    CHECK(r.out.find("--plugs") != std::string::npos);
    auto neg = evq_cli("solve --lambda -1 --service-h 1 --plugs 1 --capacity 2");
    CHECK(neg.code == 2);
    CHECK(neg.out.find("--lambda") != std::string::npos);
    auto cap = evq_cli("solve --lambda 1 --service-h 1 --plugs 3 --capacity 2");
    CHECK(cap.code == 2);
    CHECK(evq_cli("").code == 2);
    CHECK(evq_cli("bogus").code == 2);
    CHECK(evq_cli("solve --station S01 --hour 30 --evp 1").code == 2);
    CHECK(evq_cli("solve --station S01 --hour 3 --evp 0").code == 2);
    CHECK(evq_cli("solve --station NOPE --hour 3 --evp 1").code == 2);
}

TEST_CASE("solve from bundled data writes CSV") {
    auto d = scratch("solve");
    auto r = evq_cli("solve --station S24 --hour 17 --evp 0.3 --csv " + (d / "s.csv").string());
    CHECK(r.code == 0);
    CHECK(r.out.find("10 plugs") != std::string::npos);
    auto text = slurp(d / "s.csv");
    CHECK(text.rfind("lambda_vph,", 0) == 0);
}

TEST_CASE("data errors exit 3") {
    auto d = scratch("data");
    std::ofstream(d / "bad.csv") << "id,plugs\nA,1\n";
    auto r = evq_cli("solve --station S01 --hour 3 --evp 1 --stations " + (d / "bad.csv").string());
    CHECK(r.code == 3);
    auto missing = evq_cli("sweep --stations /nonexistent.csv --out " + d.string());
    CHECK(missing.code == 3);
    std::ofstream(d / "cfg.json") << "{\"not_a_key\": 1}";
    auto cfg = evq_cli("sweep --config " + (d / "cfg.json").string() + " --out " + d.string());
    CHECK(cfg.code == 3);
    CHECK(cfg.out.find("not_a_key") != std::string::npos);
}

TEST_CASE("synth reproduces the reference registry") {
    auto d = scratch("synth");
    auto r = evq_cli("synth --stations-like-paper --out " + d.string());
    REQUIRE(r.code == 0);
    for (const char* f : {"stations_north_sydney.csv", "flows_north_sydney.csv", "links_north_sydney.csv",
                          "state_grid.csv", "default.json", "run_manifest.json"})
        CHECK(fs::exists(d / f));
    auto reg = evq::load_station_registry(d / "stations_north_sydney.csv");
    CHECK(reg.plug_histogram() == std::map<int, int>{{1, 7}, {2, 10}, {3, 2}, {4, 3}, {7, 1}, {10, 1}});
    // the bundled data set is exactly what synth emits
    for (const char* f : {"stations_north_sydney.csv", "flows_north_sydney.csv", "links_north_sydney.csv",
                          "state_grid.csv", "default.json"})
        CHECK(slurp(d / f) == slurp(fs::path(EVQ_DATA_DIR) / f));
    CHECK(evq_cli("synth --out " + d.string()).code == 2);
}

TEST_CASE("sweep, couple and grid chain through files with manifests") {
    auto d = scratch("chain");
    std::ofstream(d / "cfg.json") << R"({"evp_grid_percent": [0.05, 0.1], "battery_grid_kwh": [82],
                                         "demand_scenarios": ["OD2016"], "seed": 7})";
    auto cfg = (d / "cfg.json").string();
    auto sw = evq_cli("sweep --out " + d.string(), "EVQ_CONFIG=" + cfg);
    REQUIRE(sw.code == 0);
    CHECK(sw.out.find("1152 cells") != std::string::npos);
    for (const char* f : {"sweep_results.csv", "sweep_summary.csv", "energy_by_station.csv", "energy_by_plugcount.csv"})
        CHECK(fs::exists(d / f));
    auto m = nlohmann::json::parse(slurp(d / "run_manifest.json"));
    CHECK(m["command"] == "sweep");
    CHECK(m["parameters"]["seeds"]["master"] == 7);
    CHECK(m["parameters"]["ev_p_percent"][1] == 0.1);
    CHECK(m["parameters"]["ev_p_fraction"][1] == 0.001);
    CHECK(m["inputs"].contains("config"));
    CHECK(m["inputs"]["stations"].contains("fnv1a64"));

    auto first = slurp(d / "sweep_results.csv");
    REQUIRE(evq_cli("sweep --jobs 2 --out " + d.string(), "EVQ_CONFIG=" + cfg).code == 0);
    CHECK(slurp(d / "sweep_results.csv") == first);

    auto cp = evq_cli("couple --config " + cfg + " --out " + d.string());
    CHECK(cp.code == 0);
    CHECK(fs::exists(d / "congestion_summary.csv"));
    CHECK(fs::exists(d / "link_times.csv"));

    auto gr = evq_cli("grid --charging " + (d / "sweep_summary.csv").string() + " --evp 0.1 --out " + d.string());
    CHECK(gr.code == 0);
    CHECK(fs::exists(d / "grid_overlay.csv"));
    CHECK(gr.out.find("state peak hour(s): 18") != std::string::npos);
    auto gm = nlohmann::json::parse(slurp(d / "run_manifest.json"));
    CHECK(gm["parameters"]["ev_p_fraction"] == 0.001);

    auto bad = evq_cli("grid --charging " + (d / "sweep_summary.csv").string() + " --evp 3 --out " + d.string());
    CHECK(bad.code == 3);
}

TEST_CASE("simulate writes results, trace and intervals") {
    auto d = scratch("sim");
    auto r = evq_cli("simulate --station S05 --evp 0.05 --days 3 --reps 4 --trace " + (d / "trace.csv").string() +
                     " --out " + d.string());
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d / "sim_results.csv"));
    CHECK(fs::exists(d / "sim_hourly.csv"));
    CHECK(fs::exists(d / "sim_ci.csv"));
    CHECK(slurp(d / "trace.csv").rfind("time_h,event,station_id,system_count\n", 0) == 0);
    auto first = slurp(d / "sim_results.csv");
    REQUIRE(evq_cli("simulate --station S05 --evp 0.05 --days 3 --reps 4 --out " + d.string()).code == 0);
    CHECK(slurp(d / "sim_results.csv") == first);
    CHECK(evq_cli("simulate --station S05 --out " + d.string()).code == 2);
    CHECK(evq_cli("simulate --station S05 --evp 1 --reps 0 --out " + d.string()).code == 2);
}
