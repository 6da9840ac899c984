// evq: command-line front end for the charging-queue toolkit.
//
// Exit codes: 0 ok, 2 usage/validation, 3 data, 4 internal.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "evq/evq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

#ifdef EVQ_DATA_DIR
const fs::path kDataDir = EVQ_DATA_DIR;
#else
const fs::path kDataDir = "data";
#endif

struct UsageError : std::runtime_error {
    UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

std::optional<fs::path> config_path(const std::string& flag_value) {
    if (!flag_value.empty()) return fs::path(flag_value);
    if (const char* env = std::getenv("EVQ_CONFIG"); env && *env) return fs::path(env);
    return std::nullopt;
}

evq::Config resolve_config(const std::string& flag_value, json& manifest_inputs) {
    auto path = config_path(flag_value);
    if (!path) return evq::Config{};
    manifest_inputs["config"] = path->string();
    return evq::load_config(*path);
}

std::uint64_t file_hash(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return evq::fnv1a(ss.str());
}

json describe_inputs(const json& paths) {
    json out = json::object();
    for (auto it = paths.begin(); it != paths.end(); ++it) {
        const std::string p = it.value().get<std::string>();
        std::ostringstream h;
        h << std::hex << std::setw(16) << std::setfill('0') << file_hash(p);
        out[it.key()] = {{"path", p}, {"fnv1a64", h.str()}};
    }
    return out;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw evq::DataError(p.string() + ": cannot open for writing");
    return os;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& inputs, json parameters,
                    const json& outputs, std::chrono::steady_clock::time_point started) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["inputs"] = describe_inputs(inputs);
    m["parameters"] = std::move(parameters);
    m["outputs"] = outputs;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    auto os = open_out(dir / "run_manifest.json");
    os << m.dump(2) << '\n';
}

double require_percent(const std::string& flag, double pct) {
    if (!(pct > 0.0) || pct > 100.0) throw UsageError(flag, "penetration must lie in (0, 100] percent");
    return evq::percent_to_fraction(pct);
}

evq::DemandScenario scenario_flag(const std::string& flag, const std::string& v) {
    try {
        return evq::parse_scenario(v);
    } catch (const std::invalid_argument& e) {
        throw UsageError(flag, e.what());
    }
}

const evq::HourlyFlowSeries& flows_for_station(const std::map<std::string, evq::HourlyFlowSeries>& flows,
                                               const evq::Station& st) {
    auto it = flows.find(st.link_id);
    if (it == flows.end())
        throw evq::ValidationError("link_id", "station '" + st.id + "' references link '" + st.link_id + "' without flows");
    return it->second;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::optional<double> lambda, service_h, power;
    std::optional<int> plugs, capacity;
    std::string station, stations = (kDataDir / "stations_north_sydney.csv").string(),
                         flows = (kDataDir / "flows_north_sydney.csv").string();
    std::optional<int> hour;
    std::optional<double> evp;
    double battery = 82.0;
    std::string scenario = "OD2016", config, csv;
};

void print_solution(const evq::QueueSolution& s) {
    auto line = [](const char* name, double v, const char* unit) {
        std::cout << std::left << std::setw(28) << name << std::setprecision(12) << v << (unit[0] ? " " : "") << unit
                  << '\n';
    };
    line("offered_load", s.offered_load, "Erlang");
    line("O1 mean_queue", s.mean_queue, "veh");
    line("O2 mean_wait", s.mean_wait_h, "h");
    line("O3 mean_service", s.mean_service_h, "h");
    line("O4 mean_total_time", s.mean_total_time_h, "h");
    line("O5 energy_per_session", s.energy_per_session_kwh, "kWh");
    line("O5 energy_per_hour", s.energy_rate_kwh_per_h(), "kWh/h");
    line("blocking_prob", s.blocking_prob, "");
    line("effective_arrival_rate", s.effective_arrival_rate, "veh/h");
}

int run_solve(const SolveArgs& a) {
    evq::QueueParams params;
    json dummy;
    if (!a.station.empty()) {
        if (!a.hour) throw UsageError("--hour", "required with --station");
        if (*a.hour < 0 || *a.hour >= evq::kHoursPerDay) throw UsageError("--hour", "must lie in 0..23");
        if (!a.evp) throw UsageError("--evp", "required with --station");
        const double ev_p = require_percent("--evp", *a.evp);
        if (!(a.battery > 0.0)) throw UsageError("--battery", "must be positive");
        const auto scenario = scenario_flag("--scenario", a.scenario);
        const evq::Config cfg = resolve_config(a.config, dummy);
        const auto registry = evq::load_station_registry(a.stations, cfg.waiting_slots_default);
        const evq::Station* st = registry.find(a.station);
        if (!st) throw UsageError("--station", "no station '" + a.station + "' in " + a.stations);
        const auto flows = evq::index_by_link(evq::load_flows(a.flows));
        const auto soc = evq::soc_sampler(cfg);
        const auto model = evq::arrival_rates(flows_for_station(flows, *st), ev_p, scenario, st->id, 0.0,
                                              evq::RateModulation{cfg.avg_d_ref_km});
        params = evq::queue_params(*st, model.hourly_rate[*a.hour],
                                   evq::mean_service_time_h(soc, a.battery, st->charger_power_kw),
                                   soc.expected_value() * a.battery);
        std::cout << "station " << st->id << " (" << st->plugs << " plugs, capacity " << st->capacity() << "), hour "
                  << *a.hour << ", ev_p " << *a.evp << " %, " << a.scenario << ", battery " << a.battery << " kWh\n";
    } else {
        if (!a.lambda) throw UsageError("--lambda", "required (or use --station)");
        if (!a.service_h) throw UsageError("--service-h", "required (or use --station)");
        if (!a.plugs) throw UsageError("--plugs", "required (or use --station)");
        if (!a.capacity) throw UsageError("--capacity", "required (or use --station)");
        if (!(*a.lambda >= 0.0) || !std::isfinite(*a.lambda)) throw UsageError("--lambda", "must be finite and >= 0");
        if (!(*a.service_h > 0.0)) throw UsageError("--service-h", "must be positive");
        if (*a.plugs < 1) throw UsageError("--plugs", "must be >= 1");
        if (*a.capacity < *a.plugs) throw UsageError("--capacity", "must be >= --plugs");
        const double power = a.power.value_or(22.0);
        if (!(power > 0.0)) throw UsageError("--power", "must be positive");
        params = evq::QueueParams{*a.lambda, *a.service_h, *a.plugs, *a.capacity, power, std::nullopt};
    }
    const auto s = evq::solve(params);
    print_solution(s);
    if (!a.csv.empty()) {
        auto os = open_out(a.csv);
        os << "lambda_vph,mean_service_h,plugs,capacity,rho,mean_queue,mean_wait_h,mean_service_h_out,"
              "mean_total_time_h,energy_per_session_kwh,energy_kwh_per_h,blocking_prob,effective_arrival_rate\n";
        using evq::csv::fmt;
        os << fmt(params.arrival_rate) << ',' << fmt(params.mean_service_time_h) << ',' << params.servers << ','
           << params.capacity << ',' << fmt(s.offered_load) << ',' << fmt(s.mean_queue) << ',' << fmt(s.mean_wait_h)
           << ',' << fmt(s.mean_service_h) << ',' << fmt(s.mean_total_time_h) << ',' << fmt(s.energy_per_session_kwh)
           << ',' << fmt(s.energy_rate_kwh_per_h()) << ',' << fmt(s.blocking_prob) << ','
           << fmt(s.effective_arrival_rate) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string stations = (kDataDir / "stations_north_sydney.csv").string();
    std::string flows = (kDataDir / "flows_north_sydney.csv").string();
    std::string station, scenario = "OD2016", config, out = "out", trace;
    std::optional<double> evp, days, warmup_h;
    std::optional<std::uint64_t> seed;
    double battery = 82.0;
    int reps = 1;
    unsigned jobs = 0;
};

void write_sim_rows(std::ostream& os, const std::vector<evq::SimResult>& runs) {
    using evq::csv::fmt;
    os << "rep,arrivals,blocked,completed,blocking_prob,mean_queue,mean_wait_h,mean_service_h,mean_total_time_h,"
          "energy_kwh_total,energy_per_session_kwh,max_queue,max_wait_h,max_total_time_h,max_hourly_energy_kwh\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        os << i << ',' << r.arrivals << ',' << r.blocked << ',' << r.completed << ',' << fmt(r.blocking_prob()) << ','
           << fmt(r.mean_queue) << ',' << fmt(r.mean_wait_h) << ',' << fmt(r.mean_service_h) << ','
           << fmt(r.mean_total_time_h) << ',' << fmt(r.energy_kwh_total) << ',' << fmt(r.energy_per_session_kwh) << ','
           << fmt(r.max_queue) << ',' << fmt(r.max_wait_h) << ',' << fmt(r.max_total_time_h) << ','
           << fmt(r.max_hourly_energy_kwh) << '\n';
    }
}

void write_sim_hourly(std::ostream& os, const std::vector<evq::SimResult>& runs) {
    using evq::csv::fmt;
    os << "rep,hour,arrivals,blocked,mean_queue,mean_wait_h,mean_service_h,mean_total_time_h,mean_energy_kwh,"
          "max_queue,max_wait_h,max_total_time_h,max_energy_kwh\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& h = runs[i].hourly;
        for (int k = 0; k < evq::kHoursPerDay; ++k)
            os << i << ',' << k << ',' << h.arrivals[k] << ',' << h.blocked[k] << ',' << fmt(h.mean_queue[k]) << ','
               << fmt(h.mean_wait_h[k]) << ',' << fmt(h.mean_service_h[k]) << ',' << fmt(h.mean_total_time_h[k])
               << ',' << fmt(h.mean_energy_kwh[k]) << ',' << fmt(h.max_queue[k]) << ',' << fmt(h.max_wait_h[k]) << ','
               << fmt(h.max_total_time_h[k]) << ',' << fmt(h.max_energy_kwh[k]) << '\n';
    }
}

int run_simulate(const SimulateArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    if (a.station.empty()) throw UsageError("--station", "required");
    if (!a.evp) throw UsageError("--evp", "required");
    const double ev_p = require_percent("--evp", *a.evp);
    const auto scenario = scenario_flag("--scenario", a.scenario);
    if (a.reps < 1) throw UsageError("--reps", "must be >= 1");
    if (!(a.battery > 0.0)) throw UsageError("--battery", "must be positive");
    if (a.days && !(*a.days > 0.0)) throw UsageError("--days", "must be positive");

    json inputs = {{"stations", a.stations}, {"flows", a.flows}};
    evq::Config cfg = resolve_config(a.config, inputs);
    const auto registry = evq::load_station_registry(a.stations, cfg.waiting_slots_default);
    const evq::Station* st = registry.find(a.station);
    if (!st) throw UsageError("--station", "no station '" + a.station + "'");
    const auto flows = evq::index_by_link(evq::load_flows(a.flows));

    evq::SimConfig sc;
    sc.station = *st;
    sc.soc = evq::soc_sampler(cfg);
    sc.battery_kwh = a.battery;
    sc.arrivals = evq::arrival_rates(flows_for_station(flows, *st), ev_p, scenario, st->id, cfg.arrival_cv,
                                     evq::RateModulation{cfg.avg_d_ref_km});
    sc.inter_arrival = cfg.inter_arrival;
    sc.service_law = cfg.service_law;
    const std::uint64_t seed = a.seed.value_or(cfg.seed);
    sc.replication_seed = evq::seed_for_key(seed, st->id);
    const double warmup = a.warmup_h ? *a.warmup_h : cfg.des_warmup_h.value_or(10.0 * sc.mean_service_time_h());
    sc.warmup_h = warmup;
    sc.horizon_h = warmup + a.days.value_or(cfg.des_days) * evq::kHoursPerDay;
    sc.record_trace = !a.trace.empty();

    fs::create_directories(a.out);
    std::vector<evq::SimResult> runs;
    json outputs = json::array();
    if (a.reps >= 2) {
        auto summary = evq::replicate(sc, a.reps, a.jobs);
        runs = std::move(summary.runs);
        auto os = open_out(fs::path(a.out) / "sim_ci.csv");
        os << "metric,mean,half_width_95\n";
        auto row = [&](const char* name, const evq::MetricSummary& m) {
            os << name << ',' << evq::csv::fmt(m.mean) << ',' << evq::csv::fmt(m.half_width) << '\n';
        };
        row("mean_queue", summary.mean_queue);
        row("mean_wait_h", summary.mean_wait_h);
        row("mean_service_h", summary.mean_service_h);
        row("mean_total_time_h", summary.mean_total_time_h);
        row("energy_kwh_total", summary.energy_kwh_total);
        row("max_queue", summary.max_queue);
        row("max_wait_h", summary.max_wait_h);
        row("max_total_time_h", summary.max_total_time_h);
        row("max_hourly_energy_kwh", summary.max_hourly_energy_kwh);
        row("blocking_prob", summary.blocking_prob);
        outputs.push_back("sim_ci.csv");
        std::cout << "mean_queue " << summary.mean_queue.mean << " +/- " << summary.mean_queue.half_width
                  << " veh, mean_wait " << summary.mean_wait_h.mean << " +/- " << summary.mean_wait_h.half_width
                  << " h over " << a.reps << " replications\n";
    } else {
        runs.push_back(evq::simulate(sc));
        const auto& r = runs.front();
        std::cout << "arrivals " << r.arrivals << ", blocked " << r.blocked << ", mean_queue " << r.mean_queue
                  << " veh, mean_wait " << r.mean_wait_h << " h, max_queue " << r.max_queue << ", energy "
                  << r.energy_kwh_total << " kWh\n";
    }
    {
        auto os = open_out(fs::path(a.out) / "sim_results.csv");
        write_sim_rows(os, runs);
        auto hs = open_out(fs::path(a.out) / "sim_hourly.csv");
        write_sim_hourly(hs, runs);
        outputs.push_back("sim_results.csv");
        outputs.push_back("sim_hourly.csv");
    }
    if (!a.trace.empty()) {
        auto os = open_out(a.trace);
        evq::write_trace_csv(os, runs.front(), st->id);
    }
    json params = {{"station", st->id},
                   {"ev_p_percent", *a.evp},
                   {"ev_p_fraction", ev_p},
                   {"scenario", a.scenario},
                   {"battery_kwh", a.battery},
                   {"reps", a.reps},
                   {"horizon_h", sc.horizon_h},
                   {"warmup_h", warmup},
                   {"seeds", {{"master", seed}, {"replication", sc.replication_seed}}},
                   {"config", evq::to_json(cfg)}};
    write_manifest(a.out, "simulate", inputs, params, outputs, started);
    return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string config, mode = "analytic", out = "out";
    std::string stations = (kDataDir / "stations_north_sydney.csv").string();
    std::string flows = (kDataDir / "flows_north_sydney.csv").string();
    unsigned jobs = 0;
};

int run_sweep(const SweepArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    evq::SweepMode mode;
    try {
        mode = evq::parse_sweep_mode(a.mode);
    } catch (const std::invalid_argument& e) {
        throw UsageError("--mode", e.what());
    }
    json inputs = {{"stations", a.stations}, {"flows", a.flows}};
    const evq::Config cfg = resolve_config(a.config, inputs);
    const auto registry = evq::load_station_registry(a.stations, cfg.waiting_slots_default);
    const auto flows = evq::index_by_link(evq::load_flows(a.flows));
    const auto plan = evq::plan(cfg, registry, mode);
    std::cout << "sweep: " << plan.cell_count() << " cells (" << plan.scenarios.size() << " scenarios x "
              << plan.evp_grid.size() << " ev_p x " << plan.battery_grid.size() << " batteries x "
              << plan.stations.size() << " stations x 24 h), mode " << a.mode << '\n';
    const auto table = evq::run(plan, flows, cfg, a.jobs);

    fs::create_directories(a.out);
    const fs::path out(a.out);
    {
        auto os = open_out(out / "sweep_results.csv");
        evq::write_sweep_results(os, table);
    }
    {
        auto os = open_out(out / "sweep_summary.csv");
        evq::write_sweep_summary(os, evq::summarize_by_plugs(table));
    }
    const auto daily = evq::station_daily_energy(table);
    {
        auto os = open_out(out / "energy_by_station.csv");
        evq::write_energy_by_station(os, daily);
    }
    {
        auto os = open_out(out / "energy_by_plugcount.csv");
        evq::write_energy_by_plugcount(os, evq::energy_vs_plugs(daily));
    }
    if (mode == evq::SweepMode::both) {
        std::size_t agree = 0;
        for (auto f : table.agree) agree += f;
        std::cout << "analytic/DES agreement: " << agree << " of " << table.agree.size() << " cells\n";
    }
    json params = {{"mode", a.mode},
                   {"cells", plan.cell_count()},
                   {"ev_p_percent", cfg.evp_grid_percent},
                   {"ev_p_fraction", plan.evp_grid},
                   {"seeds", {{"master", cfg.seed}}},
                   {"config", evq::to_json(cfg)}};
    json outputs = {"sweep_results.csv", "sweep_summary.csv", "energy_by_station.csv", "energy_by_plugcount.csv"};
    write_manifest(out, "sweep", inputs, params, outputs, started);
    std::cout << "wrote " << (out / "sweep_results.csv").string() << " in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() << " s\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct CoupleArgs {
    std::string config, scenario = "OD2016", out = "out";
    std::string stations = (kDataDir / "stations_north_sydney.csv").string();
    std::string flows = (kDataDir / "flows_north_sydney.csv").string();
    std::string links = (kDataDir / "links_north_sydney.csv").string();
    double battery = 82.0;
};

int run_couple(const CoupleArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    const auto scenario = scenario_flag("--scenario", a.scenario);
    if (!(a.battery > 0.0)) throw UsageError("--battery", "must be positive");
    json inputs = {{"stations", a.stations}, {"flows", a.flows}, {"links", a.links}};
    const evq::Config cfg = resolve_config(a.config, inputs);
    const auto registry = evq::load_station_registry(a.stations, cfg.waiting_slots_default);
    const auto flows = evq::index_by_link(evq::load_flows(a.flows));
    const auto links = evq::load_links(a.links);
    evq::CouplingInputs in{&links, &flows, &registry, scenario, a.battery, evq::soc_sampler(cfg),
                           evq::RateModulation{cfg.avg_d_ref_km}, cfg.bpr};
    std::vector<evq::CongestionReport> reports;
    reports.push_back(evq::congestion_at(in, 0.0));
    for (double pct : cfg.evp_grid_percent) reports.push_back(evq::congestion_at(in, evq::percent_to_fraction(pct)));

    fs::create_directories(a.out);
    {
        auto os = open_out(fs::path(a.out) / "congestion_summary.csv");
        evq::write_congestion_summary(os, reports);
    }
    {
        auto os = open_out(fs::path(a.out) / "link_times.csv");
        evq::write_link_times(os, reports);
    }
    for (const auto& r : reports)
        std::cout << "ev_p " << std::setw(5) << evq::fraction_to_percent(r.ev_p) << " %  total travel time "
                  << std::fixed << std::setprecision(1) << r.with_queues_total_h << " veh-h  delta "
                  << std::setprecision(3) << r.delta_pct() << " %\n"
                  << std::defaultfloat;
    json params = {{"scenario", a.scenario},
                   {"battery_kwh", a.battery},
                   {"ev_p_percent", cfg.evp_grid_percent},
                   {"config", evq::to_json(cfg)}};
    write_manifest(a.out, "couple", inputs, params, {"congestion_summary.csv", "link_times.csv"}, started);
    return 0;
}

// ---------------------------------------------------------------------------

struct GridArgs {
    std::string charging, profile = (kDataDir / "state_grid.csv").string(), label, scenario = "OD2016", out = "out";
    double evp = 0.1;
    double battery = 82.0;
};

int run_grid(const GridArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    if (a.charging.empty()) throw UsageError("--charging", "required (a sweep_summary.csv)");
    const auto scenario = scenario_flag("--scenario", a.scenario);
    require_percent("--evp", a.evp);
    const auto profiles = evq::load_grid_profiles(a.profile);
    if (profiles.empty()) throw evq::ValidationError("profile", a.profile + " holds no profiles");
    const evq::GridProfile* grid = &profiles.front();
    if (!a.label.empty()) {
        grid = nullptr;
        for (const auto& p : profiles)
            if (p.label == a.label) grid = &p;
        if (!grid) throw UsageError("--label", "no profile labelled '" + a.label + "'");
    }
    const auto charging = evq::load_charging_profile(a.charging, scenario, a.evp, a.battery);
    const auto report = evq::grid_coincidence(charging, *grid);
    fs::create_directories(a.out);
    {
        auto os = open_out(fs::path(a.out) / "grid_overlay.csv");
        evq::write_grid_overlay(os, report);
    }
    std::cout << "state peak hour(s):";
    for (int h : report.state_peak_hours) std::cout << ' ' << h;
    std::cout << "\ncharging at state peak / charging daily peak = " << report.ratio << '\n';
    json inputs = {{"charging", a.charging}, {"profile", a.profile}};
    json params = {{"scenario", a.scenario},
                   {"ev_p_percent", a.evp},
                   {"ev_p_fraction", evq::percent_to_fraction(a.evp)},
                   {"battery_kwh", a.battery},
                   {"label", grid->label},
                   {"ratio", report.ratio},
                   {"state_peak_hours", report.state_peak_hours}};
    write_manifest(a.out, "grid", inputs, params, {"grid_overlay.csv"}, started);
    return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    bool like_paper = false;
    int n_stations = 0;
    std::uint64_t seed = 2016;
    std::string out = "data";
};

int run_synth(const SynthArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    if (!a.like_paper && a.n_stations <= 0)
        throw UsageError("--stations-like-paper", "pass it or a positive --n-stations");
    const auto registry = a.like_paper ? evq::synth::stations_like_reference() : evq::synth::random_stations(a.n_stations, a.seed);
    const auto flows = evq::synth::flows_for(registry, a.seed);
    const auto links = evq::synth::links_for(flows, a.seed);
    const fs::path out(a.out);
    fs::create_directories(out);
    evq::write_registry(out / "stations_north_sydney.csv", registry);
    {
        auto os = open_out(out / "flows_north_sydney.csv");
        evq::write_flows(os, flows);
    }
    {
        auto os = open_out(out / "links_north_sydney.csv");
        evq::write_links(os, links);
    }
    {
        auto os = open_out(out / "state_grid.csv");
        evq::write_grid_profiles(os, {evq::synth::state_grid_profile()});
    }
    {
        evq::Config cfg;
        cfg.seed = a.seed;
        auto os = open_out(out / "default.json");
        os << evq::to_json(cfg).dump(2) << '\n';
    }
    std::cout << "wrote " << registry.size() << " stations, " << flows.size() << " flow series, " << links.size()
              << " links to " << out.string() << '\n';
    json params = {{"stations_like_paper", a.like_paper}, {"n_stations", registry.size()}, {"seeds", {{"master", a.seed}}}};
    write_manifest(out, "synth", json::object(), params,
                   {"stations_north_sydney.csv", "flows_north_sydney.csv", "links_north_sydney.csv", "state_grid.csv",
                    "default.json"},
                   started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV fast-charging queue, congestion and grid impact toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Steady-state M/M/c/N solution for one station-hour");
    solve->add_option("--lambda", solve_args.lambda, "Arrival rate, vehicles per hour");
    solve->add_option("--service-h", solve_args.service_h, "Mean charging time, hours");
    solve->add_option("--plugs", solve_args.plugs, "Number of plugs (servers)");
    solve->add_option("--capacity", solve_args.capacity, "Cars on site, charging plus waiting");
    solve->add_option("--power", solve_args.power, "Charger power, kW (default 22)");
    solve->add_option("--station", solve_args.station, "Station id (data-driven mode)");
    solve->add_option("--hour", solve_args.hour, "Hour of day 0..23");
    solve->add_option("--evp", solve_args.evp, "Penetration rate, percent");
    solve->add_option("--battery", solve_args.battery, "Battery size, kWh");
    solve->add_option("--scenario", solve_args.scenario, "OD2016 | OD15 | OD30");
    solve->add_option("--stations", solve_args.stations, "Stations CSV");
    solve->add_option("--flows", solve_args.flows, "Flows CSV");
    solve->add_option("--config", solve_args.config, "Config JSON (falls back to $EVQ_CONFIG)");
    solve->add_option("--csv", solve_args.csv, "Also write the solution as CSV");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of one station");
    simulate->add_option("--station", sim_args.station, "Station id");
    simulate->add_option("--evp", sim_args.evp, "Penetration rate, percent");
    simulate->add_option("--battery", sim_args.battery, "Battery size, kWh");
    simulate->add_option("--scenario", sim_args.scenario, "OD2016 | OD15 | OD30");
    simulate->add_option("--days", sim_args.days, "Simulated days after warmup");
    simulate->add_option("--warmup-h", sim_args.warmup_h, "Warmup, hours");
    simulate->add_option("--reps", sim_args.reps, "Independent replications");
    simulate->add_option("--seed", sim_args.seed, "Master seed (overrides config)");
    simulate->add_option("--stations", sim_args.stations, "Stations CSV");
    simulate->add_option("--flows", sim_args.flows, "Flows CSV");
    simulate->add_option("--config", sim_args.config, "Config JSON (falls back to $EVQ_CONFIG)");
    simulate->add_option("--out", sim_args.out, "Output directory");
    simulate->add_option("--trace", sim_args.trace, "Write the event trace CSV of the first replication");
    simulate->add_option("--jobs", sim_args.jobs, "Worker threads (0 = all cores)");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run the scenario grid");
    sweep->add_option("--config", sweep_args.config, "Config JSON (falls back to $EVQ_CONFIG)");
    sweep->add_option("--mode", sweep_args.mode, "analytic | des | both");
    sweep->add_option("--stations", sweep_args.stations, "Stations CSV");
    sweep->add_option("--flows", sweep_args.flows, "Flows CSV");
    sweep->add_option("--out", sweep_args.out, "Output directory");
    sweep->add_option("--jobs", sweep_args.jobs, "Worker threads (0 = all cores)");

    CoupleArgs couple_args;
    auto* couple = app.add_subcommand("couple", "Network travel-time change caused by station queues");
    couple->add_option("--config", couple_args.config, "Config JSON (falls back to $EVQ_CONFIG)");
    couple->add_option("--scenario", couple_args.scenario, "OD2016 | OD15 | OD30");
    couple->add_option("--battery", couple_args.battery, "Battery size, kWh");
    couple->add_option("--stations", couple_args.stations, "Stations CSV");
    couple->add_option("--flows", couple_args.flows, "Flows CSV");
    couple->add_option("--links", couple_args.links, "Links CSV");
    couple->add_option("--out", couple_args.out, "Output directory");

    GridArgs grid_args;
    auto* grid = app.add_subcommand("grid", "Coincidence of charging demand with the state demand peak");
    grid->add_option("--charging", grid_args.charging, "sweep_summary.csv from a sweep");
    grid->add_option("--profile", grid_args.profile, "Grid profile CSV");
    grid->add_option("--label", grid_args.label, "Profile label (default: first row)");
    grid->add_option("--scenario", grid_args.scenario, "OD2016 | OD15 | OD30");
    grid->add_option("--evp", grid_args.evp, "Penetration slice, percent");
    grid->add_option("--battery", grid_args.battery, "Battery slice, kWh");
    grid->add_option("--out", grid_args.out, "Output directory");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate the synthetic station/flow/link/grid data set");
    synth->add_flag("--stations-like-paper", synth_args.like_paper, "25 stations with the reference plug mix");
    synth->add_option("--n-stations", synth_args.n_stations, "Random registry of this size instead");
    synth->add_option("--seed", synth_args.seed, "Generator seed");
    synth->add_option("--out", synth_args.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve) return run_solve(solve_args);
        if (*simulate) return run_simulate(sim_args);
        if (*sweep) return run_sweep(sweep_args);
        if (*couple) return run_couple(couple_args);
        if (*grid) return run_grid(grid_args);
        if (*synth) return run_synth(synth_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const evq::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
