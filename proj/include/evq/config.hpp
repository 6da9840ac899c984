#pragma once

// Global run configuration, read from a JSON document.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evq/core.hpp"
#include "evq/errors.hpp"

namespace evq {

enum class InterArrival { exponential, normal };
enum class ServiceLaw { exponential, deterministic };

inline std::string_view to_string(InterArrival k) { return k == InterArrival::normal ? "normal" : "exponential"; }
inline std::string_view to_string(ServiceLaw k) {
    return k == ServiceLaw::deterministic ? "deterministic" : "exponential";
}

/// Volume-delay constants for the link travel-time model.
struct BprParams {
    double alpha = 0.15;
    double beta = 4.0;
    double vehicle_length_km = 0.007;
    double capacity_floor = 0.05;  // c_eff never drops below this share of capacity
};

/// Penetration grid in percent: 0.01..0.05, 0.10..0.30 in 0.01 steps, then 0.5, 1, 2, 5.
inline std::vector<double> default_evp_grid_percent() {
    std::vector<double> g;
    for (int k = 1; k <= 5; ++k) g.push_back(k / 100.0);
    for (int k = 10; k <= 30; ++k) g.push_back(k / 100.0);
    for (double v : {0.5, 1.0, 2.0, 5.0}) g.push_back(v);
    return g;
}

inline std::vector<double> default_battery_grid_kwh() { return {50, 58, 66, 74, 82, 90, 98, 106}; }

struct Config {
    int waiting_slots_default = kDefaultWaitingSlots;
    double soc_mean = 0.5;
    double soc_sd = 0.1;
    std::array<double, 2> soc_bounds{0.2, 0.8};
    std::vector<double> battery_grid_kwh = default_battery_grid_kwh();
    std::vector<double> evp_grid_percent = default_evp_grid_percent();
    std::vector<DemandScenario> demand_scenarios{DemandScenario::OD2016, DemandScenario::OD15,
                                                 DemandScenario::OD30};
    double arrival_cv = 0.20;
    std::uint64_t seed = 2016;

    // Optional keys beyond the core set.
    InterArrival inter_arrival = InterArrival::exponential;
    ServiceLaw service_law = ServiceLaw::exponential;
    double des_days = 7.0;
    std::optional<double> des_warmup_h;
    std::optional<double> avg_d_ref_km;  // enables rate * avg_d / ref_d modulation
    BprParams bpr{};

    void validate() const {
        if (waiting_slots_default < 0) throw ValidationError("waiting_slots_default", "must be >= 0");
        if (!(soc_sd >= 0.0)) throw ValidationError("soc_sd", "must be >= 0");
        if (!(soc_bounds[0] > 0.0) || soc_bounds[1] > 1.0 || soc_bounds[0] > soc_bounds[1])
            throw ValidationError("soc_bounds", "bounds must satisfy 0 < lo <= hi <= 1");
        if (soc_mean < soc_bounds[0] || soc_mean > soc_bounds[1])
            throw ValidationError("soc_mean", "mean must lie within soc_bounds");
        if (battery_grid_kwh.empty()) throw ValidationError("battery_grid_kwh", "grid must not be empty");
        for (double b : battery_grid_kwh)
            if (!(b > 0.0)) throw ValidationError("battery_grid_kwh", "battery sizes must be positive");
        if (evp_grid_percent.empty()) throw ValidationError("evp_grid_percent", "grid must not be empty");
        for (double p : evp_grid_percent)
            if (!(p > 0.0) || p > 100.0) throw ValidationError("evp_grid_percent", "values must lie in (0, 100]");
        if (demand_scenarios.empty()) throw ValidationError("demand_scenarios", "list must not be empty");
        if (!(arrival_cv >= 0.0) || arrival_cv > 0.5) throw ValidationError("arrival_cv", "must lie in [0, 0.5]");
        if (!(des_days > 0.0)) throw ValidationError("des_days", "must be positive");
        if (des_warmup_h && !(*des_warmup_h >= 0.0)) throw ValidationError("des_warmup_h", "must be >= 0");
        if (avg_d_ref_km && !(*avg_d_ref_km > 0.0)) throw ValidationError("avg_d_ref_km", "must be positive");
        if (!(bpr.alpha >= 0.0) || !(bpr.beta >= 0.0) || !(bpr.vehicle_length_km > 0.0) ||
            !(bpr.capacity_floor > 0.0) || bpr.capacity_floor > 1.0)
            throw ValidationError("bpr", "invalid volume-delay constants");
    }
};

inline nlohmann::json to_json(const Config& c) {
    nlohmann::json j;
    j["waiting_slots_default"] = c.waiting_slots_default;
    j["soc_mean"] = c.soc_mean;
    j["soc_sd"] = c.soc_sd;
    j["soc_bounds"] = {c.soc_bounds[0], c.soc_bounds[1]};
    j["battery_grid_kwh"] = c.battery_grid_kwh;
    j["evp_grid_percent"] = c.evp_grid_percent;
    j["demand_scenarios"] = nlohmann::json::array();
    for (auto s : c.demand_scenarios) j["demand_scenarios"].push_back(std::string(to_string(s)));
    j["arrival_cv"] = c.arrival_cv;
    j["seed"] = c.seed;
    j["inter_arrival"] = std::string(to_string(c.inter_arrival));
    j["service_law"] = std::string(to_string(c.service_law));
    j["des_days"] = c.des_days;
    if (c.des_warmup_h) j["des_warmup_h"] = *c.des_warmup_h;
    if (c.avg_d_ref_km) j["avg_d_ref_km"] = *c.avg_d_ref_km;
    j["bpr"] = {{"alpha", c.bpr.alpha},
                {"beta", c.bpr.beta},
                {"vehicle_length_km", c.bpr.vehicle_length_km},
                {"capacity_floor", c.bpr.capacity_floor}};
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline Config config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config", "document must be a JSON object");
    Config c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            const auto& v = it.value();
            if (key == "waiting_slots_default") c.waiting_slots_default = v.get<int>();
            else if (key == "soc_mean") c.soc_mean = v.get<double>();
            else if (key == "soc_sd") c.soc_sd = v.get<double>();
            else if (key == "soc_bounds") {
                auto b = v.get<std::vector<double>>();
                if (b.size() != 2) throw ValidationError("soc_bounds", "expected [lo, hi]");
                c.soc_bounds = {b[0], b[1]};
            } else if (key == "battery_grid_kwh") c.battery_grid_kwh = v.get<std::vector<double>>();
            else if (key == "evp_grid_percent") c.evp_grid_percent = v.get<std::vector<double>>();
            else if (key == "demand_scenarios") {
                c.demand_scenarios.clear();
                for (const auto& s : v) {
                    try {
                        c.demand_scenarios.push_back(parse_scenario(s.get<std::string>()));
                    } catch (const std::invalid_argument& e) {
                        throw ValidationError("demand_scenarios", e.what());
                    }
                }
            } else if (key == "arrival_cv") c.arrival_cv = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "inter_arrival") {
                auto s = v.get<std::string>();
                if (s == "exponential") c.inter_arrival = InterArrival::exponential;
                else if (s == "normal") c.inter_arrival = InterArrival::normal;
                else throw ValidationError("inter_arrival", "expected 'exponential' or 'normal'");
            } else if (key == "service_law") {
                auto s = v.get<std::string>();
                if (s == "exponential") c.service_law = ServiceLaw::exponential;
                else if (s == "deterministic") c.service_law = ServiceLaw::deterministic;
                else throw ValidationError("service_law", "expected 'exponential' or 'deterministic'");
            } else if (key == "des_days") c.des_days = v.get<double>();
            else if (key == "des_warmup_h") {
                if (!v.is_null()) c.des_warmup_h = v.get<double>();
            } else if (key == "avg_d_ref_km") {
                if (!v.is_null()) c.avg_d_ref_km = v.get<double>();
            } else if (key == "bpr") {
                for (auto b = v.begin(); b != v.end(); ++b) {
                    if (b.key() == "alpha") c.bpr.alpha = b->get<double>();
                    else if (b.key() == "beta") c.bpr.beta = b->get<double>();
                    else if (b.key() == "vehicle_length_km") c.bpr.vehicle_length_km = b->get<double>();
                    else if (b.key() == "capacity_floor") c.bpr.capacity_floor = b->get<double>();
                    else throw ValidationError("bpr." + b.key(), "unknown key");
                }
            } else {
                throw ValidationError(key, "unknown configuration key");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config", std::string("type error: ") + e.what());
    }
    c.validate();
    return c;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open config");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return config_from_json(j);
}

}  // namespace evq
