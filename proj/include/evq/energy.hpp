#pragma once

// Delivered charging energy and its overlap with the electricity demand peak.

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "evq/core.hpp"
#include "evq/des.hpp"
#include "evq/errors.hpp"
#include "evq/mmck.hpp"
#include "evq/station_model.hpp"

namespace evq {

/// Analytic path: admitted rate x expected energy per session, for each hour.
inline HourlyArray station_energy(const StationDay& day) { return day.energy_kwh(); }

inline double station_energy(const QueueSolution& s) { return s.energy_rate_kwh_per_h(); }

/// Simulation path: energy actually delivered per clock hour, averaged over days.
inline HourlyArray station_energy(const SimResult& r) { return r.hourly.mean_energy_kwh; }

inline double daily_total(const HourlyArray& a) {
    double t = 0.0;
    for (double x : a) t += x;
    return t;
}

struct StationDailyEnergy {
    DemandScenario scenario = DemandScenario::OD2016;
    double ev_p = 0.0;
    double battery_kwh = 0.0;
    std::string station_id;
    int plugs = 0;
    double daily_kwh = 0.0;
};

struct PlugGroupEnergy {
    DemandScenario scenario = DemandScenario::OD2016;
    double ev_p = 0.0;
    double battery_kwh = 0.0;
    int plugs = 0;
    int stations = 0;
    double mean_daily_kwh = 0.0;
    double max_daily_kwh = 0.0;
};

/// Groups daily station energy by plug count within each (scenario, ev_p, battery).
inline std::vector<PlugGroupEnergy> energy_vs_plugs(const std::vector<StationDailyEnergy>& stations) {
    if (stations.empty()) throw ValidationError("sweep", "no station energy rows to group");
    using Key = std::tuple<int, double, double, int>;
    std::map<Key, PlugGroupEnergy> groups;
    for (const auto& s : stations) {
        Key k{static_cast<int>(s.scenario), s.ev_p, s.battery_kwh, s.plugs};
        auto [it, inserted] = groups.try_emplace(k);
        auto& g = it->second;
        if (inserted) {
            g.scenario = s.scenario;
            g.ev_p = s.ev_p;
            g.battery_kwh = s.battery_kwh;
            g.plugs = s.plugs;
        }
        ++g.stations;
        g.mean_daily_kwh += s.daily_kwh;
        g.max_daily_kwh = std::max(g.max_daily_kwh, s.daily_kwh);
    }
    std::vector<PlugGroupEnergy> out;
    out.reserve(groups.size());
    for (auto& [k, g] : groups) {
        g.mean_daily_kwh /= g.stations;
        out.push_back(g);
    }
    return out;
}

inline void write_energy_by_station(std::ostream& os, const std::vector<StationDailyEnergy>& rows) {
    os << "scenario,evp_percent,battery_kwh,station_id,plugs,daily_kwh\n";
    for (const auto& r : rows)
        os << to_string(r.scenario) << ',' << csv::fmt(fraction_to_percent(r.ev_p)) << ',' << csv::fmt(r.battery_kwh)
           << ',' << r.station_id << ',' << r.plugs << ',' << csv::fmt(r.daily_kwh) << '\n';
}

inline void write_energy_by_plugcount(std::ostream& os, const std::vector<PlugGroupEnergy>& rows) {
    os << "scenario,evp_percent,battery_kwh,plugs,stations,mean_daily_kwh,max_daily_kwh\n";
    for (const auto& r : rows)
        os << to_string(r.scenario) << ',' << csv::fmt(fraction_to_percent(r.ev_p)) << ',' << csv::fmt(r.battery_kwh)
           << ',' << r.plugs << ',' << r.stations << ',' << csv::fmt(r.mean_daily_kwh) << ','
           << csv::fmt(r.max_daily_kwh) << '\n';
}

struct CoincidenceReport {
    std::vector<int> state_peak_hours;  // every hour at the grid maximum, ascending
    int reference_hour = 0;             // earliest state peak hour
    double ratio = 0.0;                 // charging at reference hour / charging daily peak
    HourlyArray grid_norm{};
    HourlyArray charging_norm{};
};

inline CoincidenceReport grid_coincidence(const HourlyArray& charging, const GridProfile& grid) {
    grid.validate();
    double charging_peak = 0.0;
    for (double c : charging) {
        if (!std::isfinite(c) || c < 0.0) throw ValidationError("charging", "charging profile must be finite and >= 0");
        charging_peak = std::max(charging_peak, c);
    }
    if (!(charging_peak > 0.0)) throw ValidationError("charging", "charging profile is all zero");
    const double grid_peak = *std::max_element(grid.hourly_mw.begin(), grid.hourly_mw.end());

    CoincidenceReport r;
    for (int h = 0; h < kHoursPerDay; ++h) {
        if (grid.hourly_mw[h] == grid_peak) r.state_peak_hours.push_back(h);
        r.grid_norm[h] = grid.hourly_mw[h] / grid_peak;
        r.charging_norm[h] = charging[h] / charging_peak;
    }
    r.reference_hour = r.state_peak_hours.front();
    r.ratio = r.charging_norm[r.reference_hour];
    return r;
}

inline void write_grid_overlay(std::ostream& os, const CoincidenceReport& r) {
    os << "hour,grid_norm,charging_norm,is_state_peak,coincidence_ratio\n";
    for (int h = 0; h < kHoursPerDay; ++h) {
        bool peak = std::find(r.state_peak_hours.begin(), r.state_peak_hours.end(), h) != r.state_peak_hours.end();
        os << h << ',' << csv::fmt(r.grid_norm[h]) << ',' << csv::fmt(r.charging_norm[h]) << ',' << (peak ? 1 : 0)
           << ',' << csv::fmt(r.ratio) << '\n';
    }
}

}  // namespace evq
