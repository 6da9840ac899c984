#pragma once

// Scenario grid: demand scenario x penetration x battery x station x hour.
//
// Cells are enumerated in a fixed order (scenario, ev_p, battery, station,
// hour) and results land in a slot indexed by the cell, so the output order
// never depends on how work was scheduled.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "evq/config.hpp"
#include "evq/core.hpp"
#include "evq/csv.hpp"
#include "evq/demand.hpp"
#include "evq/des.hpp"
#include "evq/energy.hpp"
#include "evq/errors.hpp"
#include "evq/parallel.hpp"
#include "evq/rng.hpp"
#include "evq/station_model.hpp"

namespace evq {

enum class SweepMode { analytic, des, both };

inline std::string_view to_string(SweepMode m) {
    switch (m) {
        case SweepMode::analytic: return "analytic";
        case SweepMode::des: return "des";
        case SweepMode::both: return "both";
    }
    return "?";
}

inline SweepMode parse_sweep_mode(std::string_view s) {
    if (s == "analytic") return SweepMode::analytic;
    if (s == "des") return SweepMode::des;
    if (s == "both") return SweepMode::both;
    throw std::invalid_argument("unknown sweep mode '" + std::string(s) + "'");
}

inline bool has_analytic(SweepMode m) { return m != SweepMode::des; }
inline bool has_des(SweepMode m) { return m != SweepMode::analytic; }

struct SweepCell {
    DemandScenario scenario = DemandScenario::OD2016;
    double ev_p = 0.0;
    double battery_kwh = 0.0;
    std::size_t station = 0;
    int hour = 0;
    std::uint64_t seed = 0;
};

/// Raised when one cell fails; the message carries the cell key.
class SweepError : public std::runtime_error {
public:
    SweepError(std::string key, const std::string& what)
        : std::runtime_error("sweep cell " + key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct SweepPlan {
    std::vector<double> evp_grid;  // fractions
    std::vector<double> battery_grid;
    std::vector<DemandScenario> scenarios;
    SweepMode mode = SweepMode::analytic;
    std::uint64_t master_seed = 0;
    std::vector<Station> stations;

    void validate() const {
        if (evp_grid.empty()) throw ValidationError("evp_grid", "penetration grid is empty");
        if (battery_grid.empty()) throw ValidationError("battery_grid", "battery grid is empty");
        if (scenarios.empty()) throw ValidationError("demand_scenarios", "no demand scenarios");
        if (stations.empty()) throw ValidationError("stations", "no stations to sweep");
        for (double e : evp_grid)
            if (!(e > 0.0) || e > 1.0) throw ValidationError("evp_grid", "penetration must lie in (0, 1]");
    }

    /// Station-days: every cell except the hour index.
    std::size_t day_count() const {
        return scenarios.size() * evp_grid.size() * battery_grid.size() * stations.size();
    }
    std::size_t cell_count() const { return day_count() * kHoursPerDay; }

    SweepCell cell(std::size_t index) const {
        SweepCell c;
        c.hour = static_cast<int>(index % kHoursPerDay);
        std::size_t rest = index / kHoursPerDay;
        c.station = rest % stations.size();
        rest /= stations.size();
        c.battery_kwh = battery_grid[rest % battery_grid.size()];
        rest /= battery_grid.size();
        c.ev_p = evp_grid[rest % evp_grid.size()];
        rest /= evp_grid.size();
        c.scenario = scenarios.at(rest);
        c.seed = seed_for_key(master_seed, key(c));
        return c;
    }

    std::string key(const SweepCell& c) const {
        return std::string(to_string(c.scenario)) + "|" + csv::fmt(fraction_to_percent(c.ev_p)) + "|" +
               csv::fmt(c.battery_kwh) + "|" + stations.at(c.station).id + "|" + std::to_string(c.hour);
    }
};

inline SweepPlan plan(const Config& config, const StationRegistry& registry, SweepMode mode = SweepMode::analytic) {
    config.validate();
    SweepPlan p;
    for (double pct : config.evp_grid_percent) p.evp_grid.push_back(percent_to_fraction(pct));
    p.battery_grid = battery_grid(config);
    p.scenarios = config.demand_scenarios;
    p.mode = mode;
    p.master_seed = config.seed;
    p.stations = registry.stations();
    p.validate();
    return p;
}

struct AnalyticCell {
    double arrival_rate = 0.0;
    double offered_load = 0.0;
    double mean_queue = 0.0;
    double mean_wait_h = 0.0;
    double mean_service_h = 0.0;
    double mean_total_time_h = 0.0;
    double energy_per_session_kwh = 0.0;
    double energy_kwh = 0.0;  // expected energy delivered in the hour
    double blocking_prob = 0.0;
    double effective_arrival_rate = 0.0;
};

struct DesCell {
    double mean_queue = 0.0;
    double mean_wait_h = 0.0;
    double mean_service_h = 0.0;
    double mean_total_time_h = 0.0;
    double energy_kwh = 0.0;
    double max_queue = 0.0;
    double max_wait_h = 0.0;
    double max_total_time_h = 0.0;
    double max_energy_kwh = 0.0;
    double blocking_prob = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t blocked = 0;
};

/// The agreement bound between the two evaluation routes: max(3 % relative, 0.01 absolute).
inline bool within_agreement(double analytic, double simulated) {
    return std::fabs(simulated - analytic) <= std::max(0.03 * std::fabs(analytic), 0.01);
}

inline bool agrees(const AnalyticCell& a, const DesCell& d) {
    return within_agreement(a.mean_queue, d.mean_queue) && within_agreement(a.mean_wait_h, d.mean_wait_h) &&
           within_agreement(a.blocking_prob, d.blocking_prob);
}

struct SweepTable {
    SweepPlan plan;
    std::vector<double> arrival_rate;  // per cell, always present
    std::vector<AnalyticCell> analytic;
    std::vector<DesCell> des;
    std::vector<std::uint8_t> agree;  // mode == both

    std::size_t size() const { return arrival_rate.size(); }
};

/// Simulation settings for one station-day of the sweep.
inline SimConfig des_config_for(const SweepPlan& p, const SweepCell& day_cell, const HourlyFlowSeries& flows,
                                const Config& config) {
    const Station& st = p.stations[day_cell.station];
    SimConfig sc;
    sc.station = st;
    sc.soc = soc_sampler(config);
    sc.battery_kwh = day_cell.battery_kwh;
    sc.arrivals = arrival_rates(flows, day_cell.ev_p, day_cell.scenario, st.id, config.arrival_cv,
                                RateModulation{config.avg_d_ref_km});
    sc.inter_arrival = config.inter_arrival;
    sc.service_law = config.service_law;
    sc.replication_seed = day_cell.seed;
    const double warmup = config.des_warmup_h ? *config.des_warmup_h : 10.0 * sc.mean_service_time_h();
    sc.warmup_h = warmup;
    sc.horizon_h = warmup + config.des_days * kHoursPerDay;
    return sc;
}

inline SweepTable run(const SweepPlan& p, const std::map<std::string, HourlyFlowSeries>& flows_by_link,
                      const Config& config, unsigned jobs = 0) {
    p.validate();
    const SocSampler soc = soc_sampler(config);
    const RateModulation modulation{config.avg_d_ref_km};

    std::vector<const HourlyFlowSeries*> station_flows;
    for (const auto& st : p.stations) {
        auto it = flows_by_link.find(st.link_id);
        if (it == flows_by_link.end())
            throw ValidationError("link_id", "station '" + st.id + "' references link '" + st.link_id + "' without flows");
        station_flows.push_back(&it->second);
    }

    SweepTable t;
    t.plan = p;
    const std::size_t n = p.cell_count();
    t.arrival_rate.assign(n, 0.0);
    if (has_analytic(p.mode)) t.analytic.assign(n, AnalyticCell{});
    if (has_des(p.mode)) t.des.assign(n, DesCell{});
    if (p.mode == SweepMode::both) t.agree.assign(n, 0);

    parallel_for(p.day_count(), jobs, [&](std::size_t day) {
        const std::size_t base = day * kHoursPerDay;
        const SweepCell first = p.cell(base);
        try {
            const Station& st = p.stations[first.station];
            StationDayInputs in{&st, station_flows[first.station], first.ev_p, first.scenario, first.battery_kwh, soc,
                                modulation};
            const StationDay sd = evaluate_station_day(in);
            for (int h = 0; h < kHoursPerDay; ++h) {
                t.arrival_rate[base + h] = sd.arrival_rate[h];
                if (!has_analytic(p.mode)) continue;
                const QueueSolution& q = sd.hours[h];
                AnalyticCell& a = t.analytic[base + h];
                a.arrival_rate = sd.arrival_rate[h];
                a.offered_load = q.offered_load;
                a.mean_queue = q.mean_queue;
                a.mean_wait_h = q.mean_wait_h;
                a.mean_service_h = q.mean_service_h;
                a.mean_total_time_h = q.mean_total_time_h;
                a.energy_per_session_kwh = q.energy_per_session_kwh;
                a.energy_kwh = q.energy_rate_kwh_per_h();
                a.blocking_prob = q.blocking_prob;
                a.effective_arrival_rate = q.effective_arrival_rate;
            }
            if (has_des(p.mode)) {
                const SimResult r = simulate(des_config_for(p, first, *station_flows[first.station], config));
                for (int h = 0; h < kHoursPerDay; ++h) {
                    DesCell& d = t.des[base + h];
                    const auto& hs = r.hourly;
                    d.mean_queue = hs.mean_queue[h];
                    d.mean_wait_h = hs.mean_wait_h[h];
                    d.mean_service_h = hs.mean_service_h[h];
                    d.mean_total_time_h = hs.mean_total_time_h[h];
                    d.energy_kwh = hs.mean_energy_kwh[h];
                    d.max_queue = hs.max_queue[h];
                    d.max_wait_h = hs.max_wait_h[h];
                    d.max_total_time_h = hs.max_total_time_h[h];
                    d.max_energy_kwh = hs.max_energy_kwh[h];
                    d.blocking_prob = hs.blocking_prob(h);
                    d.arrivals = hs.arrivals[h];
                    d.blocked = hs.blocked[h];
                    if (p.mode == SweepMode::both) t.agree[base + h] = agrees(t.analytic[base + h], d) ? 1 : 0;
                }
            }
        } catch (const std::exception& e) {
            throw SweepError(p.key(first), e.what());
        }
    });
    return t;
}

inline void write_sweep_results(std::ostream& os, const SweepTable& t) {
    const SweepPlan& p = t.plan;
    const bool a = has_analytic(p.mode);
    const bool d = has_des(p.mode);
    std::string buf = "scenario,evp_percent,battery_kwh,station_id,plugs,hour,seed,lambda_vph";
    if (a)
        buf += ",a_rho,a_mean_queue,a_mean_wait_h,a_mean_service_h,a_mean_total_time_h,a_energy_per_session_kwh,"
               "a_energy_kwh,a_blocking_prob,a_effective_arrival_rate";
    if (d)
        buf += ",d_mean_queue,d_mean_wait_h,d_mean_service_h,d_mean_total_time_h,d_energy_kwh,d_max_queue,"
               "d_max_wait_h,d_max_total_time_h,d_max_energy_kwh,d_blocking_prob,d_arrivals,d_blocked";
    if (a && d) buf += ",agree";
    buf += '\n';

    auto put = [&buf](double v) {
        buf += ',';
        csv::append(buf, v);
    };
    for (std::size_t i = 0; i < t.size(); ++i) {
        const SweepCell c = p.cell(i);
        const Station& st = p.stations[c.station];
        buf += to_string(c.scenario);
        put(fraction_to_percent(c.ev_p));
        put(c.battery_kwh);
        buf += ',';
        buf += st.id;
        buf += ',';
        buf += std::to_string(st.plugs);
        buf += ',';
        buf += std::to_string(c.hour);
        buf += ',';
        buf += std::to_string(c.seed);
        put(t.arrival_rate[i]);
        if (a) {
            const auto& x = t.analytic[i];
            put(x.offered_load);
            put(x.mean_queue);
            put(x.mean_wait_h);
            put(x.mean_service_h);
            put(x.mean_total_time_h);
            put(x.energy_per_session_kwh);
            put(x.energy_kwh);
            put(x.blocking_prob);
            put(x.effective_arrival_rate);
        }
        if (d) {
            const auto& x = t.des[i];
            put(x.mean_queue);
            put(x.mean_wait_h);
            put(x.mean_service_h);
            put(x.mean_total_time_h);
            put(x.energy_kwh);
            put(x.max_queue);
            put(x.max_wait_h);
            put(x.max_total_time_h);
            put(x.max_energy_kwh);
            put(x.blocking_prob);
            buf += ',';
            buf += std::to_string(x.arrivals);
            buf += ',';
            buf += std::to_string(x.blocked);
        }
        if (a && d) buf += t.agree[i] ? ",1" : ",0";
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// One row per (scenario, ev_p, battery, plug count, hour): means over the stations in the group.
struct SweepSummaryRow {
    DemandScenario scenario = DemandScenario::OD2016;
    double ev_p = 0.0;
    double battery_kwh = 0.0;
    int plugs = 0;
    int hour = 0;
    int stations = 0;
    double mean_queue = 0.0;
    double mean_wait_h = 0.0;
    double mean_service_h = 0.0;
    double mean_total_time_h = 0.0;
    double mean_blocking_prob = 0.0;
    double mean_energy_kwh = 0.0;
    double total_energy_kwh = 0.0;
};

namespace detail {

struct CellView {
    double mean_queue, mean_wait_h, mean_service_h, mean_total_time_h, blocking_prob, energy_kwh;
};

inline CellView view(const SweepTable& t, std::size_t i) {
    if (!t.analytic.empty()) {
        const auto& a = t.analytic[i];
        return {a.mean_queue, a.mean_wait_h, a.mean_service_h, a.mean_total_time_h, a.blocking_prob, a.energy_kwh};
    }
    const auto& d = t.des[i];
    return {d.mean_queue, d.mean_wait_h, d.mean_service_h, d.mean_total_time_h, d.blocking_prob, d.energy_kwh};
}

}  // namespace detail

/// Aggregates by plug count. Uses the analytic columns when present, otherwise the simulated ones.
inline std::vector<SweepSummaryRow> summarize_by_plugs(const SweepTable& t) {
    using Key = std::tuple<std::size_t, std::size_t, std::size_t, int, int>;  // scenario, evp, battery idx, plugs, hour
    std::map<Key, SweepSummaryRow> groups;
    const SweepPlan& p = t.plan;
    const std::size_t S = p.stations.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const int hour = static_cast<int>(i % kHoursPerDay);
        std::size_t rest = i / kHoursPerDay;
        const std::size_t st = rest % S;
        rest /= S;
        const std::size_t bi = rest % p.battery_grid.size();
        rest /= p.battery_grid.size();
        const std::size_t ei = rest % p.evp_grid.size();
        const std::size_t si = rest / p.evp_grid.size();
        const int plugs = p.stations[st].plugs;
        auto [it, inserted] = groups.try_emplace(Key{si, ei, bi, plugs, hour});
        auto& g = it->second;
        if (inserted) {
            g.scenario = p.scenarios[si];
            g.ev_p = p.evp_grid[ei];
            g.battery_kwh = p.battery_grid[bi];
            g.plugs = plugs;
            g.hour = hour;
        }
        const auto v = detail::view(t, i);
        ++g.stations;
        g.mean_queue += v.mean_queue;
        g.mean_wait_h += v.mean_wait_h;
        g.mean_service_h += v.mean_service_h;
        g.mean_total_time_h += v.mean_total_time_h;
        g.mean_blocking_prob += v.blocking_prob;
        g.total_energy_kwh += v.energy_kwh;
    }
    std::vector<SweepSummaryRow> out;
    out.reserve(groups.size());
    for (auto& [k, g] : groups) {
        const double n = g.stations;
        g.mean_queue /= n;
        g.mean_wait_h /= n;
        g.mean_service_h /= n;
        g.mean_total_time_h /= n;
        g.mean_blocking_prob /= n;
        g.mean_energy_kwh = g.total_energy_kwh / n;
        out.push_back(g);
    }
    return out;
}

inline constexpr std::string_view kSummaryHeader =
    "scenario,evp_percent,battery_kwh,plugs,hour,stations,mean_queue,mean_wait_h,mean_service_h,"
    "mean_total_time_h,mean_blocking_prob,mean_energy_kwh,total_energy_kwh";

inline void write_sweep_summary(std::ostream& os, const std::vector<SweepSummaryRow>& rows) {
    os << kSummaryHeader << '\n';
    for (const auto& r : rows)
        os << to_string(r.scenario) << ',' << csv::fmt(fraction_to_percent(r.ev_p)) << ',' << csv::fmt(r.battery_kwh)
           << ',' << r.plugs << ',' << r.hour << ',' << r.stations << ',' << csv::fmt(r.mean_queue) << ','
           << csv::fmt(r.mean_wait_h) << ',' << csv::fmt(r.mean_service_h) << ',' << csv::fmt(r.mean_total_time_h)
           << ',' << csv::fmt(r.mean_blocking_prob) << ',' << csv::fmt(r.mean_energy_kwh) << ','
           << csv::fmt(r.total_energy_kwh) << '\n';
}

/// Network-wide charging energy per hour for one (scenario, ev_p %, battery) slice of a summary file.
inline HourlyArray load_charging_profile(const std::filesystem::path& path, DemandScenario scenario,
                                         double evp_percent, double battery_kwh) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    if (csv::split(line) != csv::split(kSummaryHeader)) reader.fail("not a sweep summary file");
    HourlyArray profile{};
    bool found = false;
    auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); };
    while (reader.next(line)) {
        auto c = csv::split(line);
        if (c.size() != 13) reader.fail("expected 13 columns");
        if (c[0] != to_string(scenario)) continue;
        auto evp = csv::to_double(c[1]);
        auto batt = csv::to_double(c[2]);
        auto hour = csv::to_int(c[4]);
        auto energy = csv::to_double(c[12]);
        if (!evp || !batt || !hour || !energy || *hour < 0 || *hour >= kHoursPerDay) reader.fail("malformed row");
        if (!close(*evp, evp_percent) || !close(*batt, battery_kwh)) continue;
        profile[static_cast<std::size_t>(*hour)] += *energy;
        found = true;
    }
    if (!found)
        throw ValidationError("charging", "no summary rows for " + std::string(to_string(scenario)) + ", ev_p " +
                                              csv::fmt(evp_percent) + " %, battery " + csv::fmt(battery_kwh) + " kWh");
    return profile;
}

/// Daily energy of every station-day in the table.
inline std::vector<StationDailyEnergy> station_daily_energy(const SweepTable& t) {
    std::vector<StationDailyEnergy> out;
    const SweepPlan& p = t.plan;
    out.reserve(p.day_count());
    for (std::size_t day = 0; day < p.day_count(); ++day) {
        const SweepCell c = p.cell(day * kHoursPerDay);
        StationDailyEnergy e;
        e.scenario = c.scenario;
        e.ev_p = c.ev_p;
        e.battery_kwh = c.battery_kwh;
        e.station_id = p.stations[c.station].id;
        e.plugs = p.stations[c.station].plugs;
        for (int h = 0; h < kHoursPerDay; ++h) e.daily_kwh += detail::view(t, day * kHoursPerDay + h).energy_kwh;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace evq
