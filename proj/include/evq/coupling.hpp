#pragma once

// Desk-scale stand-in for the traffic feedback loop: cars queueing at a
// station occupy road space on its link, shrinking the link's effective
// capacity inside a BPR volume-delay curve.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "evq/config.hpp"
#include "evq/core.hpp"
#include "evq/csv.hpp"
#include "evq/errors.hpp"
#include "evq/station_model.hpp"

namespace evq {

struct LinkSpec {
    std::string link_id;
    double free_flow_time_h = 0.05;
    double capacity_vph = 1800.0;
    double length_km = 1.0;
    int lanes = 1;

    void validate() const {
        if (link_id.empty()) throw ValidationError("link_id", "link id must not be empty");
        if (!(free_flow_time_h > 0.0)) throw ValidationError("free_flow_time_h", "link '" + link_id + "' must be > 0");
        if (!(capacity_vph > 0.0)) throw ValidationError("capacity_vph", "link '" + link_id + "' must be > 0");
        if (!(length_km > 0.0)) throw ValidationError("length_km", "link '" + link_id + "' must be > 0");
        if (lanes < 1) throw ValidationError("lanes", "link '" + link_id + "' needs at least one lane");
    }
};

/// Capacity left once `stored_queue_veh` cars occupy the link, floored at a share of capacity.
inline double effective_capacity(const LinkSpec& link, double stored_queue_veh, const BprParams& bpr = {}) {
    const double storage_km = link.length_km * link.lanes;
    const double free_share = std::max(0.0, 1.0 - stored_queue_veh * bpr.vehicle_length_km / storage_km);
    return link.capacity_vph * std::max(free_share, bpr.capacity_floor);
}

/// t = t0 (1 + alpha (v / c_eff)^beta), hours.
inline double link_time(const LinkSpec& link, double volume_vph, double stored_queue_veh, const BprParams& bpr = {}) {
    const double v = std::max(volume_vph, 0.0);
    const double c_eff = effective_capacity(link, std::max(stored_queue_veh, 0.0), bpr);
    return link.free_flow_time_h * (1.0 + bpr.alpha * std::pow(v / c_eff, bpr.beta));
}

inline constexpr std::string_view kLinksHeader = "link_id,free_flow_time_h,capacity_vph,length_km,lanes";

inline std::vector<LinkSpec> load_links(const std::filesystem::path& path) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    if (csv::split(line) != csv::split(kLinksHeader)) reader.fail("expected header '" + std::string(kLinksHeader) + "'");
    std::vector<LinkSpec> links;
    while (reader.next(line)) {
        auto cells = csv::split(line);
        if (cells.size() != 5) reader.fail("expected 5 columns, got " + std::to_string(cells.size()));
        LinkSpec l;
        l.link_id = cells[0];
        auto t0 = csv::to_double(cells[1]);
        auto cap = csv::to_double(cells[2]);
        auto len = csv::to_double(cells[3]);
        auto lanes = csv::to_int(cells[4]);
        if (!t0 || !cap || !len || !lanes) reader.fail("non-numeric link attribute");
        l.free_flow_time_h = *t0;
        l.capacity_vph = *cap;
        l.length_km = *len;
        l.lanes = static_cast<int>(*lanes);
        try {
            l.validate();
        } catch (const ValidationError& e) {
            throw e.located(reader.source() + ":" + std::to_string(reader.line_no()));
        }
        links.push_back(std::move(l));
    }
    return links;
}

inline void write_links(std::ostream& os, const std::vector<LinkSpec>& links) {
    os << kLinksHeader << '\n';
    for (const auto& l : links)
        os << l.link_id << ',' << csv::fmt(l.free_flow_time_h) << ',' << csv::fmt(l.capacity_vph) << ','
           << csv::fmt(l.length_km) << ',' << l.lanes << '\n';
}

/// Mean queue (O1) per hour at one station, the input the network model consumes.
struct StationQueueSeries {
    std::string station_id;
    std::string link_id;
    HourlyArray mean_queue{};
};

struct LinkTimes {
    std::string link_id;
    HourlyArray baseline_h{};
    HourlyArray with_queues_h{};
};

struct CongestionReport {
    double ev_p = 0.0;  // fraction
    std::vector<LinkTimes> links;
    double baseline_total_h = 0.0;     // vehicle-hours on links, no queues
    double with_queues_total_h = 0.0;  // vehicle-hours on links plus hours spent queueing
    double queue_hours = 0.0;          // the station share of with_queues_total_h

    double delta_h() const { return with_queues_total_h - baseline_total_h; }
    double delta_pct() const { return baseline_total_h > 0.0 ? 100.0 * delta_h() / baseline_total_h : 0.0; }
};

/// total = sum_links sum_h flow * link_time + sum_stations sum_h O1 (1 h cells);
/// the baseline is the same expression with every queue at zero.
inline CongestionReport network_delta(const std::vector<LinkSpec>& links,
                                      const std::map<std::string, HourlyFlowSeries>& flows,
                                      const std::vector<StationQueueSeries>& queues, double ev_p,
                                      const BprParams& bpr = {}) {
    std::map<std::string, HourlyArray> stored;
    for (const auto& l : links) {
        l.validate();
        stored.emplace(l.link_id, HourlyArray{});
    }
    for (const auto& q : queues) {
        auto it = stored.find(q.link_id);
        if (it == stored.end())
            throw ValidationError("link_id", "station '" + q.station_id + "' references unknown link '" + q.link_id + "'");
        for (int h = 0; h < kHoursPerDay; ++h) it->second[h] += q.mean_queue[h];
    }

    CongestionReport rep;
    rep.ev_p = ev_p;
    for (const auto& l : links) {
        auto f = flows.find(l.link_id);
        if (f == flows.end()) throw ValidationError("link_id", "no flow series for link '" + l.link_id + "'");
        LinkTimes lt;
        lt.link_id = l.link_id;
        const auto& q = stored.at(l.link_id);
        for (int h = 0; h < kHoursPerDay; ++h) {
            const double v = f->second.flows[h];
            lt.baseline_h[h] = link_time(l, v, 0.0, bpr);
            lt.with_queues_h[h] = link_time(l, v, q[h], bpr);
            rep.baseline_total_h += v * lt.baseline_h[h];
            rep.with_queues_total_h += v * lt.with_queues_h[h];
        }
        rep.links.push_back(std::move(lt));
    }
    for (const auto& q : queues)
        for (double x : q.mean_queue) rep.queue_hours += x;
    rep.with_queues_total_h += rep.queue_hours;
    return rep;
}

struct CouplingInputs {
    const std::vector<LinkSpec>* links = nullptr;
    const std::map<std::string, HourlyFlowSeries>* flows = nullptr;  // unscaled, by link id
    const StationRegistry* stations = nullptr;
    DemandScenario scenario = DemandScenario::OD2016;
    double battery_kwh = 82.0;
    SocSampler soc{};
    RateModulation modulation{};
    BprParams bpr{};
};

/// Solves every station for each hour at `ev_p` and feeds the mean queues into network_delta.
/// Link volumes are the scenario-scaled flows in both the baseline and the loaded network.
inline CongestionReport congestion_at(const CouplingInputs& in, double ev_p) {
    std::map<std::string, HourlyFlowSeries> scaled;
    for (const auto& [id, f] : *in.flows) scaled.emplace(id, f.scaled(in.scenario));
    std::vector<StationQueueSeries> queues;
    for (const auto& st : *in.stations) {
        auto f = in.flows->find(st.link_id);
        if (f == in.flows->end())
            throw ValidationError("link_id", "station '" + st.id + "' references link '" + st.link_id + "' without flows");
        StationDayInputs day{&st, &f->second, ev_p, in.scenario, in.battery_kwh, in.soc, in.modulation};
        queues.push_back(StationQueueSeries{st.id, st.link_id, evaluate_station_day(day).mean_queue()});
    }
    return network_delta(*in.links, scaled, queues, ev_p, in.bpr);
}

inline void write_congestion_summary(std::ostream& os, const std::vector<CongestionReport>& reports) {
    os << "evp_percent,baseline_total_h,with_queues_total_h,queue_hours,delta_h,delta_pct\n";
    for (const auto& r : reports)
        os << csv::fmt(fraction_to_percent(r.ev_p)) << ',' << csv::fmt(r.baseline_total_h) << ','
           << csv::fmt(r.with_queues_total_h) << ',' << csv::fmt(r.queue_hours) << ',' << csv::fmt(r.delta_h()) << ','
           << csv::fmt(r.delta_pct()) << '\n';
}

inline void write_link_times(std::ostream& os, const std::vector<CongestionReport>& reports) {
    os << "evp_percent,link_id,hour,baseline_h,with_queues_h\n";
    for (const auto& r : reports)
        for (const auto& l : r.links)
            for (int h = 0; h < kHoursPerDay; ++h)
                os << csv::fmt(fraction_to_percent(r.ev_p)) << ',' << l.link_id << ',' << h << ','
                   << csv::fmt(l.baseline_h[h]) << ',' << csv::fmt(l.with_queues_h[h]) << '\n';
}

}  // namespace evq
