#pragma once

// Hour-by-hour analytic evaluation of one station: link flow -> arrival rate
// -> steady-state queue for each hour of the day.

#include <array>
#include <optional>

#include "evq/core.hpp"
#include "evq/demand.hpp"
#include "evq/mmck.hpp"

namespace evq {

struct StationDayInputs {
    const Station* station = nullptr;
    const HourlyFlowSeries* flows = nullptr;
    double ev_p = 0.0;  // fraction; 0 gives an idle station
    DemandScenario scenario = DemandScenario::OD2016;
    double battery_kwh = 82.0;
    SocSampler soc{};
    RateModulation modulation{};
};

struct StationDay {
    HourlyArray arrival_rate{};
    std::array<QueueSolution, kHoursPerDay> hours;

    HourlyArray mean_queue() const {
        HourlyArray q{};
        for (int h = 0; h < kHoursPerDay; ++h) q[h] = hours[h].mean_queue;
        return q;
    }

    /// Expected energy delivered in each hour, kWh.
    HourlyArray energy_kwh() const {
        HourlyArray e{};
        for (int h = 0; h < kHoursPerDay; ++h) e[h] = hours[h].energy_rate_kwh_per_h();
        return e;
    }

    double daily_energy_kwh() const {
        double t = 0.0;
        for (double e : energy_kwh()) t += e;
        return t;
    }
};

inline QueueParams queue_params(const Station& s, double arrival_rate, double mean_service_h,
                                std::optional<double> session_energy_kwh = std::nullopt) {
    return QueueParams{arrival_rate, mean_service_h, s.plugs, s.capacity(), s.charger_power_kw, session_energy_kwh};
}

inline StationDay evaluate_station_day(const StationDayInputs& in) {
    const Station& st = *in.station;
    const double mean_service = mean_service_time_h(in.soc, in.battery_kwh, st.charger_power_kw);
    const double session_energy = in.soc.expected_value() * in.battery_kwh;
    StationDay day;
    if (in.ev_p > 0.0) {
        day.arrival_rate = arrival_rates(*in.flows, in.ev_p, in.scenario, st.id, 0.0, in.modulation).hourly_rate;
    }
    for (int h = 0; h < kHoursPerDay; ++h) day.hours[h] = solve(queue_params(st, day.arrival_rate[h], mean_service, session_energy));
    return day;
}

}  // namespace evq
