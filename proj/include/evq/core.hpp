#pragma once

// Domain types shared across the toolkit and ingestion of the station,
// flow and grid-profile CSV files.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "evq/csv.hpp"
#include "evq/errors.hpp"

namespace evq {

inline constexpr int kHoursPerDay = 24;
using HourlyArray = std::array<double, kHoursPerDay>;

// ---------------------------------------------------------------------------
// Demand scenarios
// ---------------------------------------------------------------------------

enum class DemandScenario { OD2016, OD15, OD30 };

inline constexpr std::string_view to_string(DemandScenario s) {
    switch (s) {
        case DemandScenario::OD2016: return "OD2016";
        case DemandScenario::OD15: return "OD15";
        case DemandScenario::OD30: return "OD30";
    }
    return "?";
}

inline DemandScenario parse_scenario(std::string_view name) {
    if (name == "OD2016") return DemandScenario::OD2016;
    if (name == "OD15") return DemandScenario::OD15;
    if (name == "OD30") return DemandScenario::OD30;
    throw std::invalid_argument("unknown demand scenario '" + std::string(name) + "'");
}

/// Multiplier applied to every observed flow: baseline, +15 %, +30 %.
inline constexpr double demand_scale(DemandScenario s) {
    switch (s) {
        case DemandScenario::OD2016: return 1.0;
        case DemandScenario::OD15: return 1.15;
        case DemandScenario::OD30: return 1.30;
    }
    return 1.0;
}

inline constexpr double percent_to_fraction(double pct) { return pct / 100.0; }
inline constexpr double fraction_to_percent(double frac) { return frac * 100.0; }

// ---------------------------------------------------------------------------
// Station and registry
// ---------------------------------------------------------------------------

inline constexpr int kDefaultWaitingSlots = 10;

struct Station {
    std::string id;
    int plugs = 1;
    double charger_power_kw = 22.0;
    int waiting_slots = kDefaultWaitingSlots;
    std::string link_id;

    /// Total number of cars the site can hold, charging plus waiting.
    int capacity() const noexcept { return plugs + waiting_slots; }

    void validate() const {
        if (id.empty()) throw ValidationError("id", "station id must not be empty");
        if (plugs < 1) throw ValidationError("plugs", "station '" + id + "' must have at least one plug");
        if (!(charger_power_kw > 0.0) || !std::isfinite(charger_power_kw))
            throw ValidationError("charger_power_kw", "station '" + id + "' needs a positive charger power");
        if (waiting_slots < 0)
            throw ValidationError("waiting_slots", "station '" + id + "' has negative waiting capacity");
        if (link_id.empty()) throw ValidationError("link_id", "station '" + id + "' has no link");
    }
};

class StationRegistry {
public:
    StationRegistry() = default;

    explicit StationRegistry(std::vector<Station> stations) : stations_(std::move(stations)) {
        std::unordered_set<std::string> seen;
        for (const auto& s : stations_) {
            s.validate();
            if (!seen.insert(s.id).second) throw ValidationError("id", "duplicate station id '" + s.id + "'");
        }
    }

    const std::vector<Station>& stations() const noexcept { return stations_; }
    std::size_t size() const noexcept { return stations_.size(); }
    bool empty() const noexcept { return stations_.empty(); }
    auto begin() const noexcept { return stations_.begin(); }
    auto end() const noexcept { return stations_.end(); }
    const Station& operator[](std::size_t i) const { return stations_.at(i); }

    const Station* find(std::string_view id) const {
        for (const auto& s : stations_)
            if (s.id == id) return &s;
        return nullptr;
    }

    /// plug count -> number of stations
    std::map<int, int> plug_histogram() const {
        std::map<int, int> h;
        for (const auto& s : stations_) ++h[s.plugs];
        return h;
    }

private:
    std::vector<Station> stations_;
};

inline constexpr std::string_view kStationsHeader = "id,plugs,charger_power_kw,waiting_slots,link_id";

/// Reads the stations CSV. An empty `waiting_slots` cell takes `default_waiting_slots`.
inline StationRegistry load_station_registry(const std::filesystem::path& path,
                                             int default_waiting_slots = kDefaultWaitingSlots) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    const auto header = csv::split(line);
    const std::vector<std::string> expected = csv::split(kStationsHeader);
    if (header != expected) reader.fail("expected header '" + std::string(kStationsHeader) + "'");

    std::vector<Station> stations;
    std::unordered_set<std::string> seen;
    while (reader.next(line)) {
        auto cells = csv::split(line);
        if (cells.size() != expected.size())
            reader.fail("expected " + std::to_string(expected.size()) + " columns, got " +
                        std::to_string(cells.size()));
        Station s;
        s.id = cells[0];
        auto plugs = csv::to_int(cells[1]);
        if (!plugs) reader.fail("plugs: not an integer: '" + cells[1] + "'");
        s.plugs = static_cast<int>(*plugs);
        auto power = csv::to_double(cells[2]);
        if (!power) reader.fail("charger_power_kw: not a number: '" + cells[2] + "'");
        s.charger_power_kw = *power;
        if (cells[3].empty()) {
            s.waiting_slots = default_waiting_slots;
        } else {
            auto slots = csv::to_int(cells[3]);
            if (!slots) reader.fail("waiting_slots: not an integer: '" + cells[3] + "'");
            s.waiting_slots = static_cast<int>(*slots);
        }
        s.link_id = cells[4];
        try {
            s.validate();
        } catch (const ValidationError& e) {
            throw e.located(reader.source() + ":" + std::to_string(reader.line_no()));
        }
        if (!seen.insert(s.id).second)
            throw ValidationError("id", "duplicate station id '" + s.id + "'")
                .located(reader.source() + ":" + std::to_string(reader.line_no()));
        stations.push_back(std::move(s));
    }
    return StationRegistry(std::move(stations));
}

inline void write_registry(std::ostream& os, const StationRegistry& registry) {
    os << kStationsHeader << '\n';
    for (const auto& s : registry)
        os << s.id << ',' << s.plugs << ',' << csv::fmt(s.charger_power_kw) << ',' << s.waiting_slots << ','
           << s.link_id << '\n';
}

inline void write_registry(const std::filesystem::path& path, const StationRegistry& registry) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError(path.string() + ": cannot open for writing");
    write_registry(os, registry);
}

// ---------------------------------------------------------------------------
// Hourly link flows
// ---------------------------------------------------------------------------

struct HourlyFlowSeries {
    std::string link_id;
    HourlyArray flows{};                     // vehicles per hour, hour-of-day 0..23
    std::optional<HourlyArray> avg_d_km;     // mean trip distance per hour, when supplied

    void validate() const {
        if (link_id.empty()) throw ValidationError("link_id", "flow series without link id");
        for (int h = 0; h < kHoursPerDay; ++h) {
            if (!std::isfinite(flows[h]) || flows[h] < 0.0)
                throw ValidationError(csv::hour_column("h", h),
                                      "link '" + link_id + "' has a negative or non-finite flow");
            if (avg_d_km && (!std::isfinite((*avg_d_km)[h]) || (*avg_d_km)[h] < 0.0))
                throw ValidationError(csv::hour_column("avg_d_km_h", h),
                                      "link '" + link_id + "' has a negative or non-finite distance");
        }
    }

    HourlyFlowSeries scaled(double factor) const {
        HourlyFlowSeries out = *this;
        for (auto& f : out.flows) f *= factor;
        return out;
    }

    HourlyFlowSeries scaled(DemandScenario s) const { return scaled(demand_scale(s)); }

    double daily_total() const {
        double t = 0.0;
        for (double f : flows) t += f;
        return t;
    }
};

inline std::vector<std::string> flows_header(bool with_distance) {
    std::vector<std::string> h{"link_id"};
    for (int i = 0; i < kHoursPerDay; ++i) h.push_back(csv::hour_column("h", i));
    if (with_distance)
        for (int i = 0; i < kHoursPerDay; ++i) h.push_back(csv::hour_column("avg_d_km_h", i));
    return h;
}

/// Reads `link_id,h00..h23` or the 49-column variant with `avg_d_km_h00..avg_d_km_h23`.
inline std::vector<HourlyFlowSeries> load_flows(const std::filesystem::path& path) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    const auto header = csv::split(line);
    bool with_distance = false;
    if (header == flows_header(true)) {
        with_distance = true;
    } else if (header != flows_header(false)) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            auto col = csv::hour_column("h", h);
            if (std::find(header.begin(), header.end(), col) == header.end())
                reader.fail("missing hour column '" + col + "'");
        }
        reader.fail("expected header 'link_id,h00,...,h23' (optionally followed by avg_d_km_h00..23)");
    }
    const std::size_t ncols = with_distance ? 1 + 2 * kHoursPerDay : 1 + kHoursPerDay;

    std::vector<HourlyFlowSeries> out;
    std::unordered_set<std::string> seen;
    while (reader.next(line)) {
        auto cells = csv::split(line);
        if (cells.size() != ncols)
            reader.fail("expected " + std::to_string(ncols) + " columns, got " + std::to_string(cells.size()));
        HourlyFlowSeries s;
        s.link_id = cells[0];
        for (int h = 0; h < kHoursPerDay; ++h) {
            auto v = csv::to_double(cells[1 + h]);
            if (!v) reader.fail(csv::hour_column("h", h) + ": not a number: '" + cells[1 + h] + "'");
            s.flows[h] = *v;
        }
        if (with_distance) {
            HourlyArray d{};
            for (int h = 0; h < kHoursPerDay; ++h) {
                auto v = csv::to_double(cells[1 + kHoursPerDay + h]);
                if (!v) reader.fail(csv::hour_column("avg_d_km_h", h) + ": not a number");
                d[h] = *v;
            }
            s.avg_d_km = d;
        }
        try {
            s.validate();
        } catch (const ValidationError& e) {
            throw e.located(reader.source() + ":" + std::to_string(reader.line_no()));
        }
        if (!seen.insert(s.link_id).second)
            throw ValidationError("link_id", "duplicate link '" + s.link_id + "'")
                .located(reader.source() + ":" + std::to_string(reader.line_no()));
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_flows(std::ostream& os, const std::vector<HourlyFlowSeries>& series) {
    bool with_distance = !series.empty() && series.front().avg_d_km.has_value();
    auto header = flows_header(with_distance);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& s : series) {
        os << s.link_id;
        for (double f : s.flows) os << ',' << csv::fmt(f);
        if (with_distance) {
            if (!s.avg_d_km) throw ValidationError("avg_d_km", "mixed flow series with and without distances");
            for (double d : *s.avg_d_km) os << ',' << csv::fmt(d);
        }
        os << '\n';
    }
}

inline std::map<std::string, HourlyFlowSeries> index_by_link(const std::vector<HourlyFlowSeries>& series) {
    std::map<std::string, HourlyFlowSeries> m;
    for (const auto& s : series) m.emplace(s.link_id, s);
    return m;
}

// ---------------------------------------------------------------------------
// Electricity demand profile
// ---------------------------------------------------------------------------

struct GridProfile {
    std::string label;
    HourlyArray hourly_mw{};

    void validate() const {
        bool any_positive = false;
        for (int h = 0; h < kHoursPerDay; ++h) {
            if (!std::isfinite(hourly_mw[h]) || hourly_mw[h] < 0.0)
                throw ValidationError(csv::hour_column("h", h), "grid profile '" + label + "' has a negative value");
            any_positive = any_positive || hourly_mw[h] > 0.0;
        }
        if (!any_positive) throw ValidationError("hourly_mw", "grid profile '" + label + "' is all zero");
    }
};

inline std::vector<GridProfile> load_grid_profiles(const std::filesystem::path& path) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    auto expected = flows_header(false);
    expected[0] = "label";
    if (csv::split(line) != expected) reader.fail("expected header 'label,h00,...,h23'");
    std::vector<GridProfile> out;
    while (reader.next(line)) {
        auto cells = csv::split(line);
        if (cells.size() != expected.size())
            reader.fail("expected 25 columns, got " + std::to_string(cells.size()));
        GridProfile p;
        p.label = cells[0];
        for (int h = 0; h < kHoursPerDay; ++h) {
            auto v = csv::to_double(cells[1 + h]);
            if (!v) reader.fail(csv::hour_column("h", h) + ": not a number");
            p.hourly_mw[h] = *v;
        }
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw e.located(reader.source() + ":" + std::to_string(reader.line_no()));
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline void write_grid_profiles(std::ostream& os, const std::vector<GridProfile>& profiles) {
    os << "label";
    for (int h = 0; h < kHoursPerDay; ++h) os << ',' << csv::hour_column("h", h);
    os << '\n';
    for (const auto& p : profiles) {
        os << p.label;
        for (double v : p.hourly_mw) os << ',' << csv::fmt(v);
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scenario cell and charge request
// ---------------------------------------------------------------------------

struct ScenarioSpec {
    DemandScenario demand_scenario = DemandScenario::OD2016;
    double ev_p = 0.001;  // fraction, not percent
    double battery_kwh = 82.0;
    int hour = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(ev_p > 0.0) || ev_p > 1.0) throw ValidationError("ev_p", "penetration must lie in (0, 1]");
        if (!(battery_kwh > 0.0)) throw ValidationError("battery_kwh", "battery size must be positive");
        if (hour < 0 || hour >= kHoursPerDay) throw ValidationError("hour", "hour must lie in 0..23");
    }
};

struct ChargeRequest {
    double arrival_time = 0.0;       // hours
    double recharge_fraction = 0.5;  // share of battery capacity delivered
    double battery_kwh = 82.0;

    double energy_needed_kwh() const noexcept { return recharge_fraction * battery_kwh; }
};

}  // namespace evq
