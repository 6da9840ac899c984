#pragma once

// Synthetic Sydney-like inputs: a 25-station registry with the observed plug
// mix, bimodal (AM/PM) link flows, matching links and an evening-peaked
// state demand profile. Everything here is invented test data.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "evq/core.hpp"
#include "evq/coupling.hpp"
#include "evq/rng.hpp"

namespace evq::synth {

/// Plug count -> number of stations at the reference sites; every site has 22 kW chargers.
inline const std::vector<std::pair<int, int>>& reference_plug_mix() {
    static const std::vector<std::pair<int, int>> mix{{1, 7}, {2, 10}, {3, 2}, {4, 3}, {7, 1}, {10, 1}};
    return mix;
}

inline std::string numbered(const char* prefix, int i) {
    std::string s(prefix);
    if (i < 10) s += '0';
    return s + std::to_string(i);
}

inline StationRegistry stations_like_reference(int waiting_slots = kDefaultWaitingSlots) {
    std::vector<Station> out;
    int i = 1;
    for (auto [plugs, count] : reference_plug_mix())
        for (int k = 0; k < count; ++k, ++i)
            out.push_back(Station{numbered("S", i), plugs, 22.0, waiting_slots, numbered("L", i)});
    return StationRegistry(std::move(out));
}

/// Random registry of `n` stations whose plug counts are drawn from the reference mix.
inline StationRegistry random_stations(int n, std::uint64_t seed, int waiting_slots = kDefaultWaitingSlots) {
    Rng rng(derive_seed(seed, 11));
    std::vector<int> weights;
    for (auto [plugs, count] : reference_plug_mix()) weights.push_back(count);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::vector<Station> out;
    for (int i = 1; i <= n; ++i)
        out.push_back(Station{numbered("S", i), reference_plug_mix()[pick(rng)].first, 22.0, waiting_slots,
                              numbered("L", i)});
    return StationRegistry(std::move(out));
}

/// Relative daily flow shape, max 1: AM peak near 08:00, PM peak near 17:15, shallow midday.
inline HourlyArray bimodal_shape() {
    auto bump = [](double h, double mu, double sigma) { return std::exp(-0.5 * (h - mu) * (h - mu) / (sigma * sigma)); };
    HourlyArray s{};
    double peak = 0.0;
    for (int h = 0; h < kHoursPerDay; ++h) {
        const double x = h + 0.5;  // mid-hour
        s[h] = 0.06 + 0.80 * bump(x, 8.0, 1.5) + 1.00 * bump(x, 17.25, 2.0) + 0.25 * bump(x, 12.5, 2.5);
        peak = std::max(peak, s[h]);
    }
    for (auto& v : s) v /= peak;
    return s;
}

/// Peak-hour flow range per plug class. Busy corridors host the 7-plug site; the 10-plug
/// site sits on a quieter road.
inline std::pair<double, double> peak_flow_range(int plugs) {
    switch (plugs) {
        case 1: return {700.0, 1600.0};
        case 2: return {600.0, 1800.0};
        case 3: return {1200.0, 1600.0};
        case 4: return {1300.0, 2000.0};
        case 7: return {2500.0, 2800.0};
        case 10: return {800.0, 1000.0};
        default: return {800.0, 1500.0};
    }
}

inline std::vector<HourlyFlowSeries> flows_for(const StationRegistry& stations, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 21));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const HourlyArray shape = bimodal_shape();
    std::vector<HourlyFlowSeries> out;
    std::vector<std::string> seen;
    for (const auto& st : stations) {
        if (std::find(seen.begin(), seen.end(), st.link_id) != seen.end()) continue;
        seen.push_back(st.link_id);
        auto [lo, hi] = peak_flow_range(st.plugs);
        const double peak = lo + (hi - lo) * unit(rng);
        HourlyFlowSeries f;
        f.link_id = st.link_id;
        for (int h = 0; h < kHoursPerDay; ++h) {
            const double noise = 0.95 + 0.10 * unit(rng);
            f.flows[h] = std::round(peak * shape[h] * noise);
        }
        out.push_back(std::move(f));
    }
    return out;
}

/// Corridor links sized so the peak hour runs at roughly 70-80 % of capacity.
inline std::vector<LinkSpec> links_for(const std::vector<HourlyFlowSeries>& flows, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 31));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<LinkSpec> out;
    for (const auto& f : flows) {
        const double peak = *std::max_element(f.flows.begin(), f.flows.end());
        LinkSpec l;
        l.link_id = f.link_id;
        l.length_km = std::round((8.0 + 6.0 * unit(rng)) * 10.0) / 10.0;
        l.lanes = unit(rng) < 0.5 ? 2 : 3;
        l.free_flow_time_h = l.length_km / 50.0;
        l.capacity_vph = std::round(peak / (0.70 + 0.10 * unit(rng)));
        out.push_back(l);
    }
    return out;
}

/// State-wide demand with a morning shoulder and an 18:00 evening peak, MW.
inline GridProfile state_grid_profile() {
    return GridProfile{"state_synthetic",
                       {7200, 6900, 6700, 6600, 6650, 6900, 7600, 8400, 8700, 8600, 8500, 8400,
                        8300, 8250, 8300, 8500, 8900, 9600, 10200, 10000, 9500, 8900, 8200, 7600}};
}

}  // namespace evq::synth
