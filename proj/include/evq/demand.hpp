#pragma once

// From link flows and penetration rate to per-station arrival processes and
// per-vehicle charge requests.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "evq/config.hpp"
#include "evq/core.hpp"
#include "evq/errors.hpp"
#include "evq/rng.hpp"

namespace evq {

/// Normal draw of the recharge fraction, truncated to [lower, upper] by rejection.
struct SocSampler {
    double mean = 0.5;
    double sd = 0.1;
    double lower = 0.2;
    double upper = 0.8;

    void validate() const {
        if (!(lower > 0.0) || upper > 1.0 || lower > upper)
            throw ValidationError("soc_bounds", "bounds must satisfy 0 < lo <= hi <= 1");
        if (mean < lower || mean > upper) throw ValidationError("soc_mean", "mean must lie within bounds");
        if (!(sd >= 0.0) || !std::isfinite(sd)) throw ValidationError("soc_sd", "sd must be finite and >= 0");
    }

    bool degenerate() const noexcept { return sd == 0.0 || lower == upper; }

    /// Mean of the truncated normal; equals `mean` whenever the bounds are symmetric about it.
    double expected_value() const {
        if (lower == upper) return lower;
        if (sd == 0.0) return mean;
        const double a = (lower - mean) / sd;
        const double b = (upper - mean) / sd;
        auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
        auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
        const double z = cdf(b) - cdf(a);
        if (!(z > 0.0)) return 0.5 * (lower + upper);
        return mean + sd * (phi(a) - phi(b)) / z;
    }
};

inline SocSampler soc_sampler(const Config& c) {
    SocSampler s{c.soc_mean, c.soc_sd, c.soc_bounds[0], c.soc_bounds[1]};
    s.validate();
    return s;
}

inline double sample_recharge_fraction(const SocSampler& sampler, Rng& rng) {
    if (sampler.lower == sampler.upper) return sampler.lower;
    if (sampler.sd == 0.0) return sampler.mean;
    std::normal_distribution<double> normal(sampler.mean, sampler.sd);
    while (true) {
        const double x = normal(rng);
        if (x >= sampler.lower && x <= sampler.upper) return x;
    }
}

struct ArrivalModel {
    std::string station_id;
    HourlyArray hourly_rate{};  // vehicles per hour that stop to charge
    double jitter_cv = 0.20;    // half-width of the per-hour multiplicative jitter band

    void validate() const {
        for (double r : hourly_rate)
            if (!std::isfinite(r) || r < 0.0) throw ValidationError("hourly_rate", "rates must be finite and >= 0");
        if (!(jitter_cv >= 0.0) || jitter_cv > 0.5) throw ValidationError("jitter_cv", "must lie in [0, 0.5]");
    }

    static ArrivalModel constant(double rate, std::string station_id = {}, double jitter_cv = 0.0) {
        ArrivalModel m;
        m.station_id = std::move(station_id);
        m.hourly_rate.fill(rate);
        m.jitter_cv = jitter_cv;
        return m;
    }
};

/// Optional linear modulation of rates by trip distance: rate * avg_d / ref_d.
struct RateModulation {
    std::optional<double> avg_d_ref_km;
};

/// rate[h] = flow[h] * scale(scenario) * ev_p (ev_p as a fraction).
inline ArrivalModel arrival_rates(const HourlyFlowSeries& flows, double ev_p, DemandScenario scenario,
                                  std::string station_id = {}, double jitter_cv = 0.20,
                                  const RateModulation& modulation = {}) {
    if (!(ev_p > 0.0) || ev_p > 1.0) throw ValidationError("ev_p", "penetration must lie in (0, 1]");
    flows.validate();
    ArrivalModel m;
    m.station_id = std::move(station_id);
    m.jitter_cv = jitter_cv;
    const double scale = demand_scale(scenario);
    for (int h = 0; h < kHoursPerDay; ++h) {
        double rate = flows.flows[h] * scale * ev_p;
        if (modulation.avg_d_ref_km && flows.avg_d_km) rate *= (*flows.avg_d_km)[h] / *modulation.avg_d_ref_km;
        m.hourly_rate[h] = rate;
    }
    m.validate();
    return m;
}

/// Per-replication factors U_h ~ normal(1, cv/1.96) truncated to [1-cv, 1+cv], one per hour of day.
/// The +/- cv band is read as a 95 % interval.
inline HourlyArray jitter_factors(double jitter_cv, Rng& rng) {
    HourlyArray u;
    u.fill(1.0);
    if (jitter_cv <= 0.0) return u;
    std::normal_distribution<double> normal(1.0, jitter_cv / 1.96);
    for (auto& x : u) {
        do {
            x = normal(rng);
        } while (x < 1.0 - jitter_cv || x > 1.0 + jitter_cv);
    }
    return u;
}

inline std::vector<double> battery_grid(const Config& c) {
    if (c.battery_grid_kwh.empty()) throw ValidationError("battery_grid_kwh", "grid must not be empty");
    for (double b : c.battery_grid_kwh)
        if (!(b > 0.0)) throw ValidationError("battery_grid_kwh", "battery sizes must be positive");
    return c.battery_grid_kwh;
}

/// Mean charging time used by the analytic model: E[recharge fraction] * battery / power.
inline double mean_service_time_h(const SocSampler& soc, double battery_kwh, double charger_power_kw) {
    return soc.expected_value() * battery_kwh / charger_power_kw;
}

}  // namespace evq
