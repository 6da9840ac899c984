#pragma once

// Event-driven FCFS simulation of a single charging station.
//
// Arrivals follow piecewise-constant hourly rates (jittered once per
// replication), each admitted car draws a recharge fraction and a charging
// time, and a car that finds all N_c slots occupied is turned away. All
// statistics are taken over the window [warmup, horizon]; cars admitted in
// the window are followed to completion after the horizon.

#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "evq/config.hpp"
#include "evq/core.hpp"
#include "evq/demand.hpp"
#include "evq/errors.hpp"
#include "evq/parallel.hpp"
#include "evq/rng.hpp"

namespace evq {

struct SimConfig {
    Station station;
    double horizon_h = 1000.0;
    std::optional<double> warmup_h;  // defaults to 10 x mean service time
    ArrivalModel arrivals;
    SocSampler soc;
    double battery_kwh = 82.0;
    std::uint64_t replication_seed = 0;
    InterArrival inter_arrival = InterArrival::exponential;
    ServiceLaw service_law = ServiceLaw::exponential;
    bool record_trace = false;
    bool record_sessions = false;

    double mean_service_time_h() const {
        return soc.expected_value() * battery_kwh / station.charger_power_kw;
    }

    double effective_warmup_h() const { return warmup_h ? *warmup_h : 10.0 * mean_service_time_h(); }

    void validate() const {
        station.validate();
        arrivals.validate();
        soc.validate();
        if (!(battery_kwh > 0.0)) throw ValidationError("battery_kwh", "battery size must be positive");
        if (!(horizon_h > 0.0) || !std::isfinite(horizon_h))
            throw ValidationError("horizon_h", "horizon must be positive and finite");
        const double w = effective_warmup_h();
        if (!(w >= 0.0)) throw ValidationError("warmup_h", "warmup must be >= 0");
        if (!(w < horizon_h)) throw ValidationError("warmup_h", "warmup must be shorter than the horizon");
    }
};

enum class TraceKind : std::uint8_t { arrival = 0, block = 1, departure = 2 };

inline std::string_view to_string(TraceKind k) {
    switch (k) {
        case TraceKind::arrival: return "arrival";
        case TraceKind::block: return "block";
        case TraceKind::departure: return "departure";
    }
    return "?";
}

struct TraceEvent {
    double time_h;
    TraceKind kind;
    int system_count;  // cars on site after the event
};

/// Hour-of-day breakdown. Waiting/service figures are binned by arrival hour,
/// queue length and energy by the clock hour in which they occur.
struct HourlySimStats {
    HourlyArray mean_queue{};
    HourlyArray mean_wait_h{};
    HourlyArray mean_service_h{};
    HourlyArray mean_total_time_h{};
    HourlyArray mean_energy_kwh{};  // average energy delivered in one clock hour of this hour of day
    HourlyArray max_queue{};
    HourlyArray max_wait_h{};
    HourlyArray max_total_time_h{};
    HourlyArray max_energy_kwh{};
    std::array<std::uint64_t, kHoursPerDay> arrivals{};
    std::array<std::uint64_t, kHoursPerDay> blocked{};
    std::array<std::uint64_t, kHoursPerDay> completed{};

    double blocking_prob(int h) const {
        return arrivals[h] ? static_cast<double>(blocked[h]) / static_cast<double>(arrivals[h]) : 0.0;
    }
};

struct SimResult {
    double mean_queue = 0.0;             // O1, time average
    double mean_wait_h = 0.0;            // O2
    double mean_service_h = 0.0;         // O3
    double mean_total_time_h = 0.0;      // O4
    double energy_kwh_total = 0.0;       // O5, sum over completed sessions
    double energy_per_session_kwh = 0.0; // O5 per vehicle
    double max_queue = 0.0;              // O6
    double max_wait_h = 0.0;             // O7
    double max_total_time_h = 0.0;       // O8
    double max_hourly_energy_kwh = 0.0;  // O9
    double mean_hourly_energy_kwh = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t blocked = 0;
    std::uint64_t completed = 0;
    double window_h = 0.0;
    HourlySimStats hourly;
    std::uint64_t trace_hash = 0;
    std::vector<TraceEvent> trace;         // filled when record_trace
    std::vector<ChargeRequest> sessions;   // counted, completed sessions when record_sessions

    double blocking_prob() const {
        return arrivals ? static_cast<double>(blocked) / static_cast<double>(arrivals) : 0.0;
    }
};

namespace detail {

enum class EventKind : std::uint8_t { arrival, departure };

struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::uint32_t slot;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const noexcept {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct Car {
    double arrival = 0.0;
    double start = 0.0;
    double duration = 0.0;
    double recharge_fraction = 0.0;
    double energy_kwh = 0.0;
    bool counted = false;
};

inline int hour_of_day(double t) { return static_cast<int>(static_cast<std::int64_t>(std::floor(t)) % kHoursPerDay); }

class StationSimulation {
public:
    explicit StationSimulation(const SimConfig& cfg)
        : cfg_(cfg),
          warmup_(cfg.effective_warmup_h()),
          horizon_(cfg.horizon_h),
          arrival_rng_(derive_seed(cfg.replication_seed, 1)),
          service_rng_(derive_seed(cfg.replication_seed, 2)) {
        Rng jitter_rng(derive_seed(cfg.replication_seed, 3));
        const auto u = jitter_factors(cfg.arrivals.jitter_cv, jitter_rng);
        for (int h = 0; h < kHoursPerDay; ++h) {
            rate_[h] = cfg.arrivals.hourly_rate[h] * u[h];
            any_rate_ = any_rate_ || rate_[h] > 0.0;
        }
        in_service_.resize(static_cast<std::size_t>(cfg.station.plugs));
        for (int s = cfg.station.plugs - 1; s >= 0; --s) free_slots_.push_back(static_cast<std::uint32_t>(s));
        first_bucket_ = static_cast<std::int64_t>(std::floor(warmup_));
        const auto last_bucket = static_cast<std::int64_t>(std::ceil(horizon_));
        energy_buckets_.assign(static_cast<std::size_t>(std::max<std::int64_t>(last_bucket - first_bucket_, 1)), 0.0);
    }

    SimResult run() {
        const double t0 = next_arrival(0.0);
        if (t0 <= horizon_) push(t0, EventKind::arrival, 0);

        while (!events_.empty()) {
            const Event e = events_.top();
            events_.pop();
            accumulate_queue(last_time_, e.time);
            last_time_ = e.time;
            if (e.kind == EventKind::arrival) on_arrival(e.time);
            else on_departure(e.time, e.slot);
            check_invariants();
        }
        accumulate_queue(last_time_, horizon_);
        return finish();
    }

private:
    void push(double t, EventKind kind, std::uint32_t slot) { events_.push(Event{t, seq_++, kind, slot}); }

    double next_arrival(double from) {
        if (!any_rate_) return std::numeric_limits<double>::infinity();
        double t = from;
        while (t <= horizon_) {
            const double hour_start = std::floor(t);
            const double r = rate_[hour_of_day(t)];
            if (r > 0.0) {
                if (cfg_.inter_arrival == InterArrival::exponential) {
                    // Memoryless: a draw that overshoots the hour restarts at the boundary.
                    const double dt = unit_exp_(arrival_rng_) / r;
                    if (t + dt < hour_start + 1.0) return t + dt;
                } else {
                    const double mean = 1.0 / r;
                    const double sd = mean * cfg_.arrivals.jitter_cv / 1.96;
                    if (sd == 0.0) return t + mean;
                    std::normal_distribution<double> normal(mean, sd);
                    double x;
                    do {
                        x = normal(arrival_rng_);
                    } while (!(x > 0.0));
                    return t + x;
                }
            }
            t = hour_start + 1.0;
        }
        return std::numeric_limits<double>::infinity();
    }

    void trace(double t, TraceKind kind) {
        trace_hash_ = fnv1a_u64(std::bit_cast<std::uint64_t>(t), trace_hash_);
        trace_hash_ = fnv1a_u64(static_cast<std::uint64_t>(kind), trace_hash_);
        trace_hash_ = fnv1a_u64(static_cast<std::uint64_t>(in_system_), trace_hash_);
        if (cfg_.record_trace) trace_.push_back(TraceEvent{t, kind, in_system_});
    }

    void on_arrival(double t) {
        const bool counted = t >= warmup_;
        const int hod = hour_of_day(t);
        if (counted) {
            ++arrivals_;
            ++hourly_arrivals_[hod];
        }
        if (in_system_ >= cfg_.station.capacity()) {
            if (counted) {
                ++blocked_;
                ++hourly_blocked_[hod];
            }
            trace(t, TraceKind::block);
        } else {
            ++in_system_;
            Car car;
            car.arrival = t;
            car.counted = counted;
            car.recharge_fraction = sample_recharge_fraction(cfg_.soc, service_rng_);
            car.energy_kwh = car.recharge_fraction * cfg_.battery_kwh;
            const double mean = car.energy_kwh / cfg_.station.charger_power_kw;
            car.duration = cfg_.service_law == ServiceLaw::exponential ? mean * unit_exp_(service_rng_) : mean;
            if (busy_ < cfg_.station.plugs) start(car, t);
            else waiting_.push_back(car);
            trace(t, TraceKind::arrival);
        }
        const double next = next_arrival(t);
        if (next <= horizon_) push(next, EventKind::arrival, 0);
    }

    void start(Car car, double t) {
        car.start = t;
        const std::uint32_t slot = free_slots_.back();
        free_slots_.pop_back();
        in_service_[slot] = car;
        ++busy_;
        push(t + car.duration, EventKind::departure, slot);
    }

    void on_departure(double t, std::uint32_t slot) {
        const Car car = in_service_[slot];
        free_slots_.push_back(slot);
        --busy_;
        --in_system_;
        deposit_energy(car);
        if (car.counted) record(car);
        if (!waiting_.empty()) {
            Car next = waiting_.front();
            waiting_.pop_front();
            start(next, t);
        }
        trace(t, TraceKind::departure);
    }

    void record(const Car& car) {
        const double wait = car.start - car.arrival;
        const double total = wait + car.duration;
        const int hod = hour_of_day(car.arrival);
        ++completed_;
        ++hourly_completed_[hod];
        sum_wait_ += wait;
        sum_service_ += car.duration;
        sum_total_ += total;
        energy_total_ += car.energy_kwh;
        max_wait_ = std::max(max_wait_, wait);
        max_total_ = std::max(max_total_, total);
        h_sum_wait_[hod] += wait;
        h_sum_service_[hod] += car.duration;
        h_sum_total_[hod] += total;
        h_max_wait_[hod] = std::max(h_max_wait_[hod], wait);
        h_max_total_[hod] = std::max(h_max_total_[hod], total);
        if (cfg_.record_sessions) sessions_.push_back(ChargeRequest{car.arrival, car.recharge_fraction, cfg_.battery_kwh});
    }

    // Spreads a session's energy uniformly over its charging interval, clipped to the window.
    void deposit_energy(const Car& car) {
        const double a0 = car.start;
        const double b0 = car.start + car.duration;
        const double a = std::max(a0, warmup_);
        const double b = std::min(b0, horizon_);
        if (car.duration <= 0.0) {
            if (a0 >= warmup_ && a0 <= horizon_) add_bucket(a0, car.energy_kwh);
            return;
        }
        if (!(b > a)) return;
        const double power = car.energy_kwh / car.duration;
        double t = a;
        while (t < b) {
            const double end = std::min(b, std::floor(t) + 1.0);
            add_bucket(t, power * (end - t));
            t = end;
        }
    }

    void add_bucket(double t, double kwh) {
        auto idx = static_cast<std::int64_t>(std::floor(t)) - first_bucket_;
        if (idx < 0) idx = 0;
        if (idx >= static_cast<std::int64_t>(energy_buckets_.size())) idx = static_cast<std::int64_t>(energy_buckets_.size()) - 1;
        energy_buckets_[static_cast<std::size_t>(idx)] += kwh;
    }

    void accumulate_queue(double a, double b) {
        a = std::max(a, warmup_);
        b = std::min(b, horizon_);
        if (!(b > a)) return;
        const double q = static_cast<double>(waiting_.size());
        max_queue_ = std::max(max_queue_, q);
        double t = a;
        while (t < b) {
            const double end = std::min(b, std::floor(t) + 1.0);
            const int hod = hour_of_day(t);
            h_area_[hod] += q * (end - t);
            h_time_[hod] += end - t;
            h_max_queue_[hod] = std::max(h_max_queue_[hod], q);
            t = end;
        }
    }

    void check_invariants() const {
        if (!waiting_.empty() && busy_ != cfg_.station.plugs)
            throw std::logic_error("simulate: a plug idles while a car waits");
        if (in_system_ != busy_ + static_cast<int>(waiting_.size()))
            throw std::logic_error("simulate: system count out of sync");
        if (in_system_ > cfg_.station.capacity()) throw std::logic_error("simulate: station over capacity");
    }

    SimResult finish() {
        SimResult r;
        r.window_h = horizon_ - warmup_;
        double area = 0.0;
        for (int h = 0; h < kHoursPerDay; ++h) area += h_area_[h];
        r.mean_queue = r.window_h > 0.0 ? area / r.window_h : 0.0;
        r.max_queue = max_queue_;
        r.arrivals = arrivals_;
        r.blocked = blocked_;
        r.completed = completed_;
        if (completed_ > 0) {
            const double n = static_cast<double>(completed_);
            r.mean_wait_h = sum_wait_ / n;
            r.mean_service_h = sum_service_ / n;
            r.mean_total_time_h = sum_total_ / n;
            r.energy_per_session_kwh = energy_total_ / n;
        }
        r.energy_kwh_total = energy_total_;
        r.max_wait_h = max_wait_;
        r.max_total_time_h = max_total_;

        // Only clock hours lying wholly inside the window feed the hourly energy figures.
        HourlyArray e_sum{};
        std::array<int, kHoursPerDay> e_count{};
        double bucket_sum = 0.0;
        int full_buckets = 0;
        for (std::size_t i = 0; i < energy_buckets_.size(); ++i) {
            const double start = static_cast<double>(first_bucket_ + static_cast<std::int64_t>(i));
            if (start < warmup_ || start + 1.0 > horizon_) continue;
            const int hod = hour_of_day(start);
            const double e = energy_buckets_[i];
            e_sum[hod] += e;
            ++e_count[hod];
            r.hourly.max_energy_kwh[hod] = std::max(r.hourly.max_energy_kwh[hod], e);
            r.max_hourly_energy_kwh = std::max(r.max_hourly_energy_kwh, e);
            bucket_sum += e;
            ++full_buckets;
        }
        if (full_buckets > 0) {
            r.mean_hourly_energy_kwh = bucket_sum / full_buckets;
        } else {
            for (double e : energy_buckets_) r.max_hourly_energy_kwh += e;
            r.mean_hourly_energy_kwh = r.max_hourly_energy_kwh;
        }

        for (int h = 0; h < kHoursPerDay; ++h) {
            auto& hs = r.hourly;
            hs.mean_queue[h] = h_time_[h] > 0.0 ? h_area_[h] / h_time_[h] : 0.0;
            hs.max_queue[h] = h_max_queue_[h];
            hs.arrivals[h] = hourly_arrivals_[h];
            hs.blocked[h] = hourly_blocked_[h];
            hs.completed[h] = hourly_completed_[h];
            if (hourly_completed_[h] > 0) {
                const double n = static_cast<double>(hourly_completed_[h]);
                hs.mean_wait_h[h] = h_sum_wait_[h] / n;
                hs.mean_service_h[h] = h_sum_service_[h] / n;
                hs.mean_total_time_h[h] = h_sum_total_[h] / n;
            }
            hs.max_wait_h[h] = h_max_wait_[h];
            hs.max_total_time_h[h] = h_max_total_[h];
            hs.mean_energy_kwh[h] = e_count[h] ? e_sum[h] / e_count[h] : 0.0;
        }
        r.trace_hash = trace_hash_;
        r.trace = std::move(trace_);
        r.sessions = std::move(sessions_);
        return r;
    }

    const SimConfig& cfg_;
    double warmup_;
    double horizon_;
    Rng arrival_rng_;
    Rng service_rng_;
    std::exponential_distribution<double> unit_exp_{1.0};
    HourlyArray rate_{};
    bool any_rate_ = false;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t seq_ = 0;
    double last_time_ = 0.0;
    int in_system_ = 0;
    int busy_ = 0;
    std::deque<Car> waiting_;
    std::vector<Car> in_service_;
    std::vector<std::uint32_t> free_slots_;

    std::uint64_t arrivals_ = 0, blocked_ = 0, completed_ = 0;
    double sum_wait_ = 0.0, sum_service_ = 0.0, sum_total_ = 0.0, energy_total_ = 0.0;
    double max_wait_ = 0.0, max_total_ = 0.0, max_queue_ = 0.0;
    HourlyArray h_area_{}, h_time_{}, h_max_queue_{};
    HourlyArray h_sum_wait_{}, h_sum_service_{}, h_sum_total_{}, h_max_wait_{}, h_max_total_{};
    std::array<std::uint64_t, kHoursPerDay> hourly_arrivals_{}, hourly_blocked_{}, hourly_completed_{};
    std::int64_t first_bucket_ = 0;
    std::vector<double> energy_buckets_;

    std::uint64_t trace_hash_ = 0xCBF29CE484222325ULL;
    std::vector<TraceEvent> trace_;
    std::vector<ChargeRequest> sessions_;
};

}  // namespace detail

inline SimResult simulate(const SimConfig& config) {
    config.validate();
    return detail::StationSimulation(config).run();
}

/// Across-replication mean with a 95 % normal-approximation half-width.
struct MetricSummary {
    double mean = 0.0;
    double half_width = 0.0;

    bool covers(double value) const { return std::fabs(value - mean) <= half_width; }
};

inline MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return m;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    m.half_width = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
    return m;
}

struct ReplicationSummary {
    std::vector<SimResult> runs;
    MetricSummary mean_queue, mean_wait_h, mean_service_h, mean_total_time_h;
    MetricSummary energy_kwh_total, energy_per_session_kwh;
    MetricSummary max_queue, max_wait_h, max_total_time_h, max_hourly_energy_kwh;
    MetricSummary blocking_prob;
};

/// Seed of replication r, derived from the configured replication seed.
inline std::uint64_t replication_seed(std::uint64_t base, int r) {
    return derive_seed(base, 0x5EED0000ULL + static_cast<std::uint64_t>(r));
}

inline ReplicationSummary replicate(const SimConfig& config, int n_reps, unsigned jobs = 0) {
    if (n_reps < 2) throw ValidationError("n_reps", "at least two replications are required");
    config.validate();
    ReplicationSummary out;
    out.runs.resize(static_cast<std::size_t>(n_reps));
    parallel_for(static_cast<std::size_t>(n_reps), jobs, [&](std::size_t r) {
        SimConfig c = config;
        c.replication_seed = replication_seed(config.replication_seed, static_cast<int>(r));
        out.runs[r] = simulate(c);
    });
    auto collect = [&](auto field) {
        std::vector<double> xs;
        xs.reserve(out.runs.size());
        for (const auto& run : out.runs) xs.push_back(field(run));
        return summarize(xs);
    };
    out.mean_queue = collect([](const SimResult& r) { return r.mean_queue; });
    out.mean_wait_h = collect([](const SimResult& r) { return r.mean_wait_h; });
    out.mean_service_h = collect([](const SimResult& r) { return r.mean_service_h; });
    out.mean_total_time_h = collect([](const SimResult& r) { return r.mean_total_time_h; });
    out.energy_kwh_total = collect([](const SimResult& r) { return r.energy_kwh_total; });
    out.energy_per_session_kwh = collect([](const SimResult& r) { return r.energy_per_session_kwh; });
    out.max_queue = collect([](const SimResult& r) { return r.max_queue; });
    out.max_wait_h = collect([](const SimResult& r) { return r.max_wait_h; });
    out.max_total_time_h = collect([](const SimResult& r) { return r.max_total_time_h; });
    out.max_hourly_energy_kwh = collect([](const SimResult& r) { return r.max_hourly_energy_kwh; });
    out.blocking_prob = collect([](const SimResult& r) { return r.blocking_prob(); });
    return out;
}

inline void write_trace_csv(std::ostream& os, const SimResult& result, const std::string& station_id) {
    os << "time_h,event,station_id,system_count\n";
    for (const auto& e : result.trace)
        os << csv::fmt(e.time_h) << ',' << to_string(e.kind) << ',' << station_id << ',' << e.system_count << '\n';
}

}  // namespace evq
