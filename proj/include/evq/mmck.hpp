#pragma once

// Steady-state solution of the finite-capacity multi-server charging queue
// M/M/c/N: c plugs, at most N cars on site (charging plus waiting), FCFS.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <optional>
#include <vector>

namespace evq {

/// Charging time of one session: recharge_fraction * battery / charger power, in hours.
inline double service_time(double recharge_fraction, double battery_kwh, double charger_power_kw) {
    if (!(recharge_fraction > 0.0) || recharge_fraction > 1.0)
        throw std::domain_error("service_time: recharge_fraction must lie in (0, 1]");
    if (!(battery_kwh > 0.0)) throw std::domain_error("service_time: battery_kwh must be positive");
    if (!(charger_power_kw > 0.0)) throw std::domain_error("service_time: charger_power_kw must be positive");
    return recharge_fraction * battery_kwh / charger_power_kw;
}

/// Offered load in Erlangs: arrival rate (veh/h) times mean service time (h).
inline double offered_load(double arrival_rate, double mean_service_time_h) {
    if (!(mean_service_time_h > 0.0)) throw std::domain_error("offered_load: mean service time must be positive");
    if (!(arrival_rate >= 0.0)) throw std::domain_error("offered_load: arrival rate must be >= 0");
    return arrival_rate * mean_service_time_h;
}

/// Erlang-B blocking probability by the recursion B(k) = rho B(k-1) / (k + rho B(k-1)).
inline double erlang_b(int servers, double load) {
    if (servers < 1) throw std::domain_error("erlang_b: servers must be >= 1");
    if (!(load >= 0.0)) throw std::domain_error("erlang_b: load must be >= 0");
    double b = 1.0;
    for (int k = 1; k <= servers; ++k) b = load * b / (k + load * b);
    return b;
}

struct QueueParams {
    double arrival_rate = 0.0;        // lambda, vehicles per hour
    double mean_service_time_h = 1.0; // E[S]; the service rate is its reciprocal
    int servers = 1;                  // plugs
    int capacity = 1;                 // N >= servers, total cars on site
    double charger_power_kw = 22.0;   // only used for the per-session energy
    std::optional<double> session_energy_kwh;  // frac x B when known; otherwise power x E[S]

    void validate() const {
        if (servers < 1) throw std::domain_error("QueueParams: servers must be >= 1");
        if (capacity < servers) throw std::domain_error("QueueParams: capacity must be >= servers");
        if (!std::isfinite(arrival_rate) || arrival_rate < 0.0)
            throw std::domain_error("QueueParams: arrival_rate must be finite and >= 0");
        if (!(mean_service_time_h > 0.0) || !std::isfinite(mean_service_time_h))
            throw std::domain_error("QueueParams: mean_service_time_h must be positive");
        if (!(charger_power_kw > 0.0)) throw std::domain_error("QueueParams: charger_power_kw must be positive");
        if (session_energy_kwh && !(*session_energy_kwh >= 0.0))
            throw std::domain_error("QueueParams: session_energy_kwh must be >= 0");
    }
};

struct QueueSolution {
    std::vector<double> pi;              // pi[k] = P(k cars on site), k = 0..N
    double offered_load = 0.0;           // rho
    double mean_queue = 0.0;             // O1, cars waiting (not charging)
    double mean_wait_h = 0.0;            // O2, admitted cars
    double mean_service_h = 0.0;         // O3
    double mean_total_time_h = 0.0;      // O4 = O2 + O3
    double energy_per_session_kwh = 0.0; // O5 per vehicle = power * O3
    double blocking_prob = 0.0;          // pi[N]
    double effective_arrival_rate = 0.0; // lambda (1 - pi[N])
    double mean_in_system = 0.0;
    double mean_busy_plugs = 0.0;

    /// Expected energy delivered per hour = admitted rate * energy per session.
    double energy_rate_kwh_per_h() const noexcept { return effective_arrival_rate * energy_per_session_kwh; }
};

namespace detail {

struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) c += (sum - t) + x;
        else c += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

}  // namespace detail

/// Unnormalised birth-death weights are built outward from the mode with w[mode] = 1,
/// so every weight is <= 1 and nothing overflows even for N in the tens of thousands.
inline QueueSolution solve(const QueueParams& p) {
    p.validate();
    const int c = p.servers;
    const int n = p.capacity;
    const double rho = p.arrival_rate * p.mean_service_time_h;

    // Ratio w[k]/w[k-1] = rho / min(k, c); the chain peaks where the ratio crosses 1.
    int mode = 0;
    if (rho >= c) {
        mode = n;
    } else {
        mode = static_cast<int>(std::floor(rho));
        if (mode > n) mode = n;
    }

    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    w[mode] = 1.0;
    for (int k = mode; k > 0; --k) w[k - 1] = w[k] * (std::min(k, c) / rho);
    for (int k = mode; k < n; ++k) w[k + 1] = w[k] * (rho / std::min(k + 1, c));

    detail::CompensatedSum total;
    for (double x : w) total.add(x);
    const double z = total.value();

    QueueSolution s;
    s.pi.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) s.pi[k] = w[k] / z;

    detail::CompensatedSum queue, in_system, busy;
    for (int k = 0; k <= n; ++k) {
        const double pk = s.pi[k];
        if (k > c) queue.add((k - c) * pk);
        in_system.add(k * pk);
        busy.add(std::min(k, c) * pk);
    }

    s.offered_load = rho;
    s.mean_queue = queue.value();
    s.mean_in_system = in_system.value();
    s.mean_busy_plugs = busy.value();
    s.blocking_prob = s.pi[n];
    s.effective_arrival_rate = p.arrival_rate * (1.0 - s.blocking_prob);
    s.mean_wait_h = s.effective_arrival_rate > 0.0 ? s.mean_queue / s.effective_arrival_rate : 0.0;
    s.mean_service_h = p.mean_service_time_h;
    s.mean_total_time_h = s.mean_wait_h + s.mean_service_h;
    s.energy_per_session_kwh = p.session_energy_kwh.value_or(p.charger_power_kw * p.mean_service_time_h);
    return s;
}

}  // namespace evq
