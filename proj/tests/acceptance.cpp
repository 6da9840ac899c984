// Acceptance checks AC1..AC8. One PASS/FAIL line per criterion; exit status is
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evq/evq.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED " + what;
        }
    }
    void note(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

std::string num(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
}

struct Bundle {
    evq::StationRegistry stations = evq::load_station_registry(fs::path(EVQ_DATA_DIR) / "stations_north_sydney.csv");
    std::map<std::string, evq::HourlyFlowSeries> flows =
        evq::index_by_link(evq::load_flows(fs::path(EVQ_DATA_DIR) / "flows_north_sydney.csv"));
    std::vector<evq::LinkSpec> links = evq::load_links(fs::path(EVQ_DATA_DIR) / "links_north_sydney.csv");
    evq::GridProfile grid = evq::load_grid_profiles(fs::path(EVQ_DATA_DIR) / "state_grid.csv").at(0);
};

// Erlang-B straight from its definition, in long double.
double erlang_b_direct(int c, double a) {
    long double term = 1.0L, den = 1.0L;
    for (int k = 1; k <= c; ++k) {
        term *= static_cast<long double>(a) / k;
        den += term;
    }
    return static_cast<double>(term / den);
}

struct Draw {
    double lambda, es;
    int c, n;
};

std::vector<Draw> random_suite(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cd(1, 64);
    std::uniform_real_distribution<double> rho(0.0, 100.0), es(0.05, 5.0);
    std::vector<Draw> out;
    for (std::size_t i = 0; i < count; ++i) {
        const int c = cd(rng);
        std::uniform_int_distribution<int> nd(c, 1024);
        const double s = es(rng);
        out.push_back(Draw{rho(rng) / s, s, c, nd(rng)});
    }
    return out;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
    const auto t0 = Clock::now();
    Outcome o;
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> cd(1, 64);
    std::uniform_real_distribution<double> rd(0.0, 100.0);
    double worst_b = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const int c = cd(rng);
        const double a = rd(rng);
        const auto s = evq::solve(evq::QueueParams{a, 1.0, c, c, 22.0});
        worst_b = std::max({worst_b, std::fabs(s.blocking_prob - evq::erlang_b(c, a)),
                            std::fabs(s.blocking_prob - erlang_b_direct(c, a))});
    }
    o.require(worst_b <= 1e-12, "Erlang-B");
    o.note("max |pi_N - ErlangB| = " + num(worst_b, 3));

    double worst_mm1 = 0.0;
    for (double rho = 0.05; rho < 0.951; rho += 0.05) {
        const auto s = evq::solve(evq::QueueParams{rho, 1.0, 1, 500, 22.0});
        worst_mm1 = std::max(worst_mm1, std::fabs(s.mean_queue - rho * rho / (1.0 - rho)));
        worst_mm1 = std::max(worst_mm1, std::fabs(s.mean_wait_h - rho / (1.0 - rho)));
    }
    o.require(worst_mm1 <= 1e-6, "M/M/1");
    o.note("max M/M/1 dev = " + num(worst_mm1, 3));

    double worst_norm = 0.0;
    for (const auto& d : random_suite(10000, 102)) {
        const auto s = evq::solve(evq::QueueParams{d.lambda, d.es, d.c, d.n, 22.0});
        evq::detail::CompensatedSum z;
        for (double p : s.pi) z.add(p);
        worst_norm = std::max(worst_norm, std::fabs(z.value() - 1.0));
        if (!std::isfinite(s.mean_queue)) worst_norm = std::numeric_limits<double>::infinity();
    }
    o.require(worst_norm <= 1e-12, "normalisation");
    o.note("max |sum pi - 1| = " + num(worst_norm, 3) + " over 10000 draws");
    const double t = seconds_since(t0);
    o.require(t < 5.0, "runtime < 5 s");
    return o;
}

Outcome ac2() {
    const auto t0 = Clock::now();
    Outcome o;
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> cd(1, 6), wd(0, 10);
    std::uniform_real_distribution<double> util(0.3, 1.3), batt(50.0, 106.0), frac(0.2, 0.8);
    int agreed = 0;
    std::uint64_t min_arrivals = std::numeric_limits<std::uint64_t>::max();
    double worst_rel = 0.0;
    std::string first_bad;
    for (int i = 0; i < 20; ++i) {
        evq::SimConfig c;
        c.station = evq::Station{"R" + std::to_string(i), cd(rng), 22.0, wd(rng), "L"};
        const double f = frac(rng);
        c.soc = evq::SocSampler{f, 0.0, 0.2, 0.8};  // sd = 0: every car draws the same fraction
        c.battery_kwh = batt(rng);
        const double es = c.mean_service_time_h();
        const double lambda = util(rng) * c.station.plugs / es;
        c.arrivals = evq::ArrivalModel::constant(lambda, c.station.id, 0.0);
        c.replication_seed = rng();
        const double warm = c.effective_warmup_h();
        c.horizon_h = warm + 1.0e6 / lambda;
        const auto r = evq::simulate(c);
        const auto a = evq::solve(evq::QueueParams{lambda, es, c.station.plugs, c.station.capacity(), 22.0});
        min_arrivals = std::min(min_arrivals, r.arrivals);
        const bool ok = evq::within_agreement(a.mean_queue, r.mean_queue) &&
                        evq::within_agreement(a.mean_wait_h, r.mean_wait_h) &&
                        evq::within_agreement(a.blocking_prob, r.blocking_prob());
        auto rel = [](double x, double y) { return std::fabs(x - y) / std::max(std::fabs(x), 1e-12); };
        if (a.mean_queue > 0.01) worst_rel = std::max(worst_rel, rel(a.mean_queue, r.mean_queue));
        if (ok)
            ++agreed;
        else if (first_bad.empty())
            first_bad = "config " + std::to_string(i) + " (c=" + std::to_string(c.station.plugs) + ", N=" +
                        std::to_string(c.station.capacity()) + ", rho=" + num(lambda * es, 4) + "): O1 " +
                        num(a.mean_queue) + " vs " + num(r.mean_queue) + ", O2 " + num(a.mean_wait_h) + " vs " +
                        num(r.mean_wait_h) + ", B " + num(a.blocking_prob) + " vs " + num(r.blocking_prob());
    }
    o.require(agreed == 20, "agreement");
    o.require(min_arrivals >= 100000, "post-warmup arrivals >= 1e5");
    o.note(std::to_string(agreed) + "/20 configs agree, min arrivals " + std::to_string(min_arrivals) +
           ", worst O1 rel dev " + num(worst_rel, 3));
    if (!first_bad.empty()) o.note(first_bad);
    o.require(seconds_since(t0) < 120.0, "runtime < 2 min");
    return o;
}

Outcome ac3() {
    Outcome o;
    // analytic: per-session energy against frac x B, and against P x service time
    bool exact = true;
    double worst_ulps = 0.0;
    for (double frac = 0.2; frac <= 0.8 + 1e-12; frac += 0.01)
        for (double b : evq::default_battery_grid_kwh())
            for (double p : {7.0, 22.0, 50.0, 150.0}) {
                const double ts = evq::service_time(frac, b, p);
                const auto s = evq::solve(evq::QueueParams{0.5, ts, 2, 12, p, frac * b});
                if (s.energy_per_session_kwh != frac * b) exact = false;
                const double alt = p * s.mean_service_h;
                worst_ulps = std::max(worst_ulps, std::fabs(alt - frac * b) / (std::numeric_limits<double>::epsilon() * frac * b));
            }
    o.require(exact, "E_session == frac x B bitwise");
    o.require(worst_ulps <= 1.0, "P x service time within 1 ulp of frac x B");
    o.note("E_session == frac*B exactly; P*Ts within " + num(worst_ulps, 2) + " ulp");

    // station day built from the SoC sampler
    evq::StationDayInputs in;
    evq::Station st{"S", 2, 22.0, 10, "L"};
    evq::HourlyFlowSeries f;
    f.link_id = "L";
    f.flows.fill(800.0);
    in.station = &st;
    in.flows = &f;
    in.ev_p = 0.001;
    const auto day = evq::evaluate_station_day(in);
    o.require(day.hours[0].energy_per_session_kwh == in.soc.expected_value() * in.battery_kwh, "station day identity");

    // simulation: delivered energy equals requested energy of counted sessions
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        evq::SimConfig c;
        c.station = evq::Station{"E", static_cast<int>(1 + seed % 4), 22.0, 6, "L"};
        c.arrivals = evq::ArrivalModel::constant(0.4 * c.station.plugs, "E", 0.2);
        c.replication_seed = seed;
        c.horizon_h = 2000.0;
        c.record_sessions = true;
        c.service_law = seed % 2 ? evq::ServiceLaw::exponential : evq::ServiceLaw::deterministic;
        const auto r = evq::simulate(c);
        evq::detail::CompensatedSum want;
        for (const auto& s : r.sessions) want.add(s.energy_needed_kwh());
        worst = std::max(worst, std::fabs(r.energy_kwh_total - want.value()) / std::max(1.0, want.value()));
        if (r.sessions.size() != r.completed) worst = std::numeric_limits<double>::infinity();
    }
    o.require(worst <= 1e-9, "DES conservation");
    o.note("DES energy conservation rel err " + num(worst, 3));
    return o;
}

Outcome ac4() {
    Outcome o;
    double worst = 0.0;
    for (const auto& d : random_suite(10000, 102)) {
        const auto s = evq::solve(evq::QueueParams{d.lambda, d.es, d.c, d.n, 22.0});
        worst = std::max(worst, std::fabs(s.mean_queue - s.effective_arrival_rate * s.mean_wait_h));
        worst = std::max(worst, std::fabs(s.mean_in_system - s.effective_arrival_rate * s.mean_total_time_h));
    }
    o.require(worst <= 1e-9, "Little's law");
    o.note("max |L - lambda_eff W| = " + num(worst, 3) + " over 10000 draws");
    return o;
}

struct GroupMetrics {
    double mean_queue = 0.0, mean_wait_h = 0.0, daily_energy_kwh = 0.0;
};

GroupMetrics group_at(const Bundle& b, int plugs, double ev_p) {
    GroupMetrics g;
    int n = 0;
    for (const auto& st : b.stations) {
        if (st.plugs != plugs) continue;
        evq::StationDayInputs in{&st, &b.flows.at(st.link_id), ev_p, evq::DemandScenario::OD2016, 82.0, {}, {}};
        const auto day = evq::evaluate_station_day(in);
        for (const auto& h : day.hours) {
            g.mean_queue += h.mean_queue / 24.0;
            g.mean_wait_h += h.mean_wait_h / 24.0;
        }
        g.daily_energy_kwh += day.daily_energy_kwh();
        ++n;
    }
    g.mean_queue /= n;
    g.mean_wait_h /= n;
    g.daily_energy_kwh /= n;
    return g;
}

Outcome ac5(const Bundle& b) {
    Outcome o;
    constexpr double kPositive = 0.01;  // veh, daily mean
    const auto grid = evq::default_evp_grid_percent();
    double first1 = -1.0, first10 = -1.0, witness = -1.0;
    double w1 = 0.0, w10 = 0.0;
    for (double pct : grid) {
        const double e = evq::percent_to_fraction(pct);
        const auto g1 = group_at(b, 1, e);
        const auto g10 = group_at(b, 10, e);
        if (first1 < 0 && g1.mean_queue >= kPositive) first1 = pct;
        if (first10 < 0 && g10.mean_queue >= kPositive) first10 = pct;
        if (witness < 0 && g1.mean_wait_h > 2.0 && g10.mean_wait_h < 10.0 / 60.0) {
            witness = pct;
            w1 = g1.mean_wait_h;
            w10 = g10.mean_wait_h;
        }
    }
    o.require(first1 > 0 && (first10 < 0 || first1 < first10), "(a) queue onset ordering");
    o.note("(a) mean O1 >= 0.01 from ev_p " + num(first1) + "% (1 plug) vs " +
           (first10 < 0 ? std::string("never") : num(first10) + "%") + " (10 plugs)");
    o.require(witness > 0, "(b) wait contrast");
    o.note("(b) at ev_p " + num(witness) + "%: 1-plug wait " + num(w1, 3) + " h, 10-plug " + num(w10 * 60.0, 3) + " min");
    const auto g7 = group_at(b, 7, 0.05);
    const auto g2 = group_at(b, 2, 0.05);
    o.require(g7.daily_energy_kwh > g2.daily_energy_kwh, "(c) energy ordering");
    o.note("(c) ev_p 5%: 7-plug " + num(g7.daily_energy_kwh, 5) + " kWh/day vs 2-plug " + num(g2.daily_energy_kwh, 5));
    return o;
}

std::uint64_t hash_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = evq::fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

Outcome ac6(const Bundle& b) {
    Outcome o;
    const evq::Config cfg;
    const auto dir = fs::temp_directory_path() / "evq_acceptance_sweep";
    fs::create_directories(dir);
    std::vector<std::uint64_t> hashes;
    double worst_time = 0.0;
    std::size_t cells = 0;
    for (unsigned jobs : {0u, 1u}) {
        const auto t0 = Clock::now();
        const auto plan = evq::plan(cfg, b.stations);
        cells = plan.cell_count();
        const auto table = evq::run(plan, b.flows, cfg, jobs);
        const auto path = dir / ("sweep_results_" + std::to_string(jobs) + ".csv");
        {
            std::ofstream os(path, std::ios::binary);
            evq::write_sweep_results(os, table);
        }
        worst_time = std::max(worst_time, seconds_since(t0));
        hashes.push_back(hash_file(path));
    }
    o.require(cells >= 90000, ">= 90000 cells");
    o.require(worst_time < 600.0, "< 10 min");
    o.require(hashes[0] == hashes[1], "bit-identical rerun");
    char h[32];
    std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(hashes[0]));
    o.note(std::to_string(cells) + " cells, slowest run " + num(worst_time, 3) + " s with " +
           std::to_string(evq::resolve_jobs(0)) + " worker(s), results hash " + h + " on both runs");
    fs::remove_all(dir);
    return o;
}

Outcome ac7(const Bundle& b) {
    Outcome o;
    evq::CouplingInputs in{&b.links, &b.flows, &b.stations, evq::DemandScenario::OD2016, 82.0, {}, {}, {}};
    const auto zero = evq::congestion_at(in, 0.0);
    o.require(zero.delta_h() == 0.0, "zero delta at ev_p = 0");
    double last = zero.delta_h();
    bool monotone = true;
    double at5 = 0.0;
    for (double pct : evq::default_evp_grid_percent()) {
        const auto r = evq::congestion_at(in, evq::percent_to_fraction(pct));
        if (r.delta_h() < last) monotone = false;
        last = r.delta_h();
        if (pct == 5.0) at5 = r.delta_pct();
    }
    o.require(monotone, "monotone delta");
    o.note("delta(0) = " + num(zero.delta_h()) + " veh-h, monotone over " +
           std::to_string(evq::default_evp_grid_percent().size()) + " grid points, delta at ev_p 5% = " + num(at5, 4) +
           "% (reference orientation 4.9%)");
    return o;
}

Outcome ac8(const Bundle& b) {
    Outcome o;
    evq::GridProfile g;
    g.label = "synthetic";
    for (int h = 0; h < 24; ++h) g.hourly_mw[h] = 6000.0 + 3000.0 * std::exp(-0.5 * (h - 18) * (h - 18) / 4.0);
    evq::HourlyArray aligned{}, anti{};
    for (int h = 0; h < 24; ++h) {
        aligned[h] = g.hourly_mw[h] - 5000.0;
        anti[h] = 0.0;
    }
    anti[6] = 1.0;
    anti[7] = 0.8;
    const double r_al = evq::grid_coincidence(aligned, g).ratio;
    const double r_anti = evq::grid_coincidence(anti, g).ratio;
    o.require(r_al == 1.0, "aligned == 1.0");
    o.require(r_anti == 0.0, "anti-aligned == 0.0");

    // bundled pair: network charging demand at ev_p 0.1%, OD2016, 82 kWh against the state profile
    evq::HourlyArray charging{};
    for (const auto& st : b.stations) {
        evq::StationDayInputs in{&st, &b.flows.at(st.link_id), 0.001, evq::DemandScenario::OD2016, 82.0, {}, {}};
        const auto e = evq::evaluate_station_day(in).energy_kwh();
        for (int h = 0; h < 24; ++h) charging[h] += e[h];
    }
    const auto rep = evq::grid_coincidence(charging, b.grid);
    o.require(rep.ratio > 0.85 && rep.ratio <= 1.0, "bundled ratio in (0.85, 1]");
    o.note("aligned " + num(r_al) + ", anti-aligned " + num(r_anti) + ", bundled ratio " + num(rep.ratio, 4) +
           " at state peak hour " + std::to_string(rep.reference_hour));
    return o;
}

}  // namespace

int main() {
    std::printf("evq acceptance suite\n");
    const Bundle bundle;
    report("AC1", "analytic correctness", ac1);
    report("AC2", "simulation vs analytic", ac2);
    report("AC3", "energy identities", ac3);
    report("AC4", "Little's law", ac4);
    report("AC5", "penetration shape on bundled data", [&] { return ac5(bundle); });
    report("AC6", "sweep scale and determinism", [&] { return ac6(bundle); });
    report("AC7", "coupling sanity", [&] { return ac7(bundle); });
    report("AC8", "grid coincidence", [&] { return ac8(bundle); });
    std::printf("%d of 8 criteria failed\n", failures);
    return failures;
}
