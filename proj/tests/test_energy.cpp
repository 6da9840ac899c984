#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "evq/energy.hpp"
#include "evq/synth.hpp"

using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

evq::GridProfile shaped(const char* label, int peak_hour) {
    evq::GridProfile g;
    g.label = label;
    for (int h = 0; h < 24; ++h) g.hourly_mw[h] = 5000.0 + (h == peak_hour ? 3000.0 : 0.0);
    return g;
}

}  // namespace

TEST_CASE("aligned and anti-aligned profiles give exactly one and zero") {
    evq::HourlyArray charging{};
    charging[18] = 120.0;
    CHECK(evq::grid_coincidence(charging, shaped("g", 18)).ratio == 1.0);
    CHECK(evq::grid_coincidence(charging, shaped("g", 6)).ratio == 0.0);
}

TEST_CASE("ties at the grid peak report the earliest hour") {
    evq::GridProfile g = shaped("g", 17);
    g.hourly_mw[19] = g.hourly_mw[17];
    evq::HourlyArray charging{};
    charging.fill(1.0);
    charging[17] = 0.5;
    charging[19] = 2.0;
    auto r = evq::grid_coincidence(charging, g);
    CHECK(r.state_peak_hours == std::vector<int>{17, 19});
    CHECK(r.reference_hour == 17);
    CHECK(r.ratio == 0.25);
}

TEST_CASE("an all-zero charging profile is rejected") {
    evq::HourlyArray zero{};
    CHECK_THROWS_AS(evq::grid_coincidence(zero, shaped("g", 18)), evq::ValidationError);
    evq::HourlyArray neg{};
    neg[3] = -1.0;
    CHECK_THROWS_AS(evq::grid_coincidence(neg, shaped("g", 18)), evq::ValidationError);
}

TEST_CASE("grid overlay CSV") {
    evq::HourlyArray charging{};
    for (int h = 0; h < 24; ++h) charging[h] = h;
    auto r = evq::grid_coincidence(charging, evq::synth::state_grid_profile());
    std::ostringstream os;
    evq::write_grid_overlay(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "hour,grid_norm,charging_norm,is_state_peak,coincidence_ratio");
    int rows = 0, peaks = 0;
    while (std::getline(is, line)) {
        ++rows;
        auto cells = evq::csv::split(line);
        REQUIRE(cells.size() == 5);
        if (cells[3] == "1") ++peaks;
    }
    CHECK(rows == 24);
    CHECK(peaks == 1);
    CHECK_THAT(r.ratio, WithinAbs(18.0 / 23.0, 1e-15));
}

TEST_CASE("per-session energy identity: P x service time == frac x B") {
    for (double frac : {0.2, 0.37, 0.5, 0.8})
        for (double b : {50.0, 82.0, 106.0}) {
            const double ts = evq::service_time(frac, b, 22.0);
            auto s = evq::solve(evq::QueueParams{0.4, ts, 2, 12, 22.0});
            CHECK_THAT(s.energy_per_session_kwh, WithinAbs(frac * b, 1e-12));
        }
}

TEST_CASE("analytic station day energy equals admitted rate times session energy") {
    evq::Station st{"S", 2, 22.0, 10, "L"};
    evq::HourlyFlowSeries f;
    f.link_id = "L";
    for (int h = 0; h < 24; ++h) f.flows[h] = 50.0 * h;
    evq::StationDayInputs in{&st, &f, 0.01, evq::DemandScenario::OD2016, 82.0, evq::SocSampler{}, {}};
    auto day = evq::evaluate_station_day(in);
    auto e = evq::station_energy(day);
    for (int h = 0; h < 24; ++h)
        CHECK_THAT(e[h], WithinAbs(day.hours[h].effective_arrival_rate * 41.0, 1e-9));
    CHECK_THAT(evq::daily_total(e), WithinAbs(day.daily_energy_kwh(), 1e-9));
    // a 2-plug station never delivers more than 2 x 22 kWh in an hour
    for (double x : e) CHECK(x <= 44.0 + 1e-9);
}

TEST_CASE("energy grouped by plug count") {
    std::vector<evq::StationDailyEnergy> rows{
        {evq::DemandScenario::OD2016, 0.05, 82.0, "A", 1, 100.0},
        {evq::DemandScenario::OD2016, 0.05, 82.0, "B", 1, 300.0},
        {evq::DemandScenario::OD2016, 0.05, 82.0, "C", 7, 900.0},
        {evq::DemandScenario::OD15, 0.05, 82.0, "A", 1, 50.0},
    };
    auto g = evq::energy_vs_plugs(rows);
    REQUIRE(g.size() == 3);
    CHECK(g[0].plugs == 1);
    CHECK(g[0].stations == 2);
    CHECK(g[0].mean_daily_kwh == 200.0);
    CHECK(g[0].max_daily_kwh == 300.0);
    CHECK(g[1].plugs == 7);
    CHECK(g[2].scenario == evq::DemandScenario::OD15);
    CHECK_THROWS_AS(evq::energy_vs_plugs({}), evq::ValidationError);
}
