#include <doctest.h>

#include <cmath>

#include "dltrack/config.hpp"
#include "dltrack/scenario.hpp"

using namespace dltrack;

namespace {

ScenarioConfig fig2_like() {
    ScenarioConfig sc;
    sc.num_scans = 8;
    sc.clutter_per_scan = 200;
    sc.doppler_bounds = {-10, 10};
    sc.targets = {{150, 200, 5, 1, 0.555}};
    return sc;
}

}  // namespace

TEST_CASE("batch sizes") {
    CHECK(generate(fig2_like()).batch.size() == 1608);

    ScenarioConfig fig1;
    fig1.targets = {{100, 100, 8, 1, 0.7}, {400, 300, -8, -2, 0.7}, {250, 420, 8, -4, 0.7}};
    const Scenario s = generate(fig1);
    CHECK(s.batch.size() == 3018);
    CHECK(s.batch.scans().size() == 6);
    CHECK(s.truth.per_scan.size() == 6);
    std::size_t target_rows = 0;
    for (int j : s.truth.target_of) target_rows += j >= 0;
    CHECK(target_rows == 18);
}

TEST_CASE("noise-free target lies on its line") {
    ScenarioConfig sc;
    sc.clutter_per_scan = 0;
    sc.sensor_sigma_x = sc.sensor_sigma_y = sc.sensor_sigma_doppler = 1e-15;
    sc.target_amplitude_sigma = 1e-15;
    sc.targets = {{100, 50, 3, -2, 0.6}};
    const Scenario s = generate(sc);
    REQUIRE(s.batch.size() == 6);
    for (const auto& m : s.batch.measurements()) {
        CHECK(m.x == doctest::Approx(100 + 3 * m.t).epsilon(1e-12));
        CHECK(m.y == doctest::Approx(50 - 2 * m.t).epsilon(1e-12));
        CHECK(m.doppler == doctest::Approx(3).epsilon(1e-12));
        CHECK(m.amplitude == doctest::Approx(0.6).epsilon(1e-12));
    }
    CHECK(s.batch[1].t == sc.revisit);
}

TEST_CASE("generation is deterministic per seed") {
    const ScenarioConfig sc = fig2_like();
    CHECK(generate(sc).batch == generate(sc).batch);
    ScenarioConfig other = sc;
    other.rng_seed = 2;
    CHECK_FALSE(generate(other).batch == generate(sc).batch);
    CHECK(replica_seed(1, 0) != replica_seed(1, 1));
    CHECK(replica_seed(1, 0) != replica_seed(2, 0));
    CHECK(replica_seed(7, 3) == replica_seed(7, 3));
}

TEST_CASE("misses drop target returns") {
    ScenarioConfig sc;
    sc.clutter_per_scan = 0;
    sc.num_scans = 40;
    sc.revisit = 0.5;
    sc.miss_probability = 0.5;
    sc.targets = {{100, 100, 1, 1, 0.6}};
    const Scenario s = generate(sc);
    CHECK(s.batch.size() < 40);
    CHECK(s.batch.size() > 5);
    long missed = 0;
    for (const auto& row : s.truth.per_scan) missed += row[0] < 0;
    CHECK(static_cast<std::size_t>(40 - missed) == s.batch.size());
}

TEST_CASE("targets leaving the area are rejected") {
    ScenarioConfig sc;
    sc.targets = {{490, 100, 10, 0, 0.6}};
    CHECK_THROWS_AS(generate(sc), config_error);
    sc.targets = {{100, 100, 30, 0, 0.6}};  // Doppler outside [-20, 20]
    CHECK_THROWS_AS(check_scenario_config(sc), config_error);
    sc.targets = {{100, 100, 1, 0, 0.6}};
    sc.sensor_sigma_x = -1;
    CHECK_THROWS_WITH_AS(check_scenario_config(sc), doctest::Contains("sensor_sigma_x"), config_error);
}

TEST_CASE("S/C report") {
    const ScrReport r = scr_report(fig2_like());
    CHECK(r.amplitude == doctest::Approx(1.7));
    CHECK(r.doppler == doctest::Approx(2.0));
    CHECK(r.doppler_db == doctest::Approx(6.0206).epsilon(1e-4));

    ScenarioConfig same = fig2_like();
    same.targets[0].amplitude = same.clutter_amplitude.mean;
    CHECK(scr_report(same).amplitude == 0.0);

    ScenarioConfig big = fig2_like();
    big.clutter_per_scan = 4000;
    const ScrReport e = empirical_scr(generate(big));
    CHECK(e.amplitude == doctest::Approx(1.7).epsilon(0.2));
}

TEST_CASE("bounds and floors follow the scenario") {
    const ScenarioConfig sc = fig2_like();
    const MeasurementBounds b = scenario_bounds(sc);
    CHECK(b[Dim::x].max == sc.area_width);
    CHECK(b[Dim::doppler].min == -10.0);
    CHECK(sensor_sigmas(sc) == Vec4{2, 2, 0.05, 0.5});
}
