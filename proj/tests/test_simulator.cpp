#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "airshadow/pipeline.hpp"
#include "airshadow/simulator.hpp"
#include "pilot.hpp"

using namespace airshadow;

namespace {

Scenario small_generated(std::uint64_t seed, double days = 2.0) {
    std::map<ActivityLabel, std::size_t> counts;
    for (auto l : kAllLabels) counts[l] = 3;
    return generate_scenario(counts, days * 86400.0, seed);
}

} // namespace

TEST_CASE("zone parameter validation names the field") {
    ZoneParams z;
    CHECK_NOTHROW(z.validate());
    z.volume = 0.0;
    try {
        z.validate();
        FAIL("expected InvalidScenario");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidScenario);
        CHECK(e.subject() == "volume");
    }
    z = {};
    z.ac_setpoint = 30.0;
    CHECK_THROWS_AS(z.validate(), Error);
    z = {};
    z.day_pm_log_sigma = -1.0;
    CHECK_THROWS_AS(z.validate(), Error);
    CHECK_THROWS_AS(step_zone(resting_state(ZoneParams{}), ZoneParams{}, 0.0), Error);
}

TEST_CASE("resting state is a fixed point") {
    ZoneParams z;
    auto s = resting_state(z);
    s.ac = false;
    const auto next = step_zone(s, z, 1.0);
    for (auto p : kAllPollutants) CHECK(next[p] == doctest::Approx(s[p]).epsilon(1e-12));
}

TEST_CASE("single Euler step matches the rate equations") {
    ZoneParams z;
    ZoneState s = resting_state(z);
    s.occupancy = 3;
    s.fan = true;
    s[PollutantKind::CO2] = 1000.0;
    const auto n = step_zone(s, z, 2.0);
    const double lambda = z.lambda_base + z.lambda_fan;
    CHECK(n[PollutantKind::CO2] ==
          doctest::Approx(1000.0 + 2.0 * (z.co2_generation * 3 / z.volume - lambda * (1000.0 - z.co2_outdoor))));
    CHECK(n[PollutantKind::PM2_5] == doctest::Approx(z.pm25_baseline + 2.0 * z.pm25_fan_source));
    CHECK(n.t == 2.0);
}

TEST_CASE("Euler CO2 tracks the closed form") {
    CHECK(pilot::co2_euler_error() < 0.01);
    ZoneParams z;
    z.lambda_base = 0.0;
    CHECK(co2_closed_form(100.0, 400.0, 2, false, z) == doctest::Approx(400.0 + z.co2_generation * 2 / z.volume * 100));
}

TEST_CASE("calibration hits the requested level") {
    ZoneParams z;
    const double g = calibrate_co2_generation(2000.0, 400.0, 10, 3600.0, z);
    z.co2_generation = g;
    CHECK(co2_closed_form(3600.0, 400.0, 10, false, z) == doctest::Approx(2000.0).epsilon(1e-9));
    CHECK_THROWS_AS(calibrate_co2_generation(2000.0, 400.0, 0, 3600.0, z), Error);
}

TEST_CASE("presets hit their calibration targets") {
    const auto exam = pilot::exam();
    CHECK(exam.peak >= 4500.0);
    CHECK(exam.peak <= 5500.0);
    CHECK(exam.decay_per_hour >= 0.0);
    CHECK(exam.decay_per_hour < 0.05);

    double start = 0.0;
    const double ac = pilot::ac_after_30min(&start);
    CHECK(start == doctest::Approx(26.0));
    CHECK(std::abs(ac - 23.0) <= 0.5);

    const double eating = pilot::eating_elevated_seconds();
    CHECK(eating >= 480.0);
    CHECK(eating <= 720.0);
}

TEST_CASE("simulation invariants") {
    const auto run = simulate_scenario(small_generated(3), 3);
    std::size_t bad = 0;
    for (std::size_t d = 0; d < run.observed.devices().size(); ++d)
        for (auto p : kAllPollutants)
            for (double v : run.observed.channel(d, p)) {
                bad += std::isnan(v);
                if (p == PollutantKind::Humidity) bad += v < 0.0 || v > 100.0;
                if (p != PollutantKind::Temperature && p != PollutantKind::Humidity) bad += v < 0.0;
            }
    for (auto p : kAllPollutants)
        for (double v : run.truth.channel(0, p)) bad += !(v >= 0.0);
    CHECK(bad == 0);
}

TEST_CASE("simulation is deterministic and chunking does not matter") {
    const auto sc = small_generated(5, 1.0);
    const auto whole = simulate_scenario(sc, 9);
    const auto again = simulate_scenario(sc, 9);
    CHECK(whole.observed == again.observed);
    CHECK(whole.truth == again.truth);

    ScenarioRunner runner(sc, 9);
    auto first = runner.advance(1000);
    while (!runner.done()) {
        const auto next = runner.advance(7777);
        first.truth.append(next.truth);
        first.observed.append(next.observed);
    }
    CHECK(first.truth == whole.truth);
    CHECK(first.observed == whole.observed);

    const auto other = simulate_scenario(sc, 10);
    CHECK_FALSE(other.observed == whole.observed);
}

TEST_CASE("colocated devices stay within the noise margin") {
    auto sc = preset_scenario(Preset::Lab);
    sc.duration = 3600.0;
    sc.devices = {{DeviceId("a"), 1.0}, {DeviceId("b"), 1.0}};
    const auto run = simulate_scenario(sc, 2);
    for (auto p : kAllPollutants) CHECK(inter_device_gap(run.observed, 0, 1, p) <= sc.noise.margin[index_of(p)]);
}

TEST_CASE("day drift") {
    ZoneParams z;
    CHECK_FALSE(z.drifts());
    CHECK(zone_for_day(z, 1, 3).ambient_temp == z.ambient_temp);
    z.day_temp_sigma = 2.0;
    z.day_pm_log_sigma = 0.5;
    const auto a = zone_for_day(z, 1, 3);
    CHECK(a.ambient_temp == zone_for_day(z, 1, 3).ambient_temp);
    CHECK(a.ambient_temp != zone_for_day(z, 1, 4).ambient_temp);
    CHECK(a.pm10_baseline / a.pm25_baseline == doctest::Approx(z.pm10_baseline / z.pm25_baseline));
    for (std::size_t d = 0; d < 200; ++d) CHECK(zone_for_day(z, 7, d).ambient_temp > z.ac_setpoint);
}

TEST_CASE("generator meets the requested counts and spacing") {
    const auto counts = lab_class_counts();
    std::size_t total = 0;
    for (const auto& [l, n] : counts) total += n;
    CHECK(total == 705);

    const auto sc = generate_scenario(counts, 90 * 86400.0, 7);
    std::map<ActivityLabel, std::size_t> seen;
    double last = -1e9;
    for (const auto& ev : sc.script) {
        if (!ev.annotated) continue;
        ++seen[ev.label];
        CHECK(ev.t - last >= 1200.0);
        const double tod = std::fmod(ev.t, 86400.0);
        CHECK(tod >= 9 * 3600.0);
        CHECK(tod <= 23 * 3600.0);
        last = ev.t;
    }
    CHECK(seen == counts);
    CHECK(sc.annotations().size() == 705);
    CHECK(sc.zone.drifts());
    CHECK(generate_scenario(counts, 90 * 86400.0, 7) == sc);
    CHECK_FALSE(generate_scenario(counts, 90 * 86400.0, 8) == sc);
}

TEST_CASE("generator scripts are physically consistent") {
    const auto sc = small_generated(11, 3.0);
    int occupancy = 0;
    bool fan = false;
    bool ac = true;
    for (const auto& ev : sc.script) {
        switch (ev.label) {
        case ActivityLabel::Enter: ++occupancy; break;
        case ActivityLabel::Exit: CHECK(occupancy > 0); --occupancy; break;
        case ActivityLabel::FanOn: CHECK_FALSE(fan); fan = true; break;
        case ActivityLabel::FanOff: CHECK(fan); fan = false; break;
        case ActivityLabel::AcOn: CHECK_FALSE(ac); ac = true; break;
        case ActivityLabel::AcOff: CHECK(ac); ac = false; break;
        default: CHECK(occupancy > 0);
        }
    }
}

TEST_CASE("generator reports infeasible plans") {
    std::map<ActivityLabel, std::size_t> counts{{ActivityLabel::Enter, 100}};
    try {
        generate_scenario(counts, 86400.0, 1);
        FAIL("expected Infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
}

TEST_CASE("scenario files round-trip") {
    const auto sc = small_generated(4, 1.0);
    std::stringstream io;
    write_scenario(io, sc);
    const auto back = scenario_from_config(parse_config(io), 0);
    CHECK(back == sc);

    std::istringstream text("[scenario]\npreset = eating\n[script]\n60 enter\n30 eating\n90 exit silent\n");
    const auto custom = scenario_from_config(parse_config(text), 0);
    REQUIRE(custom.script.size() == 3);
    CHECK(custom.script[0].label == ActivityLabel::Eating);
    CHECK_FALSE(custom.script[2].annotated);
    CHECK(custom.annotations().size() == 2);

    std::istringstream bad("[script]\n10 enter loudly\n");
    CHECK_THROWS_AS(scenario_from_config(parse_config(bad), 0), Error);
    std::istringstream late("[scenario]\nduration = 100\n[script]\n500 enter\n");
    CHECK_THROWS_AS(scenario_from_config(parse_config(late), 0), Error);
}

TEST_CASE("chunked dataset build equals the one-shot build") {
    auto sc = small_generated(6, 1.0);
    DatasetBuild build;
    build.chunk_cells = 5000;
    build.reingest = false;
    const auto chunked = simulate_dataset(sc, 3, build);
    const auto run = simulate_scenario(sc, 3);
    const auto direct = build_labeled_windows(run.observed, run.annotations, build.window);
    CHECK(chunked.features == direct.features);
    CHECK(chunked.labels == direct.labels);
    CHECK(chunked.size() == 24);
    CHECK(chunked.provenance.config_digest == direct.provenance.config_digest);

    build.reingest = true;
    build.chunk_cells = 86400;
    const auto reingested = simulate_dataset(sc, 3, build);
    CHECK(reingested.features == direct.features);
}
