#include <cmath>
#include <sstream>

#include "doctest.h"

#include "airshadow/features.hpp"
#include "oracles.hpp"

using namespace airshadow;

namespace {

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    std::size_t bad = 0;
    for (std::size_t i = 0; i < a.size(); ++i) bad += std::abs(a[i] - b[i]) > tol * std::max(1.0, std::abs(b[i]));
    CHECK(bad == 0);
}

} // namespace

TEST_CASE("basic_stats hand example") {
    const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
    const auto b = basic_stats(x);
    CHECK(b.min == 2.0);
    CHECK(b.max == 9.0);
    CHECK(b.avg == 5.0);
    CHECK(b.std == 2.0);
    CHECK_THROWS_AS(basic_stats(std::span<const double>{}), Error);
}

TEST_CASE("basic_stats of a constant window") {
    const std::vector<double> x(100, 0.1);
    const auto b = basic_stats(x);
    CHECK(b.avg == 0.1);
    CHECK(b.std == 0.0);
}

TEST_CASE("rate_of_change sign conventions") {
    const std::vector<double> up{1, 2, 4, 7};
    auto r = rate_of_change(up);
    CHECK(r.raise == 3.0);
    CHECK(r.fall == 0.0);
    const std::vector<double> down{7, 4, 2, 1};
    r = rate_of_change(down, 1, 2.0);
    CHECK(r.raise == 0.0);
    CHECK(r.fall == -1.5);
    const std::vector<double> zig{0, 3, 0, 3, 0};
    r = rate_of_change(zig, 3);
    CHECK(r.raise == doctest::Approx(1.0));
    CHECK(r.fall == doctest::Approx(-1.0));
    CHECK_THROWS_AS(rate_of_change(zig, 5), Error);
}

TEST_CASE("threshold_stats counts runs that last long enough") {
    // above unsafe (10): cells 2-4 (3 s), 7 (1 s), 9-10 (2 s)
    const std::vector<double> x{0, 6, 11, 12, 11, 6, 0, 15, 6, 20, 20};
    auto t = threshold_stats(x, 5.0, 10.0, 2.0);
    CHECK(t.peak_count == 2.0);
    CHECK(t.peak_duration == 5.0);
    CHECK(t.long_stay == 9.0);
    t = threshold_stats(x, 5.0, 10.0, 1.0);
    CHECK(t.peak_count == 3.0);
    CHECK(t.peak_duration == 6.0);
    CHECK_THROWS_AS(threshold_stats(x, 11.0, 10.0, 1.0), Error);
}

TEST_CASE("feature schema order") {
    const std::vector<DeviceId> devs{DeviceId("door"), DeviceId("fan")};
    const auto s = feature_schema(devs, FeatureConfig{});
    REQUIRE(s.size() == 2 * kPollutantCount * kStatCount);
    CHECK(s.names.front() == "door.co2.min");
    CHECK(s.names[8] == "door.co2.long_stay");
    CHECK(s.names[9] == "door.voc.min");
    CHECK(s.names.back() == "fan.rh.long_stay");
    CHECK_THROWS_AS(feature_schema(std::span<const DeviceId>{}, FeatureConfig{}), Error);
}

TEST_CASE("feature config validation and text round-trip") {
    FeatureConfig cfg;
    cfg.tau = 300;
    cfg.smooth_width = 5;
    cfg.threshold(PollutantKind::VOC) = {100, 400};
    std::istringstream in(cfg.to_config_text());
    const auto back = FeatureConfig::from_config(parse_config(in));
    CHECK(back.to_config_text() == cfg.to_config_text());

    FeatureConfig bad;
    bad.smooth_width = 4;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.threshold(PollutantKind::CO2) = {2000, 1000};
    try {
        bad.validate();
        FAIL("expected ThresholdOrder");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ThresholdOrder);
        CHECK(e.subject() == "co2");
    }
}

TEST_CASE("window_cells requires whole steps") {
    CHECK(window_cells(600, 1) == 600);
    CHECK(window_cells(600, 2) == 300);
    CHECK_THROWS_AS(window_cells(600, 7), Error);
}

TEST_CASE("fill_gaps interpolates and extends") {
    std::vector<double> x{kMissing, 2, kMissing, kMissing, 8, kMissing};
    REQUIRE(fill_gaps(x));
    CHECK(x == std::vector<double>{2, 2, 4, 6, 8, 8});
    std::vector<double> none(4, kMissing);
    CHECK_FALSE(fill_gaps(none));
}

TEST_CASE("extract_features matches the brute-force oracle") {
    const auto series = oracle::random_series(2, 3000, 11);
    for (int w : {1, 3, 7}) {
        FeatureConfig cfg;
        cfg.tau = 600;
        cfg.smooth_width = w;
        cfg.min_run = 4;
        for (std::size_t first : {0u, 17u, 1200u, 2400u})
            check_close(extract_features(series, first, cfg), oracle::window_features(series, first, cfg), 1e-9);
    }
}

TEST_CASE("gaps within tolerance are interpolated, beyond it rejected") {
    auto series = oracle::random_series(1, 700, 3);
    FeatureConfig cfg;
    auto co2 = series.channel(0, PollutantKind::CO2);
    for (std::size_t k = 100; k < 150; ++k) co2[k] = kMissing;
    check_close(extract_features(series, 0, cfg), oracle::window_features(series, 0, cfg), 1e-9);

    for (std::size_t k = 150; k < 161; ++k) co2[k] = kMissing; // 61 of 600
    try {
        extract_features(series, 0, cfg);
        FAIL("expected TooManyMissing");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooManyMissing);
        CHECK(e.subject() == "dev0.co2");
    }
    CHECK_THROWS_AS(extract_features(series, 200, cfg), Error);
}

TEST_CASE("feature invariants") {
    const auto series = oracle::random_series(3, 2000, 21);
    FeatureConfig cfg;
    cfg.tau = 300;
    for (std::size_t first = 0; first + 300 <= 2000; first += 97) {
        const auto f = extract_features(series, first, cfg);
        for (std::size_t c = 0; c < f.size(); c += kStatCount) {
            CHECK(f[c] <= f[c + 2]);
            CHECK(f[c + 2] <= f[c + 1]);
            CHECK(f[c + 3] >= 0.0);
            CHECK(f[c + 4] >= 0.0);
            CHECK(f[c + 5] <= 0.0);
            CHECK(f[c + 7] <= f[c + 8] + 1e-12);
            CHECK(f[c + 8] <= cfg.tau);
        }
    }
}

TEST_CASE("shifting a window by a constant offset") {
    auto series = oracle::random_series(1, 600, 8);
    FeatureConfig cfg;
    for (auto& th : cfg.thresholds) th = {1e9, 1e9};
    const auto before = extract_features(series, 0, cfg);
    for (auto p : kAllPollutants)
        for (auto& v : series.channel(0, p)) v += 1000.0;
    const auto after = extract_features(series, 0, cfg);
    for (std::size_t c = 0; c < before.size(); c += kStatCount) {
        CHECK(after[c + 2] == doctest::Approx(before[c + 2] + 1000.0));
        CHECK(after[c + 3] == doctest::Approx(before[c + 3]).epsilon(1e-6));
        CHECK(after[c + 4] == doctest::Approx(before[c + 4]).epsilon(1e-6));
    }
}

TEST_CASE("serial and OpenMP batches are identical") {
    const auto series = oracle::random_series(4, 5000, 99);
    FeatureConfig cfg;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < 4600; s += 37) starts.push_back(s);
    starts.push_back(4800); // out of bounds
    const auto a = kernels::extract_batch_serial(series, starts, cfg);
    const auto b = kernels::extract_batch_omp(series, starts, cfg);
    CHECK(a.status == b.status);
    CHECK(a.status.back() == WindowStatus::OutOfBounds);
    REQUIRE(a.values.data.size() == b.values.data.size());
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.values.data.size(); ++i) {
        const double x = a.values.data[i];
        const double y = b.values.data[i];
        same += (std::isnan(x) && std::isnan(y)) || x == y;
    }
    CHECK(same == a.values.data.size());
    const auto row = extract_features(series, starts[3], cfg);
    CHECK(std::vector<double>(a.values.row(3).begin(), a.values.row(3).end()) == row);
}
