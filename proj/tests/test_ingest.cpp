#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "airshadow/ingest.hpp"
#include "oracles.hpp"

using namespace airshadow;

namespace {

std::vector<PollutantSample> random_samples(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PollutantSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        PollutantSample s{1.7e9 + u(rng) * 1e5, DeviceId(i % 2 ? "door" : "desk"), {}};
        for (auto p : kAllPollutants)
            if (u(rng) < 0.8) s.readings[p] = p == PollutantKind::Humidity ? 100.0 * u(rng) : 3000.0 * u(rng);
        if (s.readings.count() == 0) s.readings[PollutantKind::CO2] = 400.0;
        out.push_back(s);
    }
    return out;
}

AlignedSeries flat_series(std::size_t length, double t0 = 0.0) {
    AlignedSeries s({DeviceId("a")}, t0, 1.0, length);
    for (auto p : kAllPollutants) {
        auto ch = s.channel(0, p);
        for (std::size_t k = 0; k < length; ++k) ch[k] = static_cast<double>(k);
    }
    return s;
}

} // namespace

TEST_CASE("ndjson and csv round-trip random samples") {
    const auto samples = random_samples(300, 4);
    std::stringstream nd;
    std::stringstream csv;
    write_sample_csv_header(csv);
    for (const auto& s : samples) {
        nd << to_ndjson(s) << '\n';
        write_sample_csv(csv, s);
    }
    const auto a = parse_sample_log(nd, SampleFormat::Ndjson, true);
    const auto b = parse_sample_log(csv, SampleFormat::Csv, true);
    CHECK(a.samples == samples);
    CHECK(b.samples == samples);
    CHECK(a.issues.empty());
}

TEST_CASE("csv columns may come in any order and unknown ones are ignored") {
    std::istringstream in("dev,extra,rh,ts,co2\nd1,x,50,10,420\nd2,y,,11,\n");
    const auto log = parse_sample_log(in, SampleFormat::Csv);
    REQUIRE(log.samples.size() == 1);
    CHECK(log.samples[0].ts == 10.0);
    CHECK(log.samples[0].readings[PollutantKind::Humidity] == 50.0);
    REQUIRE(log.issues.size() == 1);
    CHECK(log.issues[0].line == 3);
}

TEST_CASE("malformed records are skipped or abort in strict mode") {
    const std::string text = "{\"ts\":1,\"dev\":\"a\",\"co2\":400}\n"
                             "not json\n"
                             "{\"ts\":2,\"dev\":\"a\",\"co2\":-3}\n"
                             "{\"ts\":\"x\",\"dev\":\"a\",\"co2\":3}\n"
                             "{\"ts\":3,\"dev\":\"a/b\",\"co2\":3}\n"
                             "\n"
                             "{\"ts\":4,\"dev\":\"a\",\"rh\":40,\"note\":\"ok\"}\n";
    std::istringstream lax(text);
    const auto log = parse_sample_log(lax, SampleFormat::Ndjson);
    CHECK(log.samples.size() == 2);
    REQUIRE(log.issues.size() == 4);
    CHECK(log.issues[0].line == 2);
    CHECK(log.issues[1].line == 3);
    CHECK(log.issues[1].reason.find("NegativeConcentration") != std::string::npos);

    std::istringstream strict(text);
    try {
        parse_sample_log(strict, SampleFormat::Ndjson, true);
        FAIL("expected MalformedRecord");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedRecord);
        CHECK(e.subject() == "2");
    }
}

TEST_CASE("sample formats") {
    CHECK(format_for_path("x/y.csv") == SampleFormat::Csv);
    CHECK(format_for_path("log.ndjson") == SampleFormat::Ndjson);
    CHECK(format_for_path("log.jsonl") == SampleFormat::Ndjson);
    CHECK_THROWS_AS(format_for_path("log.parquet"), Error);
    CHECK_THROWS_AS(format_for_path("noext"), Error);
}

TEST_CASE("annotations parse, sort stably and round-trip") {
    std::istringstream in("ts,label,annotator\n30,Fan On,ann\n10,enter,\n30,exit,bob\n");
    const auto a = parse_annotations(in);
    REQUIRE(a.size() == 3);
    CHECK(a[0].label == ActivityLabel::Enter);
    CHECK_FALSE(a[0].annotator.has_value());
    CHECK(a[1].label == ActivityLabel::FanOn);
    CHECK(a[2].annotator == "bob");
    std::stringstream out;
    write_annotations(out, a);
    CHECK(parse_annotations(out) == a);

    std::istringstream bad("ts,label\n1,enter\n2,juggling\n");
    try {
        parse_annotations(bad);
        FAIL("expected UnknownLabel");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownLabel);
        CHECK(e.subject() == "3");
    }
    std::istringstream headless("1,enter\n");
    CHECK_THROWS_AS(parse_annotations(headless), Error);
}

TEST_CASE("align_series snaps, resolves collisions and bridges short gaps") {
    const DeviceId a("a");
    const DeviceId b("b");
    std::vector<PollutantSample> s;
    auto add = [&](double ts, const DeviceId& d, double co2) {
        PollutantSample x{ts, d, {}};
        x.readings[PollutantKind::CO2] = co2;
        s.push_back(x);
    };
    add(100.5, a, 1.0);  // tie: goes to cell 100
    add(100.2, a, 2.0);  // same cell, later input wins
    add(106.0, a, 3.0);  // gap of 5 cells: filled
    add(113.0, a, 4.0);  // gap of 6 cells: left missing
    add(101.0, b, 9.0);
    const std::vector<DeviceId> devs{a, b};
    const auto out = align_series(s, devs);
    CHECK(out.t0() == 100.0);
    CHECK(out.length() == 14);
    const auto co2 = out.channel(0, PollutantKind::CO2);
    CHECK(co2[0] == 2.0);
    for (std::size_t k = 1; k <= 5; ++k) CHECK(co2[k] == 2.0);
    CHECK(co2[6] == 3.0);
    for (std::size_t k = 7; k <= 12; ++k) CHECK(is_missing(co2[k]));
    CHECK(co2[13] == 4.0);
    CHECK(is_missing(out.channel(1, PollutantKind::CO2)[0]));
    CHECK(out.channel(1, PollutantKind::CO2)[1] == 9.0);
    CHECK(is_missing(out.channel(0, PollutantKind::VOC)[3]));

    const std::vector<DeviceId> only_a{a};
    CHECK_THROWS_AS(align_series(s, only_a), Error);
    CHECK_THROWS_AS(align_series(std::span<const PollutantSample>{}, devs), Error);
}

TEST_CASE("align_series inverts to_samples on a full grid") {
    const auto series = oracle::random_series(3, 200, 5);
    const auto samples = to_samples(series);
    CHECK(align_series(samples, series.devices(), 1.0) == series);
}

TEST_CASE("window placement") {
    const auto s = flat_series(2000, 1000.0);
    WindowConfig cfg;
    cfg.features.tau = 600;
    CHECK(window_start_cell(s, 1300.0, cfg) == 0u);
    CHECK(window_start_cell(s, 1299.0, cfg) == std::nullopt);
    CHECK(window_start_cell(s, 1500.4, cfg) == 201u);
    CHECK(window_start_cell(s, 2700.0, cfg) == 1400u);
    CHECK(window_start_cell(s, 2701.0, cfg) == std::nullopt);
    cfg.placement = WindowPlacement::Trailing;
    CHECK(window_start_cell(s, 1600.0, cfg) == 0u);
    CHECK(window_start_cell(s, 3000.0, cfg) == 1400u);
}

TEST_CASE("labeled windows count skips and keep annotation order") {
    auto s = flat_series(3000);
    for (std::size_t k = 2000; k < 2200; ++k) s.channel(0, PollutantKind::VOC)[k] = kMissing;
    const std::vector<ActivityAnnotation> ann{{400, ActivityLabel::Enter, {}},
                                              {100, ActivityLabel::Exit, {}},
                                              {2100, ActivityLabel::Eating, {}},
                                              {1500, ActivityLabel::FanOn, {}},
                                              {2900, ActivityLabel::AcOn, {}}};
    WindowConfig cfg;
    const auto ds = build_labeled_windows(s, ann, cfg);
    CHECK(ds.size() == 2);
    CHECK(ds.labels == std::vector<ActivityLabel>{ActivityLabel::Enter, ActivityLabel::FanOn});
    CHECK(ds.skipped.out_of_bounds == 2);
    CHECK(ds.skipped.too_many_missing == 1);
    CHECK(ds.windows[1].window_start == 1200.0);
    CHECK(ds.features(0, 0) == 100.0); // a.co2.min over cells 100..699
    CHECK(ds.provenance.config_digest.size() == 16);
    CHECK(ds.schema.size() == kPollutantCount * kStatCount);
}

TEST_CASE("dataset csv round-trips bit-exactly") {
    const auto series = oracle::random_series(2, 4000, 77);
    std::vector<ActivityAnnotation> ann;
    for (int i = 0; i < 8; ++i) ann.push_back({1.7e9 + 400.0 + 400.0 * i, kAllLabels[static_cast<std::size_t>(i)], {}});
    const auto ds = build_labeled_windows(series, ann, WindowConfig{});
    REQUIRE(ds.size() == 8);
    std::stringstream io;
    write_dataset_csv(io, ds);
    const auto back = read_dataset_csv(io);
    CHECK(back.schema == ds.schema);
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);

    std::istringstream bad_value("x.co2.min,label\nnan,enter\n");
    CHECK_THROWS_AS(read_dataset_csv(bad_value), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty), Error);
}

TEST_CASE("appending datasets requires a shared schema") {
    const auto s1 = flat_series(1000);
    const std::vector<ActivityAnnotation> ann{{500, ActivityLabel::Enter, {}}};
    auto ds = build_labeled_windows(s1, ann, WindowConfig{});
    const auto copy = ds;
    ds.append(copy);
    CHECK(ds.size() == 2);
    AlignedSeries s2({DeviceId("zzz")}, 0.0, 1.0, 1000);
    for (auto p : kAllPollutants)
        for (auto& v : s2.channel(0, p)) v = 1.0;
    const auto other = build_labeled_windows(s2, ann, WindowConfig{});
    CHECK_THROWS_AS(ds.append(other), Error);
}
