#include <omp.h>

#include <random>

#include <benchmark/benchmark.h>

#include "airshadow/features.hpp"
#include "airshadow/models.hpp"

using namespace airshadow;

namespace {

AlignedSeries telemetry(std::size_t devices, std::size_t length) {
    std::vector<DeviceId> ids;
    for (std::size_t d = 0; d < devices; ++d) ids.emplace_back("dev" + std::to_string(d));
    AlignedSeries s(ids, 1.7e9, 1.0, length);
    Rng rng(1);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double base[] = {900.0, 300.0, 20.0, 60.0, 27.0, 58.0};
    const double scale[] = {15.0, 8.0, 1.5, 3.0, 0.05, 0.3};
    for (std::size_t d = 0; d < devices; ++d)
        for (auto p : kAllPollutants) {
            const auto i = index_of(p);
            double v = base[i];
            for (auto& x : s.channel(d, p)) {
                v = std::max(0.0, v + scale[i] * n01(rng));
                x = v;
            }
        }
    return s;
}

struct Windows {
    AlignedSeries series = telemetry(4, 86400);
    std::vector<std::size_t> starts;
    FeatureConfig cfg;

    Windows() {
        for (std::size_t s = 0; s + 600 <= series.length(); s += 120) starts.push_back(s);
    }
};

const Windows& windows() {
    static const Windows w;
    return w;
}

void BM_extract_serial(benchmark::State& state) {
    const auto& w = windows();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::extract_batch_serial(w.series, w.starts, w.cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.starts.size()));
}

void BM_extract_omp(benchmark::State& state) {
    const auto& w = windows();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::extract_batch_omp(w.series, w.starts, w.cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.starts.size()));
}

struct Table {
    Matrix x{0, 216};
    std::vector<int> y;

    Table() {
        Rng rng(2);
        std::normal_distribution<double> n01(0.0, 1.0);
        std::vector<double> row(x.cols);
        for (int i = 0; i < 700; ++i) {
            const int c = i % 8;
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = (j % 8 == static_cast<std::size_t>(c) ? 2.0 : 0.0) + n01(rng);
            x.append_row(row);
            y.push_back(c);
        }
    }
};

const Table& table() {
    static const Table t;
    return t;
}

void BM_forest_fit(benchmark::State& state) {
    const auto& t = table();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    ModelSpec spec;
    spec.family = ModelFamily::RandomForest;
    spec.n_estimators = 50;
    spec.max_depth = 10;
    for (auto _ : state) benchmark::DoNotOptimize(train(spec, t.x, t.y));
}

void BM_forest_predict(benchmark::State& state) {
    const auto& t = table();
    ModelSpec spec;
    spec.family = ModelFamily::RandomForest;
    const auto model = train(spec, t.x, t.y);
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(model.predict_scores_batch(t.x));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.x.rows));
}

void thread_counts(benchmark::internal::Benchmark* b) {
    const int max = omp_get_num_procs();
    for (int n = 1; n < max; n *= 2) b->Arg(n);
    b->Arg(max);
}

} // namespace

BENCHMARK(BM_extract_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extract_omp)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest_fit)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest_predict)->Apply(thread_counts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
