#include "airshadow/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <memory>

namespace airshadow {

LabeledDataset simulate_dataset(const Scenario& sc, std::uint64_t seed, const DatasetBuild& build) {
    if (build.chunk_cells == 0) throw Error(ErrorKind::ConfigMismatch, "chunk_cells", "must be positive");
    build.window.features.validate();
    const double tau = build.window.features.tau;
    const std::size_t tail = window_cells(tau, 1.0) + 2;

    ScenarioRunner runner(sc, seed);
    auto annotations = sc.annotations();
    std::stable_sort(annotations.begin(), annotations.end(),
                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
    const auto devices = sc.device_ids();

    LabeledDataset out;
    out.schema = feature_schema(devices, build.window.features);
    out.features = Matrix(0, out.schema.size());
    out.provenance.seed = seed;
    out.provenance.sources = {"simulated"};

    AlignedSeries buffer;
    bool have = false;
    std::size_t next = 0;
    while (!runner.done()) {
        auto chunk = runner.advance(build.chunk_cells);
        AlignedSeries obs = std::move(chunk.observed);
        if (build.reingest) {
            const auto samples = to_samples(obs);
            obs = align_series(samples, devices, 1.0);
        }
        if (!have) {
            buffer = std::move(obs);
            have = true;
        } else {
            const std::size_t keep = std::min(buffer.length(), tail);
            buffer = buffer.slice(buffer.length() - keep, keep);
            buffer.append(obs);
        }
        const double end = buffer.time_at(buffer.length());
        std::vector<ActivityAnnotation> ready;
        while (next < annotations.size()) {
            const auto& a = annotations[next];
            const double start = build.window.placement == WindowPlacement::Centered ? a.ts - tau / 2.0 : a.ts - tau;
            if (!runner.done() && start + tau + 1.0 > end) break;
            ready.push_back(a);
            ++next;
        }
        if (ready.empty()) continue;
        auto part = build_labeled_windows(buffer, ready, build.window);
        const auto digest = part.provenance.config_digest;
        out.append(part);
        out.provenance.config_digest = digest;
    }
    if (next < annotations.size()) out.skipped.out_of_bounds += annotations.size() - next;
    if (out.provenance.config_digest.empty())
        out.provenance.config_digest = digest_hex(build.window.features.to_config_text());
    return out;
}

TelemetryFiles write_telemetry(const Scenario& sc, std::uint64_t seed, const std::filesystem::path& out,
                               std::size_t chunk_cells) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw Error(ErrorKind::Io, out.string(), ec.message());
    TelemetryFiles files;
    const auto devices = sc.device_ids();
    std::vector<std::unique_ptr<std::ofstream>> logs;
    for (const auto& d : devices) {
        files.logs.push_back(out / (d.str() + ".ndjson"));
        logs.push_back(std::make_unique<std::ofstream>(files.logs.back(), std::ios::binary | std::ios::trunc));
        if (!*logs.back()) throw Error(ErrorKind::Io, files.logs.back().string(), "cannot open for writing");
    }
    files.truth = out / "truth.csv";
    std::ofstream truth(files.truth, std::ios::binary | std::ios::trunc);
    if (!truth) throw Error(ErrorKind::Io, files.truth.string(), "cannot open for writing");
    truth << "ts";
    for (auto p : kAllPollutants) truth << ',' << token(p);
    truth << '\n';

    ScenarioRunner runner(sc, seed);
    while (!runner.done()) {
        const auto chunk = runner.advance(std::max<std::size_t>(chunk_cells, 1));
        for (std::size_t k = 0; k < chunk.observed.length(); ++k) {
            for (std::size_t d = 0; d < devices.size(); ++d) {
                PollutantSample s{chunk.observed.time_at(k), devices[d], {}};
                for (auto p : kAllPollutants) s.readings[p] = chunk.observed.channel(d, p)[k];
                *logs[d] << to_ndjson(s) << '\n';
                ++files.samples;
            }
            truth << format_real(chunk.truth.time_at(k));
            for (auto p : kAllPollutants) truth << ',' << format_real(chunk.truth.channel(0, p)[k]);
            truth << '\n';
        }
    }
    for (std::size_t d = 0; d < logs.size(); ++d) {
        logs[d]->flush();
        if (!*logs[d]) throw Error(ErrorKind::Io, files.logs[d].string(), "write failed");
    }
    files.annotations = out / "annotations.csv";
    std::ofstream ann(files.annotations, std::ios::binary | std::ios::trunc);
    const auto annotations = sc.annotations();
    write_annotations(ann, annotations);
    if (!ann || !truth) throw Error(ErrorKind::Io, out.string(), "write failed");
    return files;
}

} // namespace airshadow
