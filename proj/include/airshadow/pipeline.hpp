#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "airshadow/ingest.hpp"
#include "airshadow/simulator.hpp"

namespace airshadow {

struct DatasetBuild {
    WindowConfig window;
    std::size_t chunk_cells = 86400;
    /// Route each chunk through to_samples + align_series, as a logged
    /// deployment would, instead of using the simulated grid directly.
    bool reingest = true;
};

/// Simulates `sc` chunk by chunk and featurizes every annotation without
/// holding the whole series in memory. Equivalent to simulate_scenario
/// followed by build_labeled_windows on the full observed series.
LabeledDataset simulate_dataset(const Scenario& sc, std::uint64_t seed, const DatasetBuild& build);

struct TelemetryFiles {
    std::vector<std::filesystem::path> logs; // one ndjson per device
    std::filesystem::path annotations;
    std::filesystem::path truth; // csv of the zone state
    std::size_t samples = 0;
};

/// `<out>/<device>.ndjson`, `<out>/annotations.csv`, `<out>/truth.csv`.
TelemetryFiles write_telemetry(const Scenario& sc, std::uint64_t seed, const std::filesystem::path& out,
                               std::size_t chunk_cells = 86400);

} // namespace airshadow
