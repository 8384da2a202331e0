#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airshadow/config.hpp"
#include "airshadow/core.hpp"
#include "airshadow/matrix.hpp"
#include "airshadow/series.hpp"

namespace airshadow {

/// Per-channel window statistics, in schema order.
enum class Stat : std::uint8_t { Min, Max, Avg, Std, RocRaise, RocFall, PeakCount, PeakDuration, LongStay };

inline constexpr std::size_t kStatCount = 9;
std::string_view token(Stat s);

struct Thresholds {
    double safe = 0.0;
    double unsafe = 0.0;
};

struct FeatureConfig {
    double tau = 600.0;      // window length, seconds
    double min_run = 5.0;    // seconds a run must last to count as a peak
    int smooth_width = 1;    // centered moving-average width (odd, 1 = off)
    double missing_tolerance = 0.10;
    std::array<Thresholds, kPollutantCount> thresholds{{
        {800.0, 1200.0}, // co2 ppm
        {220.0, 660.0},  // voc index
        {12.0, 35.0},    // pm2.5 ug/m3
        {54.0, 150.0},   // pm10 ug/m3
        {28.0, 32.0},    // temperature C
        {60.0, 70.0},    // rh %
    }};

    Thresholds& threshold(PollutantKind p) { return thresholds[index_of(p)]; }
    const Thresholds& threshold(PollutantKind p) const { return thresholds[index_of(p)]; }

    /// Throws Error(ConfigMismatch | ThresholdOrder).
    void validate() const;

    /// Reads `[features]` and `[thresholds]` (`co2 = safe, unsafe`).
    static FeatureConfig from_config(const Config& cfg);
    std::string to_config_text() const;
};

struct BasicStats {
    double min, max, avg, std;
};
struct RateOfChange {
    double raise, fall;
};
struct ThresholdStats {
    double peak_count, peak_duration, long_stay;
};

/// Population standard deviation. Throws Error(EmptyWindow).
BasicStats basic_stats(std::span<const double> x);

/// Extremal first difference per second after an optional centered moving
/// average of width w (valid part only, so a window needs w + 1 samples).
/// raise is clamped to >= 0 and fall to <= 0. Throws Error(WindowTooShort).
RateOfChange rate_of_change(std::span<const double> x, int w = 1, double step = 1.0);

/// Throws Error(ThresholdOrder) when safe > unsafe.
ThresholdStats threshold_stats(std::span<const double> x, double safe, double unsafe, double min_run,
                               double step = 1.0);

/// The nine statistics of one fully populated channel, in Stat order.
std::array<double, kStatCount> channel_features(std::span<const double> x, const Thresholds& th,
                                                const FeatureConfig& cfg, double step);

/// Names `<device>.<pollutant>.<fn>`: devices in given order, then
/// pollutant order, then statistic order.
struct FeatureSchema {
    std::vector<DeviceId> devices;
    std::vector<std::string> names;

    std::size_t size() const noexcept { return names.size(); }
    bool operator==(const FeatureSchema&) const = default;
};

FeatureSchema feature_schema(std::span<const DeviceId> devices, const FeatureConfig& cfg);

/// Cells per window; throws Error(ConfigMismatch) unless tau is a whole
/// number of steps.
std::size_t window_cells(double tau, double step);

/// Linear interpolation of interior gaps, nearest value at the edges.
/// Returns false if the channel has no present value at all.
bool fill_gaps(std::span<double> x);

/// Feature vector of the window starting at cell `first` (length tau).
/// Throws Error(TooManyMissing) naming `<device>.<pollutant>`, or
/// Error(ConfigMismatch) if the window runs past the series.
std::vector<double> extract_features(const AlignedSeries& series, std::size_t first, const FeatureConfig& cfg);

enum class WindowStatus : std::uint8_t { Ok, TooManyMissing, OutOfBounds };

struct FeatureBatch {
    Matrix values; // one row per requested window; NaN rows for failures
    std::vector<WindowStatus> status;
};

namespace kernels {

/// Reference implementation: windows one after another.
FeatureBatch extract_batch_serial(const AlignedSeries& series, std::span<const std::size_t> starts,
                                  const FeatureConfig& cfg);

/// Same contract, windows distributed over OpenMP threads. Results are
/// identical to the serial path.
FeatureBatch extract_batch_omp(const AlignedSeries& series, std::span<const std::size_t> starts,
                               const FeatureConfig& cfg);

} // namespace kernels

/// Default batch path (OpenMP when built with it).
FeatureBatch extract_batch(const AlignedSeries& series, std::span<const std::size_t> starts, const FeatureConfig& cfg);

} // namespace airshadow
