#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "airshadow/core.hpp"
#include "airshadow/features.hpp"
#include "airshadow/matrix.hpp"
#include "airshadow/series.hpp"

namespace airshadow {

enum class SampleFormat { Csv, Ndjson };

/// "csv" / "ndjson" (also inferred from a file extension). Throws
/// Error(UnsupportedFormat).
SampleFormat parse_sample_format(std::string_view name);
SampleFormat format_for_path(const std::string& path);

struct RecordIssue {
    std::size_t line = 0;
    std::string reason;
};

struct SampleLog {
    std::vector<PollutantSample> samples;
    std::vector<RecordIssue> issues; // skipped records, non-strict mode only
};

/// One sample per record; unknown columns/keys are ignored. Records that fail
/// to parse or validate are reported and skipped, or with `strict` abort the
/// parse with Error(MalformedRecord, "<line>").
SampleLog parse_sample_log(std::istream& in, SampleFormat format, bool strict = false);
SampleLog read_sample_file(const std::string& path, bool strict = false);

/// Parses one ndjson record; throws Error(MalformedRecord) when the line is
/// not a JSON object with numeric `ts` and a valid `dev`. Readings are not
/// validated here.
PollutantSample parse_sample_json(std::string_view line);

/// Column/key order: ts,dev,co2,voc,pm25,pm10,t,rh. Absent readings are
/// omitted (ndjson) or left empty (csv).
std::string to_ndjson(const PollutantSample& s);
void write_sample_csv_header(std::ostream& out);
void write_sample_csv(std::ostream& out, const PollutantSample& s);

/// csv with header `ts,label[,annotator]`; output sorted by ts (stable).
/// Throws Error(UnknownLabel, "<line>") or Error(MalformedRecord, "<line>").
std::vector<ActivityAnnotation> parse_annotations(std::istream& in);
void write_annotations(std::ostream& out, std::span<const ActivityAnnotation> annotations);

inline constexpr double kMaxForwardFillSeconds = 5.0;

/// Snaps samples onto t0 + k*step where t0 is the grid-aligned earliest
/// timestamp; ties go to the earlier cell and later input wins per reading.
/// Gaps of at most 5 s are forward-filled, longer ones stay missing.
/// Throws Error(EmptyInput) or Error(UnknownDevice).
AlignedSeries align_series(std::span<const PollutantSample> samples, std::span<const DeviceId> devices,
                           double step = 1.0);

enum class WindowPlacement { Centered, Trailing };

struct WindowConfig {
    FeatureConfig features;
    WindowPlacement placement = WindowPlacement::Centered;
};

struct LabeledWindow {
    double window_start = 0.0;
    double window_len = 0.0;
    ActivityLabel label = ActivityLabel::Enter;
    double annotation_ts = 0.0;
};

struct Provenance {
    std::vector<std::string> sources;
    std::uint64_t seed = 0;
    std::string config_digest;
};

struct SkipCounts {
    std::size_t out_of_bounds = 0;
    std::size_t too_many_missing = 0;
    std::size_t total() const noexcept { return out_of_bounds + too_many_missing; }
};

struct LabeledDataset {
    FeatureSchema schema;
    Matrix features;
    std::vector<ActivityLabel> labels;
    std::vector<LabeledWindow> windows; // empty when loaded from csv
    Provenance provenance;
    SkipCounts skipped;

    std::size_t size() const noexcept { return labels.size(); }
    /// Appends rows of `other`, which must share the schema.
    void append(const LabeledDataset& other);
};

/// Cell index where the window for an annotation at `ts` begins, or
/// std::nullopt if the window falls outside the series.
std::optional<std::size_t> window_start_cell(const AlignedSeries& series, double ts, const WindowConfig& cfg);

/// One row per annotation whose window is inside the series and has tolerable
/// missing data; the rest are counted in `skipped`. Throws
/// Error(ConfigMismatch) when tau is not a multiple of the grid step.
LabeledDataset build_labeled_windows(const AlignedSeries& aligned, std::span<const ActivityAnnotation> annotations,
                                     const WindowConfig& cfg);

/// Header is the schema names plus `label`; reals at full precision.
void write_dataset_csv(std::ostream& out, const LabeledDataset& ds);
LabeledDataset read_dataset_csv(std::istream& in);

} // namespace airshadow
