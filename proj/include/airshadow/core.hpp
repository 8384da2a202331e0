#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace airshadow {

enum class ErrorKind {
    UnknownLabel,
    NonFiniteReading,
    NegativeConcentration,
    HumidityOutOfRange,
    EmptyReadings,
    InvalidDevice,
    MalformedRecord,
    UnsupportedFormat,
    EmptyInput,
    UnknownDevice,
    ConfigMismatch,
    TooManyMissing,
    EmptyWindow,
    WindowTooShort,
    ThresholdOrder,
    EmptyDevices,
    NonPositiveDt,
    InvalidScenario,
    Infeasible,
    EmptyDataset,
    NonFiniteFeature,
    SchemaMismatch,
    VersionMismatch,
    CorruptModel,
    ClassTooSmall,
    KTooLarge,
    LengthMismatch,
    UnknownClass,
    EmptyMatrix,
    BindFailure,
    StorageFailure,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type.
/// `subject()` names the offending field, label, device or line when known.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string subject, const std::string& detail = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    ErrorKind kind_;
    std::string subject_;
};

// Iteration order is part of the feature schema; do not reorder.
enum class PollutantKind : std::uint8_t { CO2, VOC, PM2_5, PM10, Temperature, Humidity };

inline constexpr std::size_t kPollutantCount = 6;
inline constexpr std::array<PollutantKind, kPollutantCount> kAllPollutants{
    PollutantKind::CO2,  PollutantKind::VOC,         PollutantKind::PM2_5,
    PollutantKind::PM10, PollutantKind::Temperature, PollutantKind::Humidity};

constexpr std::size_t index_of(PollutantKind p) noexcept { return static_cast<std::size_t>(p); }

/// Wire/column token: co2, voc, pm25, pm10, t, rh.
std::string_view token(PollutantKind p);
std::optional<PollutantKind> pollutant_from_token(std::string_view tok);

enum class ActivityLabel : std::uint8_t { Enter, Exit, FanOn, FanOff, AcOn, AcOff, Gathering, Eating };

inline constexpr std::size_t kLabelCount = 8;
inline constexpr std::array<ActivityLabel, kLabelCount> kAllLabels{
    ActivityLabel::Enter, ActivityLabel::Exit,  ActivityLabel::FanOn,     ActivityLabel::FanOff,
    ActivityLabel::AcOn,  ActivityLabel::AcOff, ActivityLabel::Gathering, ActivityLabel::Eating};

std::string_view to_text(ActivityLabel label);

/// Case-insensitive; spaces, hyphens and underscores are interchangeable.
/// Throws Error(UnknownLabel).
ActivityLabel parse_activity_label(std::string_view text);

/// 1-32 visible ASCII characters. Path separators, commas, quotes and the
/// dot-only names are rejected since ids become file and column names.
class DeviceId {
public:
    explicit DeviceId(std::string id);

    const std::string& str() const noexcept { return id_; }
    auto operator<=>(const DeviceId&) const = default;

private:
    std::string id_;
};

/// Readings per pollutant; an absent reading is std::nullopt.
struct Readings {
    std::array<std::optional<double>, kPollutantCount> values{};

    std::optional<double>& operator[](PollutantKind p) { return values[index_of(p)]; }
    const std::optional<double>& operator[](PollutantKind p) const { return values[index_of(p)]; }
    std::size_t count() const noexcept;
    bool operator==(const Readings&) const = default;
};

struct PollutantSample {
    double ts = 0.0; // unix seconds
    DeviceId device{"unset"};
    Readings readings;

    bool operator==(const PollutantSample&) const = default;
};

/// Throws Error(NonFiniteReading | NegativeConcentration | HumidityOutOfRange
/// | EmptyReadings) with the offending token as subject.
const PollutantSample& validate_sample(const PollutantSample& s);

/// Non-throwing variant: the first violation, if any.
std::optional<Error> check_sample(const PollutantSample& s);

struct ActivityAnnotation {
    double ts = 0.0;
    ActivityLabel label = ActivityLabel::Enter;
    std::optional<std::string> annotator;

    bool operator==(const ActivityAnnotation&) const = default;
};

/// Shortest decimal text that parses back to the identical double.
std::string format_real(double v);

/// Strict full-string parse; nullopt on garbage or trailing characters.
std::optional<double> parse_real(std::string_view text);

/// FNV-1a 64, used for config digests in provenance records.
std::uint64_t fnv1a64(std::string_view data);

/// fnv1a64 as 16 lowercase hex digits.
std::string digest_hex(std::string_view data);

} // namespace airshadow
