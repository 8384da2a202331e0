#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "airshadow/core.hpp"

namespace airshadow {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Multi-device readings on a uniform time grid t0 + k*step. Missing cells
/// hold NaN. Channel storage is device-major, then PollutantKind order.
class AlignedSeries {
public:
    AlignedSeries() = default;
    AlignedSeries(std::vector<DeviceId> devices, double t0, double step, std::size_t length);

    const std::vector<DeviceId>& devices() const noexcept { return devices_; }
    double t0() const noexcept { return t0_; }
    double step() const noexcept { return step_; }
    std::size_t length() const noexcept { return length_; }
    double time_at(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * step_; }
    std::size_t channel_count() const noexcept { return channels_.size(); }

    std::span<double> channel(std::size_t device, PollutantKind p) {
        return channels_[device * kPollutantCount + index_of(p)];
    }
    std::span<const double> channel(std::size_t device, PollutantKind p) const {
        return channels_[device * kPollutantCount + index_of(p)];
    }

    /// Index of `id` in devices(); throws Error(UnknownDevice).
    std::size_t device_index(const DeviceId& id) const;

    AlignedSeries slice(std::size_t first, std::size_t count) const;

    /// Appends `next`, which must share devices and step and start at end().
    void append(const AlignedSeries& next);

    bool operator==(const AlignedSeries& other) const; // NaN == NaN here

private:
    std::vector<DeviceId> devices_;
    double t0_ = 0.0;
    double step_ = 1.0;
    std::size_t length_ = 0;
    std::vector<std::vector<double>> channels_;
};

/// One sample per (device, cell) holding that cell's present readings.
std::vector<PollutantSample> to_samples(const AlignedSeries& series);

} // namespace airshadow
