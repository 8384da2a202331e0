#include "airshadow/series.hpp"

#include <algorithm>

namespace airshadow {

AlignedSeries::AlignedSeries(std::vector<DeviceId> devices, double t0, double step, std::size_t length)
    : devices_(std::move(devices)), t0_(t0), step_(step), length_(length),
      channels_(devices_.size() * kPollutantCount, std::vector<double>(length, kMissing)) {
    if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorKind::ConfigMismatch, "step", "step must be > 0");
}

std::size_t AlignedSeries::device_index(const DeviceId& id) const {
    auto it = std::find(devices_.begin(), devices_.end(), id);
    if (it == devices_.end()) throw Error(ErrorKind::UnknownDevice, id.str());
    return static_cast<std::size_t>(it - devices_.begin());
}

AlignedSeries AlignedSeries::slice(std::size_t first, std::size_t count) const {
    first = std::min(first, length_);
    count = std::min(count, length_ - first);
    AlignedSeries out(devices_, time_at(first), step_, count);
    for (std::size_t c = 0; c < channels_.size(); ++c)
        std::copy_n(channels_[c].begin() + static_cast<std::ptrdiff_t>(first), count, out.channels_[c].begin());
    return out;
}

void AlignedSeries::append(const AlignedSeries& next) {
    if (length_ == 0 && devices_.empty()) {
        *this = next;
        return;
    }
    if (next.devices_ != devices_ || next.step_ != step_)
        throw Error(ErrorKind::ConfigMismatch, "append", "device list or step differs");
    if (std::abs(next.t0_ - time_at(length_)) > 1e-6 * step_)
        throw Error(ErrorKind::ConfigMismatch, "append", "series are not contiguous");
    for (std::size_t c = 0; c < channels_.size(); ++c)
        channels_[c].insert(channels_[c].end(), next.channels_[c].begin(), next.channels_[c].end());
    length_ += next.length_;
}

bool AlignedSeries::operator==(const AlignedSeries& other) const {
    if (devices_ != other.devices_ || t0_ != other.t0_ || step_ != other.step_ || length_ != other.length_)
        return false;
    for (std::size_t c = 0; c < channels_.size(); ++c)
        for (std::size_t k = 0; k < length_; ++k) {
            double a = channels_[c][k];
            double b = other.channels_[c][k];
            if (is_missing(a) != is_missing(b) || (!is_missing(a) && a != b)) return false;
        }
    return true;
}

std::vector<PollutantSample> to_samples(const AlignedSeries& series) {
    std::vector<PollutantSample> out;
    for (std::size_t k = 0; k < series.length(); ++k) {
        for (std::size_t d = 0; d < series.devices().size(); ++d) {
            PollutantSample s{series.time_at(k), series.devices()[d], {}};
            for (auto p : kAllPollutants) {
                double v = series.channel(d, p)[k];
                if (!is_missing(v)) s.readings[p] = v;
            }
            if (s.readings.count() > 0) out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace airshadow
