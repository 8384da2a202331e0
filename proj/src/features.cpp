#include "airshadow/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace airshadow {

namespace {

constexpr std::array<std::string_view, kStatCount> kStatTokens{
    "min", "max", "avg", "std", "roc_raise", "roc_fall", "peak_c", "peak_dur", "long_stay"};

} // namespace

std::string_view token(Stat s) { return kStatTokens[static_cast<std::size_t>(s)]; }

void FeatureConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorKind::ConfigMismatch, "tau", "must be > 0");
    if (!(min_run > 0.0)) throw Error(ErrorKind::ConfigMismatch, "min_run", "must be > 0");
    if (smooth_width < 1 || smooth_width % 2 == 0)
        throw Error(ErrorKind::ConfigMismatch, "smooth_width", "must be an odd integer >= 1");
    if (!(missing_tolerance >= 0.0 && missing_tolerance < 1.0))
        throw Error(ErrorKind::ConfigMismatch, "missing_tolerance", "must lie in [0, 1)");
    for (auto p : kAllPollutants)
        if (threshold(p).safe > threshold(p).unsafe) throw Error(ErrorKind::ThresholdOrder, std::string(token(p)));
}

FeatureConfig FeatureConfig::from_config(const Config& cfg) {
    FeatureConfig out;
    if (const auto* f = cfg.section("features")) {
        out.tau = f->get_real("tau", out.tau);
        out.min_run = f->get_real("min_run", out.min_run);
        out.smooth_width = static_cast<int>(f->get_int("smooth_width", out.smooth_width));
        out.missing_tolerance = f->get_real("missing_tolerance", out.missing_tolerance);
    }
    if (const auto* t = cfg.section("thresholds")) {
        for (const auto& [key, value] : t->entries) {
            auto p = pollutant_from_token(key);
            auto parts = split_list(value);
            auto safe = parts.size() == 2 ? parse_real(parts[0]) : std::nullopt;
            auto unsafe = parts.size() == 2 ? parse_real(parts[1]) : std::nullopt;
            if (!p || !safe || !unsafe)
                throw Error(ErrorKind::MalformedRecord, "thresholds." + key, "expected `<pollutant> = safe, unsafe`");
            out.threshold(*p) = {*safe, *unsafe};
        }
    }
    out.validate();
    return out;
}

std::string FeatureConfig::to_config_text() const {
    std::ostringstream os;
    os << "[features]\n"
       << "tau = " << format_real(tau) << "\n"
       << "min_run = " << format_real(min_run) << "\n"
       << "smooth_width = " << smooth_width << "\n"
       << "missing_tolerance = " << format_real(missing_tolerance) << "\n"
       << "\n[thresholds]\n";
    for (auto p : kAllPollutants)
        os << token(p) << " = " << format_real(threshold(p).safe) << ", " << format_real(threshold(p).unsafe) << "\n";
    return os.str();
}

BasicStats basic_stats(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorKind::EmptyWindow, "");
    double lo = x[0];
    double hi = x[0];
    double sum = 0.0;
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    const double n = static_cast<double>(x.size());
    const double avg = std::clamp(sum / n, lo, hi);
    double ss = 0.0;
    for (double v : x) ss += (v - avg) * (v - avg);
    return {lo, hi, avg, std::sqrt(ss / n)};
}

RateOfChange rate_of_change(std::span<const double> x, int w, double step) {
    if (w < 1) throw Error(ErrorKind::ConfigMismatch, "smooth_width", "must be >= 1");
    const auto width = static_cast<std::size_t>(w);
    if (x.size() < width + 1) throw Error(ErrorKind::WindowTooShort, std::to_string(x.size()));

    double raise = 0.0;
    double fall = 0.0;
    if (width == 1) {
        for (std::size_t i = 1; i < x.size(); ++i) {
            const double d = (x[i] - x[i - 1]) / step;
            raise = std::max(raise, d);
            fall = std::min(fall, d);
        }
        return {raise, fall};
    }
    const std::size_t m = x.size() - width + 1;
    std::vector<double> smooth(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < width; ++i) s += x[j + i];
        smooth[j] = s / static_cast<double>(width);
    }
    for (std::size_t j = 1; j < m; ++j) {
        const double d = (smooth[j] - smooth[j - 1]) / step;
        raise = std::max(raise, d);
        fall = std::min(fall, d);
    }
    return {raise, fall};
}

ThresholdStats threshold_stats(std::span<const double> x, double safe, double unsafe, double min_run,
                               double step) {
    if (safe > unsafe) throw Error(ErrorKind::ThresholdOrder, "", "safe > unsafe");
    const auto min_cells = static_cast<std::size_t>(std::max(1.0, std::ceil(min_run / step - 1e-9)));

    std::size_t peaks = 0;
    std::size_t peak_cells = 0;
    std::size_t above_safe = 0;
    std::size_t run = 0;
    auto close_run = [&] {
        if (run >= min_cells) {
            ++peaks;
            peak_cells += run;
        }
        run = 0;
    };
    for (double v : x) {
        if (v > safe) ++above_safe;
        if (v > unsafe)
            ++run;
        else
            close_run();
    }
    close_run();
    return {static_cast<double>(peaks), static_cast<double>(peak_cells) * step,
            static_cast<double>(above_safe) * step};
}

std::array<double, kStatCount> channel_features(std::span<const double> x, const Thresholds& th,
                                                const FeatureConfig& cfg, double step) {
    const auto b = basic_stats(x);
    const auto r = rate_of_change(x, cfg.smooth_width, step);
    const auto t = threshold_stats(x, th.safe, th.unsafe, cfg.min_run, step);
    return {b.min, b.max, b.avg, b.std, r.raise, r.fall, t.peak_count, t.peak_duration, t.long_stay};
}

FeatureSchema feature_schema(std::span<const DeviceId> devices, const FeatureConfig& cfg) {
    cfg.validate();
    if (devices.empty()) throw Error(ErrorKind::EmptyDevices, "");
    FeatureSchema schema;
    schema.devices.assign(devices.begin(), devices.end());
    schema.names.reserve(devices.size() * kPollutantCount * kStatCount);
    for (const auto& d : devices)
        for (auto p : kAllPollutants)
            for (auto s : kStatTokens) schema.names.push_back(d.str() + "." + std::string(token(p)) + "." + std::string(s));
    return schema;
}

std::size_t window_cells(double tau, double step) {
    const double ratio = tau / step;
    const double cells = std::round(ratio);
    if (cells < 1.0 || std::abs(ratio - cells) > 1e-9 * std::max(1.0, ratio))
        throw Error(ErrorKind::ConfigMismatch, "tau", "window length is not a whole number of steps");
    return static_cast<std::size_t>(cells);
}

bool fill_gaps(std::span<double> x) {
    const std::size_t n = x.size();
    std::size_t prev = n; // index of last present value
    for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(x[i])) continue;
        if (prev == n) {
            std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i), x[i]);
        } else if (i > prev + 1) {
            const double a = x[prev];
            const double b = x[i];
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j) x[j] = a + (b - a) * static_cast<double>(j - prev) / span;
        }
        prev = i;
    }
    if (prev == n) return false;
    std::fill(x.begin() + static_cast<std::ptrdiff_t>(prev) + 1, x.end(), x[prev]);
    return true;
}

namespace {

// Fills `out` (schema length) for the window at `first`. Returns the status
// and, on TooManyMissing, the offending channel.
WindowStatus extract_into(const AlignedSeries& series, std::size_t first, std::size_t cells,
                          const FeatureConfig& cfg, std::span<double> out, std::vector<double>& scratch,
                          std::string* failed_channel) {
    if (first + cells > series.length()) return WindowStatus::OutOfBounds;
    const auto limit = static_cast<std::size_t>(std::floor(cfg.missing_tolerance * static_cast<double>(cells) + 1e-9));
    std::size_t o = 0;
    for (std::size_t d = 0; d < series.devices().size(); ++d) {
        for (auto p : kAllPollutants) {
            auto src = series.channel(d, p).subspan(first, cells);
            scratch.assign(src.begin(), src.end());
            const auto missing = static_cast<std::size_t>(std::count_if(scratch.begin(), scratch.end(), is_missing));
            if (missing > limit || !fill_gaps(scratch)) {
                if (failed_channel) *failed_channel = series.devices()[d].str() + "." + std::string(token(p));
                return WindowStatus::TooManyMissing;
            }
            const auto f = channel_features(scratch, cfg.threshold(p), cfg, series.step());
            std::copy(f.begin(), f.end(), out.begin() + static_cast<std::ptrdiff_t>(o));
            o += kStatCount;
        }
    }
    return WindowStatus::Ok;
}

std::size_t check_batch_config(const AlignedSeries& series, const FeatureConfig& cfg) {
    cfg.validate();
    if (series.devices().empty()) throw Error(ErrorKind::EmptyDevices, "");
    const auto cells = window_cells(cfg.tau, series.step());
    if (cells < static_cast<std::size_t>(cfg.smooth_width) + 1) throw Error(ErrorKind::WindowTooShort, std::to_string(cells));
    return cells;
}

} // namespace

std::vector<double> extract_features(const AlignedSeries& series, std::size_t first, const FeatureConfig& cfg) {
    const auto cells = check_batch_config(series, cfg);
    std::vector<double> out(series.devices().size() * kPollutantCount * kStatCount);
    std::vector<double> scratch;
    std::string failed;
    switch (extract_into(series, first, cells, cfg, out, scratch, &failed)) {
    case WindowStatus::Ok: return out;
    case WindowStatus::TooManyMissing: throw Error(ErrorKind::TooManyMissing, failed);
    case WindowStatus::OutOfBounds: break;
    }
    throw Error(ErrorKind::ConfigMismatch, "window", "window extends past the series");
}

namespace kernels {

FeatureBatch extract_batch_serial(const AlignedSeries& series, std::span<const std::size_t> starts,
                                  const FeatureConfig& cfg) {
    const auto cells = check_batch_config(series, cfg);
    const std::size_t width = series.devices().size() * kPollutantCount * kStatCount;
    FeatureBatch batch{Matrix(starts.size(), width, kMissing), std::vector<WindowStatus>(starts.size())};
    std::vector<double> scratch;
    for (std::size_t w = 0; w < starts.size(); ++w) {
        batch.status[w] = extract_into(series, starts[w], cells, cfg, batch.values.row(w), scratch, nullptr);
        if (batch.status[w] != WindowStatus::Ok) std::fill_n(batch.values.row(w).begin(), width, kMissing);
    }
    return batch;
}

FeatureBatch extract_batch_omp(const AlignedSeries& series, std::span<const std::size_t> starts,
                               const FeatureConfig& cfg) {
    const auto cells = check_batch_config(series, cfg);
    const std::size_t width = series.devices().size() * kPollutantCount * kStatCount;
    FeatureBatch batch{Matrix(starts.size(), width, kMissing), std::vector<WindowStatus>(starts.size())};
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel
    {
        std::vector<double> scratch;
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t w = 0; w < n; ++w) {
            const auto i = static_cast<std::size_t>(w);
            batch.status[i] = extract_into(series, starts[i], cells, cfg, batch.values.row(i), scratch, nullptr);
            if (batch.status[i] != WindowStatus::Ok) std::fill_n(batch.values.row(i).begin(), width, kMissing);
        }
    }
    return batch;
}

} // namespace kernels

FeatureBatch extract_batch(const AlignedSeries& series, std::span<const std::size_t> starts, const FeatureConfig& cfg) {
    return kernels::extract_batch_omp(series, starts, cfg);
}

} // namespace airshadow
