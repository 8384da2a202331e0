#pragma once

// Brute-force reference computations used by the unit and acceptance tests.
// They follow the textbook definitions directly and share no code with the
// library kernels.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "airshadow/eval.hpp"
#include "airshadow/features.hpp"
#include "airshadow/series.hpp"

namespace oracle {

inline std::vector<double> channel_stats(std::vector<double> x, const airshadow::Thresholds& th,
                                         const airshadow::FeatureConfig& cfg, double step) {
    const std::size_t n = x.size();
    long double sum = 0.0L;
    for (double v : x) sum += v;
    const double mean = static_cast<double>(sum / static_cast<long double>(n));
    long double ss = 0.0L;
    for (double v : x) ss += (static_cast<long double>(v) - mean) * (static_cast<long double>(v) - mean);
    const double sd = std::sqrt(static_cast<double>(ss / static_cast<long double>(n)));

    const auto w = static_cast<std::size_t>(cfg.smooth_width);
    std::vector<double> smooth;
    for (std::size_t j = 0; j + w <= n; ++j) {
        long double s = 0.0L;
        for (std::size_t i = j; i < j + w; ++i) s += x[i];
        smooth.push_back(static_cast<double>(s / static_cast<long double>(w)));
    }
    double raise = 0.0;
    double fall = 0.0;
    for (std::size_t j = 1; j < smooth.size(); ++j) {
        raise = std::max(raise, (smooth[j] - smooth[j - 1]) / step);
        fall = std::min(fall, (smooth[j] - smooth[j - 1]) / step);
    }

    // Maximal runs strictly above the unsafe level, as [begin, end) pairs.
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < n;) {
        if (x[i] > th.unsafe) {
            std::size_t j = i;
            while (j < n && x[j] > th.unsafe) ++j;
            runs.emplace_back(i, j);
            i = j;
        } else {
            ++i;
        }
    }
    double peaks = 0.0;
    double peak_time = 0.0;
    for (auto [b, e] : runs) {
        const double len = static_cast<double>(e - b) * step;
        if (len + 1e-9 >= cfg.min_run) {
            peaks += 1.0;
            peak_time += len;
        }
    }
    double above = 0.0;
    for (double v : x)
        if (v > th.safe) above += step;

    return {*std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end()), mean, sd, raise, fall,
            peaks, peak_time, above};
}

/// Linear interpolation between present neighbours, nearest value at the ends.
inline std::vector<double> interpolate(std::span<const double> raw) {
    std::vector<double> x(raw.begin(), raw.end());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isnan(x[i])) continue;
        std::size_t l = i;
        while (l > 0 && std::isnan(raw[l])) --l;
        std::size_t r = i;
        while (r < n && std::isnan(raw[r])) ++r;
        const bool has_l = !std::isnan(raw[l]);
        const bool has_r = r < n;
        if (has_l && has_r)
            x[i] = raw[l] + (raw[r] - raw[l]) * static_cast<double>(i - l) / static_cast<double>(r - l);
        else if (has_l)
            x[i] = raw[l];
        else
            x[i] = raw[r];
    }
    return x;
}

inline std::vector<double> window_features(const airshadow::AlignedSeries& s, std::size_t first,
                                           const airshadow::FeatureConfig& cfg) {
    const auto cells = static_cast<std::size_t>(std::llround(cfg.tau / s.step()));
    std::vector<double> out;
    for (std::size_t d = 0; d < s.devices().size(); ++d)
        for (auto p : airshadow::kAllPollutants) {
            const auto x = interpolate(s.channel(d, p).subspan(first, cells));
            const auto f = channel_stats(x, cfg.threshold(p), cfg, s.step());
            out.insert(out.end(), f.begin(), f.end());
        }
    return out;
}

/// Smooth random telemetry with occasional excursions above the thresholds.
inline airshadow::AlignedSeries random_series(std::size_t devices, std::size_t length, std::uint64_t seed) {
    std::vector<airshadow::DeviceId> ids;
    for (std::size_t d = 0; d < devices; ++d) ids.emplace_back("dev" + std::to_string(d));
    airshadow::AlignedSeries s(ids, 1.7e9, 1.0, length);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double base[] = {900.0, 300.0, 20.0, 60.0, 27.0, 58.0};
    const double scale[] = {15.0, 8.0, 1.5, 3.0, 0.05, 0.3};
    for (std::size_t d = 0; d < devices; ++d)
        for (auto p : airshadow::kAllPollutants) {
            const auto i = airshadow::index_of(p);
            auto ch = s.channel(d, p);
            double v = base[i];
            for (std::size_t k = 0; k < length; ++k) {
                v += scale[i] * n01(rng);
                if (i == 5) v = std::clamp(v, 0.0, 100.0);
                if (i < 4) v = std::max(v, 0.0);
                ch[k] = v;
            }
        }
    return s;
}

/// AUC as the probability that a random positive outranks a random negative,
/// ties counting one half.
inline double pair_auc(std::span<const double> scores, std::span<const char> positive) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1.0;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Support-weighted F1 from per-class precision and recall.
inline double weighted_f1(const std::vector<std::vector<std::size_t>>& cm) {
    const std::size_t c = cm.size();
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t t = 0; t < c; ++t) {
        double support = 0.0;
        double col = 0.0;
        for (std::size_t p = 0; p < c; ++p) {
            support += static_cast<double>(cm[t][p]);
            col += static_cast<double>(cm[p][t]);
        }
        const double tp = static_cast<double>(cm[t][t]);
        const double prec = col > 0.0 ? tp / col : 0.0;
        const double rec = support > 0.0 ? tp / support : 0.0;
        const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        acc += support * f1;
        total += support;
    }
    return acc / total;
}

} // namespace oracle
