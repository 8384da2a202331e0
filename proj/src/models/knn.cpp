#include <algorithm>

#include "detail.hpp"

namespace airshadow::detail {

KnnModel fit_knn(const ModelSpec& spec, const Matrix& x, std::span<const int> y) {
    KnnModel m;
    m.k = std::min<int>(spec.k, static_cast<int>(x.rows));
    m.points = x;
    m.labels.assign(y.begin(), y.end());
    return m;
}

void knn_scores(const KnnModel& m, std::span<const double> x, std::span<double> out) {
    const std::size_t n = m.points.rows;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = m.points.row(i);
        double d = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double diff = p[j] - x[j];
            d += diff * diff;
        }
        dist[i] = {d, i};
    }
    const auto k = static_cast<std::size_t>(m.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) out[static_cast<std::size_t>(m.labels[dist[i].second])] += 1.0;
    for (double& v : out) v /= static_cast<double>(k);
}

} // namespace airshadow::detail
