#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"

namespace airshadow {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0; // n * weighted Gini of the children
};

bool better(const Split& cand, const Split& best) {
    if (best.feature < 0) return true;
    if (cand.impurity != best.impurity) return cand.impurity < best.impurity;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
}

class Builder {
public:
    Builder(const Matrix& x, std::span<const int> y, int classes, const TreeOptions& opts, Rng* rng)
        : x_(x), y_(y), classes_(classes), opts_(opts), rng_(rng), order_(x.cols) {
        std::iota(order_.begin(), order_.end(), 0);
    }

    DecisionTree run(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::vector<double> counts(static_cast<std::size_t>(classes_), 0.0);
        for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        const double n = static_cast<double>(rows.size());
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        {
            auto& node = tree_.nodes[static_cast<std::size_t>(id)];
            node.distribution = counts;
            for (double& v : node.distribution) v /= n;
        }
        if (depth >= opts_.max_depth || pure || rows.size() < 2) return id;

        const Split split = choose(rows);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Split choose(const std::vector<std::size_t>& rows) {
        const std::size_t f = x_.cols;
        const bool subsample = opts_.max_features > 0 && static_cast<std::size_t>(opts_.max_features) < f;
        if (!subsample) {
            Split best;
            for (std::size_t j = 0; j < f; ++j) evaluate(rows, j, best);
            return best;
        }
        // Partial Fisher-Yates: draw features one by one; the first budget
        // are always evaluated, later draws only while no split was found.
        std::iota(order_.begin(), order_.end(), 0);
        Split best;
        const auto budget = static_cast<std::size_t>(opts_.max_features);
        for (std::size_t i = 0; i < f; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, f - 1);
            std::swap(order_[i], order_[pick(*rng_)]);
            if (i >= budget && best.feature >= 0) break;
            evaluate(rows, order_[i], best);
        }
        return best;
    }

    void evaluate(const std::vector<std::size_t>& rows, std::size_t j, Split& best) {
        pairs_.clear();
        for (auto r : rows) pairs_.emplace_back(x_(r, j), y_[r]);
        std::sort(pairs_.begin(), pairs_.end());
        if (pairs_.front().first == pairs_.back().first) return;

        const auto c = static_cast<std::size_t>(classes_);
        left_.assign(c, 0.0);
        right_.assign(c, 0.0);
        for (const auto& p : pairs_) right_[static_cast<std::size_t>(p.second)] += 1.0;
        double sq_left = 0.0;
        double sq_right = 0.0;
        for (double v : right_) sq_right += v * v;
        const std::size_t n = pairs_.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto k = static_cast<std::size_t>(pairs_[i].second);
            sq_left += 2.0 * left_[k] + 1.0;
            sq_right -= 2.0 * right_[k] - 1.0;
            left_[k] += 1.0;
            right_[k] -= 1.0;
            const double a = pairs_[i].first;
            const double b = pairs_[i + 1].first;
            if (!(a < b)) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            double thr = a + (b - a) / 2.0;
            if (!(thr < b)) thr = a;
            const Split cand{static_cast<int>(j), thr, static_cast<double>(n) - sq_left / nl - sq_right / nr};
            if (better(cand, best)) best = cand;
        }
    }

    const Matrix& x_;
    std::span<const int> y_;
    int classes_;
    TreeOptions opts_;
    Rng* rng_;
    std::vector<std::size_t> order_;
    std::vector<std::pair<double, int>> pairs_;
    std::vector<double> left_, right_;
    DecisionTree tree_;
};

} // namespace

DecisionTree build_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows, int classes,
                        const TreeOptions& opts, Rng* rng) {
    if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "rows", "tree needs at least one row");
    if (opts.max_features > 0 && static_cast<std::size_t>(opts.max_features) < x.cols && rng == nullptr)
        throw Error(ErrorKind::ConfigMismatch, "max_features", "feature subsampling needs a random stream");
    Builder b(x, y, classes, opts, rng);
    return b.run(std::vector<std::size_t>(rows.begin(), rows.end()));
}

namespace detail {

DecisionTree fit_tree(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes) {
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    TreeOptions opts{spec.max_depth, -1};
    return build_tree(x, y, rows, classes, opts, nullptr);
}

ForestModel fit_forest(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes) {
    ForestModel forest;
    forest.trees.resize(static_cast<std::size_t>(spec.n_estimators));
    int budget = spec.max_features;
    if (budget == 0) budget = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.cols))));
    const TreeOptions opts{spec.max_depth, budget};
    const std::size_t n = x.rows;
    const auto trees = static_cast<std::ptrdiff_t>(forest.trees.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < trees; ++t) {
        Rng rng = make_rng(spec.seed, "tree", static_cast<std::uint64_t>(t));
        std::vector<std::size_t> rows(n);
        if (spec.bootstrap) {
            std::uniform_int_distribution<std::size_t> draw(0, n - 1);
            for (auto& r : rows) r = draw(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        forest.trees[static_cast<std::size_t>(t)] = build_tree(x, y, rows, classes, opts, &rng);
    }
    return forest;
}

} // namespace detail

} // namespace airshadow
