#include "airshadow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>

#include "airshadow/rng.hpp"

namespace airshadow {

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(std::span<const int> y) {
    std::map<int, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < y.size(); ++i) out[y[i]].push_back(i);
    return out;
}

std::size_t train_count(std::size_t n, double frac) {
    const auto want = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    return std::clamp<std::size_t>(want, 1, n - 1);
}

Matrix take_rows(const Matrix& x, std::span<const std::size_t> idx) { return x.select_rows(idx); }

std::vector<int> take(std::span<const int> y, std::span<const std::size_t> idx) {
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
    return out;
}

double accuracy_of(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i];
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size()));
}

} // namespace

SplitIndices stratified_split(std::span<const int> y, double train_frac, std::uint64_t seed, bool stratify) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw Error(ErrorKind::ConfigMismatch, "train_frac", "must lie strictly between 0 and 1");
    Rng rng = make_rng(seed, "split");
    SplitIndices out;
    auto deal = [&](std::vector<std::size_t> rows, const std::string& who) {
        if (rows.size() < 2) throw Error(ErrorKind::ClassTooSmall, who, "needs at least 2 rows to split");
        std::shuffle(rows.begin(), rows.end(), rng);
        const std::size_t n_train = train_count(rows.size(), train_frac);
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    };
    if (stratify) {
        for (auto& [cls, rows] : rows_by_class(y)) deal(std::move(rows), std::to_string(cls));
    } else {
        std::vector<std::size_t> rows(y.size());
        std::iota(rows.begin(), rows.end(), 0);
        deal(std::move(rows), "dataset");
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed, bool stratify,
                                                       std::vector<std::string>* warnings) {
    if (k < 2 || static_cast<std::size_t>(k) > y.size())
        throw Error(ErrorKind::KTooLarge, std::to_string(k), "need 2 <= k <= " + std::to_string(y.size()));
    Rng rng = make_rng(seed, "kfold");
    const auto by_class = rows_by_class(y);
    if (stratify) {
        for (const auto& [cls, rows] : by_class) {
            if (rows.size() < static_cast<std::size_t>(k)) {
                if (warnings)
                    warnings->push_back("class " + std::to_string(cls) + " has " + std::to_string(rows.size()) +
                                        " rows, fewer than k = " + std::to_string(k) + "; using plain k-fold");
                stratify = false;
                break;
            }
        }
    }
    std::vector<std::size_t> sequence;
    if (stratify) {
        for (auto [cls, rows] : by_class) {
            std::shuffle(rows.begin(), rows.end(), rng);
            sequence.insert(sequence.end(), rows.begin(), rows.end());
        }
    } else {
        sequence.resize(y.size());
        std::iota(sequence.begin(), sequence.end(), 0);
        std::shuffle(sequence.begin(), sequence.end(), rng);
    }
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < sequence.size(); ++i) folds[i % folds.size()].push_back(sequence[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    if (t == 0) return 0.0;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
    return static_cast<double>(diag) / static_cast<double>(t);
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::span<const int> classes) {
    if (y_true.size() != y_pred.size())
        throw Error(ErrorKind::LengthMismatch, "y_pred",
                    std::to_string(y_true.size()) + " truths vs " + std::to_string(y_pred.size()) + " predictions");
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    cm.counts.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
    auto index = [&](int c) {
        auto it = std::find(classes.begin(), classes.end(), c);
        if (it == classes.end()) throw Error(ErrorKind::UnknownClass, std::to_string(c));
        return static_cast<std::size_t>(it - classes.begin());
    };
    for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts[index(y_true[i])][index(y_pred[i])];
    return cm;
}

Metrics weighted_metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw Error(ErrorKind::EmptyMatrix, "confusion", "no samples");
    const std::size_t c = cm.counts.size();
    Metrics m;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += cm.counts[i][j];
            col += cm.counts[j][i];
        }
        const double tp = static_cast<double>(cm.counts[i][i]);
        diag += cm.counts[i][i];
        ClassMetrics cls;
        cls.cls = cm.classes[i];
        cls.support = row;
        cls.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
        cls.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
        const double denom = cls.precision + cls.recall;
        cls.f1 = denom > 0.0 ? 2.0 * cls.precision * cls.recall / denom : 0.0;
        m.precision += static_cast<double>(row) * cls.precision;
        m.f1 += static_cast<double>(row) * cls.f1;
        m.per_class.push_back(cls);
    }
    m.precision /= static_cast<double>(total);
    m.f1 /= static_cast<double>(total);
    m.accuracy = static_cast<double>(diag) / static_cast<double>(total);
    // support_i * (tp_i / support_i) summed over classes is the diagonal sum.
    m.recall = m.accuracy;
    return m;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const char> positive) {
    if (scores.size() != positive.size())
        throw Error(ErrorKind::LengthMismatch, "scores", "scores and labels differ in length");
    RocCurve curve;
    const auto pos = static_cast<std::size_t>(std::count_if(positive.begin(), positive.end(), [](char p) { return p != 0; }));
    const std::size_t neg = positive.size() - pos;
    curve.present = pos > 0 && neg > 0;
    if (!curve.present) {
        curve.auc = std::numeric_limits<double>::quiet_NaN();
        return curve;
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) (positive[order[i]] ? tp : fp) += 1;
        curve.thresholds.push_back(s);
        curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
        curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    }
    double area = 0.0;
    for (std::size_t i = 1; i < curve.fpr.size(); ++i)
        area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) / 2.0;
    curve.auc = area;
    return curve;
}

RocResult roc_ovr(std::span<const int> y_true, const Matrix& scores, std::span<const int> classes) {
    if (scores.rows != y_true.size())
        throw Error(ErrorKind::LengthMismatch, "scores", "one score row per label expected");
    if (scores.cols != classes.size())
        throw Error(ErrorKind::LengthMismatch, "scores", "one score column per class expected");
    RocResult out;
    std::vector<double> column(scores.rows);
    std::vector<char> positive(scores.rows);
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (std::size_t i = 0; i < scores.rows; ++i) {
            column[i] = scores(i, c);
            positive[i] = y_true[i] == classes[c];
        }
        RocCurve curve = roc_curve(column, positive);
        curve.cls = classes[c];
        if (curve.present) {
            sum += curve.auc;
            ++present;
        }
        out.curves.push_back(std::move(curve));
    }
    out.macro_auc = present > 0 ? sum / static_cast<double>(present) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::uint64_t unit_seed(const Protocol& p, const ModelSpec& spec, std::size_t fold) {
    return substream(p.seed, "model:" + spec.to_line(), fold);
}

BenchmarkReport run_benchmark(const Matrix& x, std::span<const int> y, std::span<const ModelSpec> specs,
                              const Protocol& protocol) {
    if (x.rows == 0) throw Error(ErrorKind::EmptyDataset, "dataset", "no rows");
    if (x.rows != y.size()) throw Error(ErrorKind::LengthMismatch, "labels", "rows and labels differ");

    BenchmarkReport report;
    report.samples = x.rows;
    report.features = x.cols;
    report.protocol = protocol;
    report.classes.assign(y.begin(), y.end());
    std::sort(report.classes.begin(), report.classes.end());
    report.classes.erase(std::unique(report.classes.begin(), report.classes.end()), report.classes.end());

    const SplitIndices split = stratified_split(y, protocol.split_frac, protocol.seed, protocol.stratify);
    const auto folds =
        stratified_kfold(y, protocol.k, protocol.seed, protocol.stratify, &report.warnings);
    const std::size_t k = folds.size();
    const std::size_t per_spec = k + 1;

    struct UnitResult {
        double train_acc = 0.0;
        double test_acc = 0.0;
        Metrics train, test;
        ConfusionMatrix cm;
        RocResult roc;
        std::vector<std::string> warnings;
        std::exception_ptr error;
    };
    std::vector<UnitResult> units(specs.size() * per_spec);

    const auto total = static_cast<std::ptrdiff_t>(units.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t u = 0; u < total; ++u) {
        UnitResult& r = units[static_cast<std::size_t>(u)];
        try {
            const std::size_t s = static_cast<std::size_t>(u) / per_spec;
            const std::size_t fold = static_cast<std::size_t>(u) % per_spec;
            std::vector<std::size_t> train_idx, test_idx;
            if (fold == k) {
                train_idx = split.train;
                test_idx = split.test;
            } else {
                test_idx = folds[fold];
                for (std::size_t f = 0; f < k; ++f)
                    if (f != fold) train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
                std::sort(train_idx.begin(), train_idx.end());
            }
            ModelSpec spec = specs[s];
            spec.seed = unit_seed(protocol, specs[s], fold);
            const Matrix xtr = take_rows(x, train_idx);
            const Matrix xte = take_rows(x, test_idx);
            const auto ytr = take(y, train_idx);
            const auto yte = take(y, test_idx);
            const TrainedModel model = train(spec, xtr, ytr);
            r.warnings = model.warnings;
            const auto ptr = model.predict_batch(xtr);
            const Matrix scores = model.predict_scores_batch(xte);
            std::vector<int> pte(yte.size());
            for (std::size_t i = 0; i < yte.size(); ++i) pte[i] = model.classes[argmax_first(scores.row(i))];
            r.train_acc = accuracy_of(ytr, ptr);
            r.test_acc = accuracy_of(yte, pte);
            if (fold == k) {
                r.train = weighted_metrics(confusion_matrix(ytr, ptr, report.classes));
                r.cm = confusion_matrix(yte, pte, report.classes);
                r.test = weighted_metrics(r.cm);
                // Scores cover the model's classes; widen to the report's.
                Matrix wide(scores.rows, report.classes.size());
                for (std::size_t c = 0; c < model.classes.size(); ++c) {
                    const auto col = static_cast<std::size_t>(
                        std::lower_bound(report.classes.begin(), report.classes.end(), model.classes[c]) -
                        report.classes.begin());
                    for (std::size_t i = 0; i < scores.rows; ++i) wide(i, col) = scores(i, c);
                }
                r.roc = roc_ovr(yte, wide, report.classes);
            }
        } catch (...) {
            r.error = std::current_exception();
        }
    }
    for (const auto& r : units)
        if (r.error) std::rethrow_exception(r.error);

    for (std::size_t s = 0; s < specs.size(); ++s) {
        BenchmarkRow row;
        row.spec = specs[s];
        const UnitResult& main = units[s * per_spec + k];
        row.train = main.train;
        row.test = main.test;
        row.test_confusion = main.cm;
        row.test_roc = main.roc;
        std::vector<double> tr, te;
        for (std::size_t f = 0; f < k; ++f) {
            tr.push_back(units[s * per_spec + f].train_acc);
            te.push_back(units[s * per_spec + f].test_acc);
        }
        mean_std(tr, row.cv_train_mean, row.cv_train_std);
        mean_std(te, row.cv_test_mean, row.cv_test_std);
        for (std::size_t f = 0; f < per_spec; ++f)
            for (const auto& w : units[s * per_spec + f].warnings)
                if (std::find(row.warnings.begin(), row.warnings.end(), w) == row.warnings.end()) row.warnings.push_back(w);
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace airshadow
