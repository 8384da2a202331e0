#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "airshadow/matrix.hpp"
#include "airshadow/models.hpp"

namespace airshadow {

struct SplitIndices {
    std::vector<std::size_t> train; // ascending
    std::vector<std::size_t> test;  // ascending
};

/// Per class, round(frac * n_c) rows (clamped to [1, n_c - 1]) go to train.
/// Without `stratify` the same rule applies to the whole dataset. Throws
/// Error(ClassTooSmall) or Error(ConfigMismatch) for frac outside (0, 1).
SplitIndices stratified_split(std::span<const int> y, double train_frac, std::uint64_t seed, bool stratify = true);

/// k test folds, each ascending. Rows of every class are shuffled, laid end
/// to end class by class, and dealt round-robin. A class with fewer than k
/// rows falls back to a plain shuffled deal and adds a warning. Throws
/// Error(KTooLarge) when k < 2 or k > rows.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed,
                                                       bool stratify = true, std::vector<std::string>* warnings = nullptr);

struct ConfusionMatrix {
    std::vector<int> classes;
    std::vector<std::vector<std::size_t>> counts; // [true][predicted]

    std::size_t total() const;
    double accuracy() const;
};

/// Throws Error(LengthMismatch | UnknownClass).
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::span<const int> classes);

struct ClassMetrics {
    int cls = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

/// Support-weighted scores. Empty predicted column gives precision 0, and
/// F1 is 0 when precision and recall are both 0.
struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
};

/// Throws Error(EmptyMatrix).
Metrics weighted_metrics(const ConfusionMatrix& cm);

struct RocCurve {
    int cls = 0;
    bool present = false; // false when the class has no positives or no negatives
    std::vector<double> thresholds; // descending; the first point (0, 0) has +inf
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;
};

/// Sweeps every distinct score as a threshold; trapezoid AUC.
RocCurve roc_curve(std::span<const double> scores, std::span<const char> positive);

struct RocResult {
    std::vector<RocCurve> curves; // one per class, class-list order
    double macro_auc = 0.0;       // mean over present classes
};

/// One-vs-rest over the columns of `scores` (class-list order).
RocResult roc_ovr(std::span<const int> y_true, const Matrix& scores, std::span<const int> classes);

struct Protocol {
    double split_frac = 0.7;
    int k = 5;
    std::uint64_t seed = 0;
    bool stratify = true;
};

struct BenchmarkRow {
    ModelSpec spec;
    Metrics train;
    Metrics test;
    double cv_train_mean = 0.0;
    double cv_test_mean = 0.0;
    double cv_train_std = 0.0; // population std over folds
    double cv_test_std = 0.0;
    ConfusionMatrix test_confusion;
    RocResult test_roc;
    std::vector<std::string> warnings;
};

struct BenchmarkReport {
    std::string dataset;
    std::size_t samples = 0;
    std::size_t features = 0;
    std::vector<int> classes;
    std::vector<std::string> class_names; // parallel to classes
    Protocol protocol;
    std::vector<BenchmarkRow> rows;
    std::vector<std::string> warnings;
};

/// Seed for one training unit: depends on the protocol seed, the spec and
/// the fold (fold k is the 70-30 split), never on the row position.
std::uint64_t unit_seed(const Protocol& p, const ModelSpec& spec, std::size_t fold);

/// Rows follow `specs`. Units run in parallel; results are independent of
/// the thread count.
BenchmarkReport run_benchmark(const Matrix& x, std::span<const int> y, std::span<const ModelSpec> specs,
                              const Protocol& protocol);

enum class ReportFormat { TextTable, Csv, Markdown, PlotData, Json };

/// "text", "csv", "markdown"/"md", "plot-data", "json". Throws
/// Error(UnsupportedFormat).
ReportFormat parse_report_format(std::string_view name);

inline constexpr std::string_view kReportCsvHeader =
    "model,params,train_f1,train_p,train_r,test_f1,test_p,test_r,cv_train_mean,cv_test_mean,cv_train_std,cv_test_std";

void render_report(std::ostream& out, const BenchmarkReport& report, ReportFormat format);

/// One data row of the csv rendering; values follow the header order.
struct ReportCsvRow {
    std::string model;
    std::string params;
    std::array<double, 10> values{};
};
std::vector<ReportCsvRow> parse_report_csv(std::istream& in);

/// Reads a json rendering back (used by `report`).
BenchmarkReport read_report_json(std::istream& in);

/// Metrics of one model on one dataset, as printed by `evaluate`.
void render_evaluation(std::ostream& out, const Metrics& m, const ConfusionMatrix& cm, const RocResult& roc,
                       std::span<const std::string> class_names);

} // namespace airshadow
