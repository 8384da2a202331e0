#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "airshadow/config.hpp"
#include "airshadow/matrix.hpp"
#include "airshadow/rng.hpp"

namespace airshadow {

enum class ModelFamily : std::uint8_t {
    DecisionTree,
    RandomForest,
    Knn,
    GaussianNb,
    LogisticRegression,
    Mlp,
    Constant, // produced when training data holds one class
};

std::string_view to_text(ModelFamily f);
ModelFamily parse_model_family(std::string_view text);

/// Hyperparameters. Fields not used by a family are ignored; unset optional
/// fields take the family defaults listed in resolved().
struct ModelSpec {
    ModelFamily family = ModelFamily::RandomForest;
    int max_depth = 10;
    int n_estimators = 50;
    int k = 10;
    std::vector<int> hidden{64, 64, 64};
    std::optional<double> learning_rate;
    std::optional<int> epochs;
    int batch_size = 32;
    std::optional<double> l2;
    double momentum = 0.9;
    std::optional<bool> normalize;
    bool bootstrap = true;
    int max_features = 0; // 0: sqrt(F), -1: all features, n > 0: n features
    std::uint64_t seed = 0;

    /// Copy with every optional filled:
    ///   logistic_regression: lr 0.1, 5000 epochs, l2 1e-4
    ///   mlp: lr 1e-3, 200 epochs, l2 1e-4
    ///   normalize: on for knn, logistic_regression, mlp; off otherwise
    ModelSpec resolved() const;
    /// Throws Error(ConfigMismatch) on non-positive parameters.
    void validate() const;

    /// Short identifier such as `random_forest` and a human parameter string
    /// such as `Max estimator 50 Max depth 10`.
    std::string name() const;
    std::string params_text() const;

    /// `key=value` pairs, space separated; inverse of parse_spec_line.
    std::string to_line() const;
    static ModelSpec parse_line(std::string_view line);
    static ModelSpec from_section(const ConfigSection& section);
};

/// The standard comparison grid: 17 configurations across the six families.
std::vector<ModelSpec> benchmark_grid(std::uint64_t seed = 0);
/// `[model]` sections of a spec file, in order.
std::vector<ModelSpec> specs_from_config(const Config& cfg);

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> scale; // std, or 1 for constant features

    static Normalizer fit(const Matrix& x);
    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix apply(const Matrix& x) const;
};

struct TreeNode {
    int feature = -1; // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution; // class fractions of the training rows here
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    const std::vector<double>& leaf(std::span<const double> x) const;
    int depth() const;
};

struct TreeOptions {
    int max_depth = 10;
    int max_features = -1; // -1: all
};

/// CART with Gini impurity. Splits go left when x <= threshold; thresholds
/// sit at midpoints of consecutive distinct values. Among equal impurities
/// the lowest feature index, then lowest threshold wins. With a feature
/// budget, a node draws that many features and keeps drawing until one
/// yields a valid split. `y` holds class indices in [0, classes).
DecisionTree build_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows, int classes,
                        const TreeOptions& opts, Rng* rng);

struct ForestModel {
    std::vector<DecisionTree> trees;
};

struct KnnModel {
    int k = 1;
    Matrix points; // normalized when the model normalizes
    std::vector<int> labels; // class indices
};

struct GaussianNbModel {
    Eigen::MatrixXd mean;     // classes x features
    Eigen::MatrixXd variance; // includes smoothing
    Eigen::VectorXd log_prior;
};

struct LogisticModel {
    Eigen::MatrixXd weights; // classes x features
    Eigen::VectorXd bias;
};

/// Fully connected ReLU network with a softmax output layer.
struct MlpModel {
    std::vector<Eigen::MatrixXd> weights; // layer l: out x in
    std::vector<Eigen::VectorXd> biases;

    std::vector<int> layer_sizes() const;
};

struct ConstantModel {};

using ModelParams =
    std::variant<DecisionTree, ForestModel, KnnModel, GaussianNbModel, LogisticModel, MlpModel, ConstantModel>;

class TrainedModel {
public:
    ModelSpec spec;                      // resolved
    std::vector<int> classes;            // sorted class ids
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names; // optional; empty when unknown
    std::optional<Normalizer> normalizer;
    ModelParams params;
    std::vector<std::string> warnings;

    ModelFamily family() const;

    /// Per-class scores in `classes` order; non-negative, sums to 1.
    /// Throws Error(SchemaMismatch) on a wrong-length input.
    std::vector<double> predict_scores(std::span<const double> x) const;
    /// Class id with the highest score; ties go to the earlier class.
    int predict(std::span<const double> x) const;

    Matrix predict_scores_batch(const Matrix& x) const; // OpenMP over rows
    std::vector<int> predict_batch(const Matrix& x) const;
};

/// Throws Error(EmptyDataset | NonFiniteFeature | LengthMismatch). A single
/// class yields a constant predictor with a warning.
TrainedModel train(const ModelSpec& spec, const Matrix& x, std::span<const int> y);

/// Versioned text format starting `airshadow-model v1`; reals are written
/// in shortest round-trip form so loading reproduces predictions exactly.
void save_model(std::ostream& out, const TrainedModel& model);
/// Throws Error(VersionMismatch | CorruptModel).
TrainedModel load_model(std::istream& in);

std::size_t argmax_first(std::span<const double> scores);
void softmax_inplace(std::span<double> v);

namespace mlp {

/// He-style uniform initialisation: U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// zero biases.
MlpModel init(std::span<const int> layer_sizes, Rng& rng);

/// Softmax probabilities, one row per input row.
Eigen::MatrixXd forward(const MlpModel& net, const Eigen::MatrixXd& x);

/// Mean cross-entropy over the rows plus 0.5 * l2 * sum of squared weights.
/// When `grad` is given it receives dLoss/dparams with the same shapes.
double loss_and_gradient(const MlpModel& net, const Eigen::MatrixXd& x, std::span<const int> y, double l2,
                         MlpModel* grad);

} // namespace mlp

} // namespace airshadow
