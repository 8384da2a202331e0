#pragma once

#include <span>

#include "airshadow/models.hpp"

namespace airshadow::detail {

DecisionTree fit_tree(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes);
ForestModel fit_forest(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes);
KnnModel fit_knn(const ModelSpec& spec, const Matrix& x, std::span<const int> y);
GaussianNbModel fit_gnb(const Matrix& x, std::span<const int> y, int classes);
LogisticModel fit_logistic(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes);
MlpModel fit_mlp(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes);

void knn_scores(const KnnModel& m, std::span<const double> x, std::span<double> out);
void gnb_scores(const GaussianNbModel& m, std::span<const double> x, std::span<double> out);
void logistic_scores(const LogisticModel& m, std::span<const double> x, std::span<double> out);
void mlp_scores(const MlpModel& m, std::span<const double> x, std::span<double> out);

inline Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_eigen(const Matrix& m) {
    return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

} // namespace airshadow::detail
