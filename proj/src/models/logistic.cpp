#include <cmath>

#include "detail.hpp"

namespace airshadow::detail {

namespace {

void softmax_rows(Eigen::MatrixXd& z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - m).exp().matrix();
        z.row(i) /= z.row(i).sum();
    }
}

} // namespace

LogisticModel fit_logistic(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes) {
    const Eigen::MatrixXd xe = as_eigen(x);
    const auto n = xe.rows();
    const auto c = static_cast<Eigen::Index>(classes);
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, c);
    for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

    LogisticModel m;
    m.weights = Eigen::MatrixXd::Zero(c, xe.cols());
    m.bias = Eigen::VectorXd::Zero(c);
    const double lr = *spec.learning_rate;
    const double l2 = *spec.l2;
    for (int epoch = 0; epoch < *spec.epochs; ++epoch) {
        Eigen::MatrixXd p = xe * m.weights.transpose();
        p.rowwise() += m.bias.transpose();
        softmax_rows(p);
        const Eigen::MatrixXd g = (p - onehot) / static_cast<double>(n);
        const Eigen::MatrixXd gw = g.transpose() * xe + l2 * m.weights;
        const Eigen::VectorXd gb = g.colwise().sum().transpose();
        const double norm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
        if (norm < 1e-6) break;
        m.weights -= lr * gw;
        m.bias -= lr * gb;
    }
    return m;
}

void logistic_scores(const LogisticModel& m, std::span<const double> x, std::span<double> out) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> z(out.data(), static_cast<Eigen::Index>(out.size()));
    z = m.weights * xv + m.bias;
    softmax_inplace(out);
}

} // namespace airshadow::detail
