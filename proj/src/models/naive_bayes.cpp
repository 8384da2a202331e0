#include <cmath>
#include <numbers>

#include "detail.hpp"

namespace airshadow::detail {

GaussianNbModel fit_gnb(const Matrix& x, std::span<const int> y, int classes) {
    const auto c = static_cast<Eigen::Index>(classes);
    const auto f = static_cast<Eigen::Index>(x.cols);
    const auto xe = as_eigen(x);
    GaussianNbModel m;
    m.mean = Eigen::MatrixXd::Zero(c, f);
    m.variance = Eigen::MatrixXd::Zero(c, f);
    m.log_prior = Eigen::VectorXd::Zero(c);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(c);
    for (std::size_t i = 0; i < x.rows; ++i) {
        counts(y[i]) += 1.0;
        m.mean.row(y[i]) += xe.row(static_cast<Eigen::Index>(i));
    }
    for (Eigen::Index k = 0; k < c; ++k) m.mean.row(k) /= counts(k);
    for (std::size_t i = 0; i < x.rows; ++i)
        m.variance.row(y[i]) += (xe.row(static_cast<Eigen::Index>(i)) - m.mean.row(y[i])).array().square().matrix();
    for (Eigen::Index k = 0; k < c; ++k) m.variance.row(k) /= counts(k);

    // Smoothing: 1e-9 times the largest per-feature variance of the data.
    const Eigen::RowVectorXd overall_mean = xe.colwise().mean();
    const double max_var =
        ((xe.rowwise() - overall_mean).array().square().colwise().sum() / static_cast<double>(x.rows)).maxCoeff();
    const double eps = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
    m.variance.array() += eps;
    m.log_prior = (counts / static_cast<double>(x.rows)).array().log();
    return m;
}

void gnb_scores(const GaussianNbModel& m, std::span<const double> x, std::span<double> out) {
    const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index k = 0; k < m.mean.rows(); ++k) {
        const auto var = m.variance.row(k).array();
        const double ll = -0.5 * ((2.0 * std::numbers::pi * var).log().sum() +
                                  ((xv - m.mean.row(k)).array().square() / var).sum());
        out[static_cast<std::size_t>(k)] = m.log_prior(k) + ll;
    }
    softmax_inplace(out);
}

} // namespace airshadow::detail
