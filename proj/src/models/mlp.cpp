#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"

namespace airshadow {

namespace mlp {

namespace {

struct Trace {
    std::vector<Eigen::MatrixXd> act; // act[0] = input, act[l+1] = output of layer l
};

Eigen::MatrixXd run(const MlpModel& net, const Eigen::MatrixXd& x, Trace* trace) {
    Eigen::MatrixXd a = x;
    const std::size_t layers = net.weights.size();
    if (trace) trace->act.assign(1, x);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = a * net.weights[l].transpose();
        z.rowwise() += net.biases[l].transpose();
        if (l + 1 < layers) {
            a = z.cwiseMax(0.0);
        } else {
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
                const double m = z.row(i).maxCoeff();
                z.row(i) = (z.row(i).array() - m).exp().matrix();
                z.row(i) /= z.row(i).sum();
            }
            a = std::move(z);
        }
        if (trace) trace->act.push_back(a);
    }
    return a;
}

} // namespace

MlpModel init(std::span<const int> layer_sizes, Rng& rng) {
    MlpModel net;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / in);
        std::uniform_real_distribution<double> u(-limit, limit);
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index i = 0; i < out; ++i)
            for (Eigen::Index j = 0; j < in; ++j) w(i, j) = u(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
}

Eigen::MatrixXd forward(const MlpModel& net, const Eigen::MatrixXd& x) { return run(net, x, nullptr); }

double loss_and_gradient(const MlpModel& net, const Eigen::MatrixXd& x, std::span<const int> y, double l2,
                         MlpModel* grad) {
    Trace trace;
    const Eigen::MatrixXd p = run(net, x, &trace);
    const auto n = static_cast<double>(x.rows());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        loss -= std::log(std::max(p(i, y[static_cast<std::size_t>(i)]), 1e-300));
    loss /= n;
    for (const auto& w : net.weights) loss += 0.5 * l2 * w.squaredNorm();
    if (!grad) return loss;

    const std::size_t layers = net.weights.size();
    grad->weights.resize(layers);
    grad->biases.resize(layers);
    Eigen::MatrixXd dz = p;
    for (Eigen::Index i = 0; i < x.rows(); ++i) dz(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    dz /= n;
    for (std::size_t l = layers; l-- > 0;) {
        grad->weights[l] = dz.transpose() * trace.act[l] + l2 * net.weights[l];
        grad->biases[l] = dz.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd da = dz * net.weights[l];
            dz = (trace.act[l].array() > 0.0).select(da, 0.0);
        }
    }
    return loss;
}

} // namespace mlp

namespace detail {

MlpModel fit_mlp(const ModelSpec& spec, const Matrix& x, std::span<const int> y, int classes) {
    std::vector<int> sizes{static_cast<int>(x.cols)};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(classes);
    Rng init_rng = make_rng(spec.seed, "mlp-init");
    Rng order_rng = make_rng(spec.seed, "mlp-shuffle");
    MlpModel net = mlp::init(sizes, init_rng);

    MlpModel velocity;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        velocity.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        velocity.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }

    const auto xe = as_eigen(x);
    const std::size_t n = x.rows;
    const auto batch = static_cast<std::size_t>(spec.batch_size);
    const double lr = *spec.learning_rate;
    const double l2 = *spec.l2;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Eigen::MatrixXd xb;
    std::vector<int> yb;
    MlpModel grad;
    for (int epoch = 0; epoch < *spec.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            xb.resize(static_cast<Eigen::Index>(end - start), xe.cols());
            yb.resize(end - start);
            for (std::size_t i = start; i < end; ++i) {
                xb.row(static_cast<Eigen::Index>(i - start)) = xe.row(static_cast<Eigen::Index>(order[i]));
                yb[i - start] = y[order[i]];
            }
            mlp::loss_and_gradient(net, xb, yb, l2, &grad);
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                velocity.weights[l] = spec.momentum * velocity.weights[l] - lr * grad.weights[l];
                velocity.biases[l] = spec.momentum * velocity.biases[l] - lr * grad.biases[l];
                net.weights[l] += velocity.weights[l];
                net.biases[l] += velocity.biases[l];
            }
        }
    }
    return net;
}

void mlp_scores(const MlpModel& m, std::span<const double> x, std::span<double> out) {
    const Eigen::MatrixXd row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::MatrixXd p = mlp::forward(m, row);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = p(0, static_cast<Eigen::Index>(c));
}

} // namespace detail

} // namespace airshadow
