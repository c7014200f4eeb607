#pragma once

#include "delcode/nn/tensor.hpp"

namespace delcode::nn {

/// Per-feature normalisation over all batch x time columns.
/// Running variance uses the unbiased estimate; normalisation uses the biased one.
template <typename S>
struct BatchNorm {
    int features = 0;
    double momentum = 0.1;
    double eps = 1e-5;
    Mat<S> gamma, beta;               // features x 1, trainable
    Mat<S> running_mean, running_var;  // features x 1, buffers

    BatchNorm() = default;
    BatchNorm(int f, double momentum_ = 0.1, double eps_ = 1e-5)
        : features(f),
          momentum(momentum_),
          eps(eps_),
          gamma(Mat<S>::Ones(f, 1)),
          beta(Mat<S>::Zero(f, 1)),
          running_mean(Mat<S>::Zero(f, 1)),
          running_var(Mat<S>::Ones(f, 1)) {}

    void collect(const std::string& prefix, std::vector<NamedTensor<S>>& out) {
        out.push_back({prefix + ".gamma", &gamma});
        out.push_back({prefix + ".beta", &beta});
    }
    void collect_buffers(const std::string& prefix, std::vector<NamedTensor<S>>& out) {
        out.push_back({prefix + ".running_mean", &running_mean});
        out.push_back({prefix + ".running_var", &running_var});
    }
};

template <typename S>
struct BatchNormTape {
    Mat<S> xhat;
    Mat<S> inv_std;  // features x 1
    Mat<S> weight;   // 1 x cols, 0/1 column mask (empty = all ones)
    S total = S(0);
};

/// `weight` (optional, 1 x cols) excludes columns from the statistics.
template <typename S>
Mat<S> batchnorm_forward(BatchNorm<S>& bn, const Mat<S>& x, Mode mode, BatchNormTape<S>* tape,
                         const Mat<S>* weight = nullptr) {
    if (x.rows() != bn.features)
        throw Error("batchnorm: feature mismatch");
    Mat<S> mean, var;
    if (mode == Mode::Train) {
        S total;
        if (weight) {
            total = weight->sum();
            if (!(total > S(0)))
                throw Error("batchnorm: empty mask");
            mean = (x * weight->transpose()) / total;
            const Mat<S> centred = x.colwise() - mean.col(0);
            var = (centred.array().square().matrix() * weight->transpose()) / total;
        } else {
            total = static_cast<S>(x.cols());
            mean = x.rowwise().mean();
            var = (x.colwise() - mean.col(0)).array().square().rowwise().mean().matrix();
        }
        const S m = static_cast<S>(bn.momentum);
        const S unbias = total > S(1) ? total / (total - S(1)) : S(1);
        bn.running_mean = (S(1) - m) * bn.running_mean + m * mean;
        bn.running_var = (S(1) - m) * bn.running_var + m * unbias * var;
        if (tape) {
            tape->total = total;
            tape->weight = weight ? *weight : Mat<S>();
        }
    } else {
        mean = bn.running_mean;
        var = bn.running_var;
    }
    const Mat<S> inv_std = (var.array() + static_cast<S>(bn.eps)).rsqrt().matrix();
    Mat<S> xhat = ((x.colwise() - mean.col(0)).array().colwise() * inv_std.col(0).array()).matrix();
    Mat<S> y = (xhat.array().colwise() * bn.gamma.col(0).array()).matrix();
    y.colwise() += bn.beta.col(0);
    if (tape) {
        tape->xhat = std::move(xhat);
        tape->inv_std = inv_std;
    }
    return y;
}

/// Train-mode backward.
template <typename S>
Mat<S> batchnorm_backward(const BatchNorm<S>& bn, const BatchNormTape<S>& tape, const Mat<S>& dy,
                          BatchNorm<S>& g) {
    g.gamma += dy.cwiseProduct(tape.xhat).rowwise().sum();
    g.beta += dy.rowwise().sum();
    const Mat<S> dxhat = (dy.array().colwise() * bn.gamma.col(0).array()).matrix();
    Mat<S> dx;
    if (tape.weight.size() == 0) {
        const Mat<S> mean_d = dxhat.rowwise().mean();
        const Mat<S> mean_dx = dxhat.cwiseProduct(tape.xhat).rowwise().mean();
        dx = ((dxhat.colwise() - mean_d.col(0)) - (tape.xhat.array().colwise() * mean_dx.col(0).array()).matrix());
    } else {
        const Mat<S> mean_d = dxhat.rowwise().sum() / tape.total;
        const Mat<S> mean_dx = dxhat.cwiseProduct(tape.xhat).rowwise().sum() / tape.total;
        dx = dxhat - (mean_d * tape.weight) -
             ((tape.xhat.array().colwise() * mean_dx.col(0).array()).rowwise() * tape.weight.row(0).array())
                 .matrix();
    }
    return (dx.array().colwise() * tape.inv_std.col(0).array()).matrix();
}

}  // namespace delcode::nn
