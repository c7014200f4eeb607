#pragma once

#include <concepts>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "delcode/common.hpp"

namespace delcode::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Mode { Train, Eval };
enum class Activation { Relu, Tanh, Identity };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

/// A batch of equal-length sequences laid out as features x (T*B); columns
/// t*B .. t*B+B-1 hold time step t.
template <typename S>
struct SeqBatch {
    Mat<S> data;
    int T = 0;
    int B = 0;

    SeqBatch() = default;
    SeqBatch(int features, int T_, int B_) : data(Mat<S>::Zero(features, T_ * B_)), T(T_), B(B_) {}
    SeqBatch(Mat<S> d, int T_, int B_) : data(std::move(d)), T(T_), B(B_) {}

    int features() const { return static_cast<int>(data.rows()); }
    auto step(int t) { return data.middleCols(t * B, B); }
    auto step(int t) const { return data.middleCols(t * B, B); }
};

class NumericError : public Error {
public:
    using Error::Error;
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* where) {
    if (!m.allFinite())
        throw NumericError(std::string("non-finite value in ") + where);
}

template <std::floating_point S>
S sigmoid(S x) {
    return x >= S(0) ? S(1) / (S(1) + std::exp(-x)) : std::exp(x) / (S(1) + std::exp(x));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return x.unaryExpr([](S v) { return sigmoid(v); });
}

template <typename S>
void apply_activation(Activation a, Mat<S>& x) {
    switch (a) {
        case Activation::Relu:
            x = x.cwiseMax(S(0));
            break;
        case Activation::Tanh:
            x = x.array().tanh().matrix();
            break;
        case Activation::Identity:
            break;
    }
}

/// Multiplies `grad` in place by the activation derivative, given the
/// activation's output `y`.
template <typename S>
void activation_backward(Activation a, const Mat<S>& y, Mat<S>& grad) {
    switch (a) {
        case Activation::Relu:
            grad = (y.array() > S(0)).select(grad, S(0));
            break;
        case Activation::Tanh:
            grad = (grad.array() * (S(1) - y.array().square())).matrix();
            break;
        case Activation::Identity:
            break;
    }
}

/// Uniform in [-bound, bound) from the artifact RNG.
template <typename S>
void fill_uniform(Mat<S>& m, double bound, Rng& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
}

/// Named reference to a trainable matrix or a buffer.
template <typename S>
struct NamedTensor {
    std::string name;
    Mat<S>* value;
};

}  // namespace delcode::nn
