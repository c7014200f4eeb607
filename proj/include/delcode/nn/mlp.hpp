#pragma once

#include "delcode/nn/tensor.hpp"

namespace delcode::nn {

/// Dense layers dims[0] .. dims.back(); hidden layers use `hidden_act`, the
/// last layer is linear and yields logits (the sigmoid is applied by callers).
template <typename S>
struct Mlp {
    std::vector<Mat<S>> W, b;
    Activation hidden_act = Activation::Relu;

    Mlp() = default;
    Mlp(int in, const std::vector<int>& dims, Activation act) : hidden_act(act) {
        int prev = in;
        for (int d : dims) {
            if (d <= 0)
                throw Error("mlp: layer widths must be positive");
            W.push_back(Mat<S>::Zero(d, prev));
            b.push_back(Mat<S>::Zero(d, 1));
            prev = d;
        }
    }

    int out_dim() const { return W.empty() ? 0 : static_cast<int>(W.back().rows()); }

    void init(Rng& rng) {
        for (std::size_t l = 0; l < W.size(); ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(W[l].cols()));
            fill_uniform(W[l], bound, rng);
            fill_uniform(b[l], bound, rng);
        }
    }

    void collect(const std::string& prefix, std::vector<NamedTensor<S>>& out) {
        for (std::size_t l = 0; l < W.size(); ++l) {
            out.push_back({prefix + "." + std::to_string(l) + ".W", &W[l]});
            out.push_back({prefix + "." + std::to_string(l) + ".b", &b[l]});
        }
    }
};

template <typename S>
struct MlpTape {
    std::vector<Mat<S>> inputs;  // input to each layer
    std::vector<Mat<S>> outputs;  // post-activation output of each layer
};

template <typename S>
Mat<S> mlp_forward(const Mlp<S>& mlp, const Mat<S>& x, MlpTape<S>* tape) {
    Mat<S> a = x;
    for (std::size_t l = 0; l < mlp.W.size(); ++l) {
        if (a.rows() != mlp.W[l].cols())
            throw Error("mlp: input dimension mismatch");
        if (tape)
            tape->inputs.push_back(a);
        Mat<S> z = mlp.W[l] * a;
        z.colwise() += mlp.b[l].col(0);
        if (l + 1 < mlp.W.size())
            apply_activation(mlp.hidden_act, z);
        if (tape)
            tape->outputs.push_back(z);
        a = std::move(z);
    }
    return a;
}

template <typename S>
Mat<S> mlp_backward(const Mlp<S>& mlp, const MlpTape<S>& tape, const Mat<S>& dout, Mlp<S>& g) {
    Mat<S> d = dout;
    for (std::size_t l = mlp.W.size(); l-- > 0;) {
        if (l + 1 < mlp.W.size())
            activation_backward(mlp.hidden_act, tape.outputs[l], d);
        g.W[l].noalias() += d * tape.inputs[l].transpose();
        g.b[l] += d.rowwise().sum();
        Mat<S> dn = mlp.W[l].transpose() * d;
        d = std::move(dn);
    }
    return d;
}

}  // namespace delcode::nn
