#pragma once

#include "delcode/nn/tensor.hpp"

namespace delcode::nn {

enum class LossKind { Mse, Bce };

LossKind parse_loss(const std::string& s);
std::string to_string(LossKind k);

/// Probabilities at or below this are clamped inside the BCE logarithms.
inline constexpr double kBceEpsilon = 1e-7;

template <typename S>
struct LossResult {
    S value = S(0);
    Mat<S> dlogits;  ///< d value / d logit, same shape as the logits
};

/// Mean loss between sigmoid(logits) and labels in {0,1}; `weight` (optional,
/// same shape, 0/1) restricts the mean to selected entries.
template <typename S>
LossResult<S> loss_from_logits(const Mat<S>& logits, const Mat<S>& labels, LossKind kind,
                               const Mat<S>* weight = nullptr) {
    if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
        throw Error("loss: shape mismatch");
    if (weight && (weight->rows() != logits.rows() || weight->cols() != logits.cols()))
        throw Error("loss: weight shape mismatch");
    const S count = weight ? weight->sum() : static_cast<S>(logits.size());
    if (!(count > S(0)))
        throw Error("loss: no entries selected");
    LossResult<S> res;
    res.dlogits.resize(logits.rows(), logits.cols());
    const S eps = static_cast<S>(kBceEpsilon);
    S total = S(0);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const S w = weight ? (*weight)(i, j) : S(1);
            const S p = sigmoid(logits(i, j));
            const S y = labels(i, j);
            S l = S(0), g = S(0);
            if (kind == LossKind::Mse) {
                l = (p - y) * (p - y);
                g = S(2) * (p - y) * p * (S(1) - p);
            } else {
                // Exact derivative of the clamped expression w.r.t. the logit.
                const S q = S(1) - p;
                if (p > eps) {
                    l -= y * std::log(p);
                    g -= y * q;
                } else {
                    l -= y * std::log(eps);
                }
                if (q > eps) {
                    l -= (S(1) - y) * std::log(q);
                    g += (S(1) - y) * p;
                } else {
                    l -= (S(1) - y) * std::log(eps);
                }
            }
            total += w * l;
            res.dlogits(i, j) = w * g / count;
        }
    }
    res.value = total / count;
    return res;
}

/// Mean loss on probabilities directly.
template <typename S>
S loss_from_probabilities(const Mat<S>& p, const Mat<S>& labels, LossKind kind) {
    if (p.rows() != labels.rows() || p.cols() != labels.cols())
        throw Error("loss: shape mismatch");
    const S eps = static_cast<S>(kBceEpsilon);
    if (kind == LossKind::Mse)
        return (p - labels).array().square().mean();
    const auto lp = p.array().max(eps).log();
    const auto lq = (S(1) - p.array()).max(eps).log();
    return -(labels.array() * lp + (S(1) - labels.array()) * lq).mean();
}

}  // namespace delcode::nn
