#pragma once

#include "delcode/nn/tensor.hpp"

namespace delcode::nn {

enum class ClipMode { GlobalNorm, Value, None };

struct OptimConfig {
    double base_lr = 1e-3;
    double decay = 1.0;       ///< D: multiplicative decay per interval
    long decay_interval = 0;  ///< S: steps per decay; 0 disables decay
    double clip = 0.1;
    ClipMode clip_mode = ClipMode::GlobalNorm;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    /// Staircase schedule lr(step) = base_lr * D^floor(step / S).
    double lr_at(long step) const {
        if (decay_interval <= 0)
            return base_lr;
        return base_lr * std::pow(decay, static_cast<double>(step / decay_interval));
    }
};

ClipMode parse_clip_mode(const std::string& s);

template <typename S>
S global_norm(const std::vector<Mat<S>*>& grads) {
    S sq = S(0);
    for (auto* g : grads)
        sq += g->squaredNorm();
    return std::sqrt(sq);
}

/// Scales gradients so their global norm is min(norm, threshold). Returns the
/// pre-clip norm.
template <typename S>
S clip_global_norm(const std::vector<Mat<S>*>& grads, double threshold) {
    const S norm = global_norm(grads);
    if (norm > static_cast<S>(threshold) && norm > S(0)) {
        const S scale = static_cast<S>(threshold) / norm;
        for (auto* g : grads)
            *g *= scale;
    }
    return norm;
}

template <typename S>
void clip_value(const std::vector<Mat<S>*>& grads, double threshold) {
    const S t = static_cast<S>(threshold);
    for (auto* g : grads)
        *g = g->cwiseMax(-t).cwiseMin(t);
}

/// Adam with bias correction, preceded by gradient clipping.
template <typename S>
class Adam {
public:
    explicit Adam(OptimConfig cfg) : cfg_(cfg) {
        if (!(cfg.decay > 0.0 && cfg.decay <= 1.0))
            throw Error("adam: decay must lie in (0, 1]");
    }

    const OptimConfig& config() const { return cfg_; }
    long step_count() const { return step_; }
    double current_lr() const { return cfg_.lr_at(step_); }

    /// Returns the pre-clip gradient norm.
    S step(const std::vector<Mat<S>*>& params, const std::vector<Mat<S>*>& grads) {
        if (params.size() != grads.size())
            throw Error("adam: parameter/gradient count mismatch");
        if (m_.empty()) {
            for (auto* p : params) {
                m_.push_back(Mat<S>::Zero(p->rows(), p->cols()));
                v_.push_back(Mat<S>::Zero(p->rows(), p->cols()));
            }
        }
        const S norm = global_norm(grads);
        if (!std::isfinite(static_cast<double>(norm)))
            throw NumericError("adam: non-finite gradient");
        if (cfg_.clip_mode == ClipMode::GlobalNorm)
            clip_global_norm(grads, cfg_.clip);
        else if (cfg_.clip_mode == ClipMode::Value)
            clip_value(grads, cfg_.clip);

        const double lr = cfg_.lr_at(step_);
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
        const S step_size = static_cast<S>(lr / bc1);
        const S inv_bc2 = static_cast<S>(1.0 / bc2);
        const S eps = static_cast<S>(cfg_.eps);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (S(1) - b1) * *grads[i];
            v_[i] = b2 * v_[i] + (S(1) - b2) * grads[i]->cwiseProduct(*grads[i]);
            params[i]->array() -= step_size * m_[i].array() / ((v_[i].array() * inv_bc2).sqrt() + eps);
        }
        return norm;
    }

private:
    OptimConfig cfg_;
    long step_ = 0;
    std::vector<Mat<S>> m_, v_;
};

}  // namespace delcode::nn
