#pragma once

#include <functional>

#include "delcode/frame.hpp"
#include "delcode/nn/adam.hpp"
#include "delcode/nn/checkpoint.hpp"
#include "delcode/nn/loss.hpp"

namespace delcode {

/// How the received bits are presented to the network at each time step.
/// Both modes first map y -> 1 - 2y and append T - R zeros.
///  - PairWindow: step t sees (y~_t, y~_{t+1}), y~_{T+1} = 0.
///  - CausalPrefix: step t sees (y~_1 .. y~_t) right-padded with zeros to T.
enum class FeatureMode { PairWindow, CausalPrefix };

FeatureMode parse_feature_mode(const std::string& s);
std::string to_string(FeatureMode m);
int feature_dim(FeatureMode mode, std::size_t T);

/// in_dim x T feature matrix.
template <typename S = float>
nn::Mat<S> featurize(std::span<const std::uint8_t> y, std::size_t T, FeatureMode mode);

/// Writes the features of sample `b` into a batch with batch size x.B.
template <typename S>
void featurize_into(std::span<const std::uint8_t> y, std::size_t T, FeatureMode mode, nn::SeqBatch<S>& x, int b);

/// log((1 - p) / p) clipped to +-clip.
double llr_from_probability(double p, double clip);
/// For p = sigmoid(a) the LLR is exactly -a.
inline double llr_from_logit(double a, double clip) { return std::clamp(-a, -clip, clip); }

struct EstimatorConfig {
    FeatureMode features = FeatureMode::PairWindow;
    nn::NetConfig net;  ///< in_dim is derived from features and T
    nn::LossKind loss = nn::LossKind::Bce;
    double llr_clip = 10.0;
    long steps = 2000;
    int batch = 16;
    nn::OptimConfig optim;
    ChannelDistribution channel = ChannelDistribution::fixed(0.05, 0.0);
    /// Exclude zero-padded steps from batch-norm statistics and the loss.
    bool mask_padding = false;
};

/// BI-GRU estimator for the bits of a marker-coded frame of fixed length T.
class LlrEstimator {
public:
    LlrEstimator(nn::NetConfig net, FeatureMode features, std::size_t T, double llr_clip, std::uint64_t seed);
    LlrEstimator(nn::BiGruNet<float> net, FeatureMode features, std::size_t T, double llr_clip);

    std::size_t T() const { return T_; }
    FeatureMode feature_mode() const { return features_; }
    double llr_clip() const { return clip_; }
    nn::BiGruNet<float>& net() { return net_; }
    const nn::BiGruNet<float>& net() const { return net_; }

    /// P(x_t = 1 | y) for each t.
    std::vector<double> probabilities(std::span<const std::uint8_t> y) const;
    /// Clipped LLRs, always length T.
    LlrSeq estimate_llrs(std::span<const std::uint8_t> y) const;
    std::vector<LlrSeq> estimate_batch(const std::vector<BitSeq>& ys) const;

    nn::Checkpoint to_checkpoint() const;
    static LlrEstimator from_checkpoint(const nn::Checkpoint& ckpt);

private:
    nn::Mat<float> logits(const std::vector<BitSeq>& ys) const;

    mutable nn::BiGruNet<float> net_;  // eval-mode forward does not touch state
    FeatureMode features_;
    std::size_t T_;
    double clip_;
};

struct TrainTrace {
    std::vector<double> loss;  ///< one value per optimiser step
};

using StepCallback = std::function<void(long step, double loss)>;

/// Supervised training on freshly simulated mini-batches: random messages are
/// outer-encoded, interleaved and marker-coded (labels x), sent over the
/// channel, and featurised (inputs). Deterministic for a given seed.
LlrEstimator train_estimator(const EstimatorConfig& cfg, const FrameLayout& layout, std::uint64_t seed,
                             TrainTrace* trace = nullptr, const StepCallback& on_step = {});

/// Continues training an existing estimator.
void train_estimator(LlrEstimator& est, const EstimatorConfig& cfg, const FrameLayout& layout, std::uint64_t seed,
                     TrainTrace* trace = nullptr, const StepCallback& on_step = {});

}  // namespace delcode
