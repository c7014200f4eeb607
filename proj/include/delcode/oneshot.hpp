#pragma once

#include "delcode/detector.hpp"

namespace delcode {

/// 2 x k matrix whose column t is (L*_{2t}, L*_{2t+1}).
template <typename S = float>
nn::Mat<S> llr_pair_features(std::span<const double> lstar);

struct DecoderConfig {
    nn::NetConfig net = [] {
        nn::NetConfig c;
        c.in_dim = 2;
        c.layers = 2;
        c.hidden = 400;
        c.mlp = {32, 1};
        return c;
    }();
    long steps = 5000;
    int batch = 16;
    nn::OptimConfig optim = [] {
        nn::OptimConfig o;
        o.base_lr = 3e-4;
        return o;
    }();
    ChannelDistribution channel = ChannelDistribution::fixed(0.0, 0.0);
};

/// BI-GRU outer decoder for the rate-1/2 convolutional code: one step per
/// message bit, fed the two LLRs of that step's code symbols.
class OneShotDecoder {
public:
    OneShotDecoder(nn::NetConfig net, std::uint64_t seed);
    explicit OneShotDecoder(nn::BiGruNet<float> net);

    nn::BiGruNet<float>& net() { return net_; }
    const nn::BiGruNet<float>& net() const { return net_; }

    /// P(m_t = 1) per message bit.
    std::vector<double> probabilities(std::span<const double> lstar) const;
    /// m_t = 1 iff P(m_t = 1) > 1/2.
    BitSeq decode_messages(std::span<const double> lstar) const;
    std::vector<BitSeq> decode_batch(const std::vector<LlrSeq>& lstars) const;

    nn::Checkpoint to_checkpoint() const;
    static OneShotDecoder from_checkpoint(const nn::Checkpoint& ckpt);

private:
    nn::Mat<float> logits(const std::vector<LlrSeq>& lstars, std::size_t& k) const;
    mutable nn::BiGruNet<float> net_;
};

/// Trains on L* produced by `source` from simulated channel outputs, with
/// message bits as BCE targets. The source is never modified.
OneShotDecoder train_decoder(const DecoderConfig& cfg, const FrameLayout& layout, const Detector& source,
                             std::uint64_t seed, TrainTrace* trace = nullptr, const StepCallback& on_step = {});

}  // namespace delcode
