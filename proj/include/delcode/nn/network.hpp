#pragma once

#include "delcode/nn/batchnorm.hpp"
#include "delcode/nn/gru.hpp"
#include "delcode/nn/mlp.hpp"

namespace delcode::nn {

struct NetConfig {
    int in_dim = 2;
    int layers = 2;
    int hidden = 64;
    std::vector<int> mlp{32, 1};
    bool gru_bias = false;
    Activation hidden_act = Activation::Relu;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    void validate() const;
    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// One bidirectional GRU layer: forward and backward scans of the same input,
/// outputs stacked as [h_fwd; h_bwd].
template <typename S>
struct BiGruLayer {
    GruCell<S> fwd, bwd;
};

template <typename S>
Mat<S> bigru_layer_forward(const BiGruLayer<S>& layer, const SeqBatch<S>& x, GruTape<S>* tf, GruTape<S>* tb) {
    const int d = layer.fwd.hidden;
    Mat<S> out(2 * d, x.data.cols());
    out.topRows(d) = gru_scan(layer.fwd, x, false, tf);
    out.bottomRows(d) = gru_scan(layer.bwd, x, true, tb);
    return out;
}

/// Bidirectional GRU stack with batch-norm between layers and an MLP head
/// producing one logit per time step. sigmoid(logit) models P(bit = 1).
template <typename S>
class BiGruNet {
public:
    struct Tape {
        std::vector<SeqBatch<S>> layer_inputs;  // input of each GRU layer
        std::vector<GruTape<S>> fwd, bwd;
        std::vector<BatchNormTape<S>> bn;
        std::vector<Mat<S>> bn_inputs;
        MlpTape<S> head;
    };

    BiGruNet() = default;
    explicit BiGruNet(const NetConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        for (int l = 0; l < cfg.layers; ++l) {
            const int in = l == 0 ? cfg.in_dim : 2 * cfg.hidden;
            layers_.push_back({GruCell<S>(cfg.hidden, in, cfg.gru_bias), GruCell<S>(cfg.hidden, in, cfg.gru_bias)});
            if (l + 1 < cfg.layers)
                bns_.emplace_back(2 * cfg.hidden, cfg.bn_momentum, cfg.bn_eps);
        }
        head_ = Mlp<S>(2 * cfg.hidden, cfg.mlp, cfg.hidden_act);
    }
    BiGruNet(const NetConfig& cfg, std::uint64_t seed) : BiGruNet(cfg) { init(seed); }

    void init(std::uint64_t seed) {
        Rng rng(seed);
        for (auto& l : layers_) {
            l.fwd.init(rng);
            l.bwd.init(rng);
        }
        head_.init(rng);
    }

    const NetConfig& config() const { return cfg_; }
    std::vector<BiGruLayer<S>>& layers() { return layers_; }
    const std::vector<BiGruLayer<S>>& layers() const { return layers_; }
    std::vector<BatchNorm<S>>& batchnorms() { return bns_; }
    Mlp<S>& head() { return head_; }
    const Mlp<S>& head() const { return head_; }

    /// Same architecture, all trainable values zero; used as a gradient accumulator.
    BiGruNet zeros_like() const {
        BiGruNet g(cfg_);
        for (auto& p : g.parameters())
            p.value->setZero();
        return g;
    }

    std::vector<NamedTensor<S>> parameters() {
        std::vector<NamedTensor<S>> out;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            layers_[l].fwd.collect("gru" + std::to_string(l) + ".fwd", out);
            layers_[l].bwd.collect("gru" + std::to_string(l) + ".bwd", out);
            if (l < bns_.size())
                bns_[l].collect("bn" + std::to_string(l), out);
        }
        head_.collect("mlp", out);
        return out;
    }

    std::vector<NamedTensor<S>> buffers() {
        std::vector<NamedTensor<S>> out;
        for (std::size_t l = 0; l < bns_.size(); ++l)
            bns_[l].collect_buffers("bn" + std::to_string(l), out);
        return out;
    }

    std::vector<Mat<S>*> parameter_ptrs() {
        std::vector<Mat<S>*> out;
        for (auto& p : parameters())
            out.push_back(p.value);
        return out;
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto& p : parameters())
            n += static_cast<std::size_t>(p.value->size());
        return n;
    }

    /// Hidden representation before the head: 2*hidden x (T*B).
    Mat<S> features(const SeqBatch<S>& x, Mode mode, Tape* tape = nullptr, const Mat<S>* mask = nullptr) {
        if (x.features() != cfg_.in_dim)
            throw Error("network: input dimension " + std::to_string(x.features()) + " != " +
                        std::to_string(cfg_.in_dim));
        if (tape)
            *tape = Tape{};
        SeqBatch<S> cur = x;
        Mat<S> out;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            GruTape<S>* tf = nullptr;
            GruTape<S>* tb = nullptr;
            if (tape) {
                tape->layer_inputs.push_back(cur);
                tape->fwd.emplace_back();
                tape->bwd.emplace_back();
                tf = &tape->fwd.back();
                tb = &tape->bwd.back();
            }
            out = bigru_layer_forward(layers_[l], cur, tf, tb);
            if (l < bns_.size()) {
                BatchNormTape<S>* bt = nullptr;
                if (tape) {
                    tape->bn.emplace_back();
                    bt = &tape->bn.back();
                }
                out = batchnorm_forward(bns_[l], out, mode, bt, mask);
                cur = SeqBatch<S>(out, x.T, x.B);
            }
        }
        require_finite(out, "bigru stack");
        return out;
    }

    /// Logits, 1 x (T*B) (or out_dim x (T*B)).
    Mat<S> forward(const SeqBatch<S>& x, Mode mode, Tape* tape = nullptr, const Mat<S>* mask = nullptr) {
        const Mat<S> h = features(x, mode, tape, mask);
        Mat<S> logits = mlp_forward(head_, h, tape ? &tape->head : nullptr);
        require_finite(logits, "mlp head");
        return logits;
    }

    /// Accumulates gradients for dloss/dlogits into `g`; returns dloss/dinput.
    Mat<S> backward(const Tape& tape, const Mat<S>& dlogits, BiGruNet& g) const {
        Mat<S> d = mlp_backward(head_, tape.head, dlogits, g.head_);
        const int hdim = cfg_.hidden;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            if (l < bns_.size())
                d = batchnorm_backward(bns_[l], tape.bn[l], d, g.bns_[l]);
            const auto& xin = tape.layer_inputs[l];
            const Mat<S> dtop = d.topRows(hdim);
            const Mat<S> dbot = d.bottomRows(hdim);
            Mat<S> dx = gru_scan_backward(layers_[l].fwd, xin, false, tape.fwd[l], dtop, g.layers_[l].fwd);
            dx += gru_scan_backward(layers_[l].bwd, xin, true, tape.bwd[l], dbot, g.layers_[l].bwd);
            d = std::move(dx);
        }
        require_finite(d, "backward");
        return d;
    }

    template <typename T>
    BiGruNet<T> cast() const {
        BiGruNet<T> out(cfg_);
        auto& self = const_cast<BiGruNet&>(*this);
        auto src = self.parameters();
        auto dst = out.parameters();
        for (std::size_t i = 0; i < src.size(); ++i)
            *dst[i].value = src[i].value->template cast<T>();
        auto sb = self.buffers();
        auto db = out.buffers();
        for (std::size_t i = 0; i < sb.size(); ++i)
            *db[i].value = sb[i].value->template cast<T>();
        return out;
    }

private:
    NetConfig cfg_;
    std::vector<BiGruLayer<S>> layers_;
    std::vector<BatchNorm<S>> bns_;
    Mlp<S> head_;
};

}  // namespace delcode::nn
