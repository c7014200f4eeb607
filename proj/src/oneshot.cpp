#include "delcode/oneshot.hpp"

namespace delcode {

template <typename S>
nn::Mat<S> llr_pair_features(std::span<const double> lstar) {
    if (lstar.size() % 2 != 0)
        throw Error("one-shot decoder: L* length must be even, got " + std::to_string(lstar.size()));
    const auto k = static_cast<Eigen::Index>(lstar.size() / 2);
    nn::Mat<S> x(2, k);
    for (Eigen::Index t = 0; t < k; ++t) {
        x(0, t) = static_cast<S>(lstar[static_cast<std::size_t>(2 * t)]);
        x(1, t) = static_cast<S>(lstar[static_cast<std::size_t>(2 * t + 1)]);
    }
    return x;
}

template nn::Mat<float> llr_pair_features<float>(std::span<const double>);
template nn::Mat<double> llr_pair_features<double>(std::span<const double>);

OneShotDecoder::OneShotDecoder(nn::NetConfig net, std::uint64_t seed) : net_([&] {
    net.in_dim = 2;
    return nn::BiGruNet<float>(net, seed);
}()) {
    if (net_.head().out_dim() != 1)
        throw Error("one-shot decoder: MLP head must end in width 1");
}

OneShotDecoder::OneShotDecoder(nn::BiGruNet<float> net) : net_(std::move(net)) {
    if (net_.config().in_dim != 2 || net_.head().out_dim() != 1)
        throw Error("one-shot decoder: network must take 2 inputs and emit 1 logit");
}

nn::Mat<float> OneShotDecoder::logits(const std::vector<LlrSeq>& lstars, std::size_t& k) const {
    if (lstars.empty())
        throw Error("one-shot decoder: empty batch");
    const std::size_t n = lstars.front().size();
    if (n % 2 != 0)
        throw Error("one-shot decoder: L* length must be even, got " + std::to_string(n));
    k = n / 2;
    const int B = static_cast<int>(lstars.size());
    nn::SeqBatch<float> x(2, static_cast<int>(k), B);
    for (int b = 0; b < B; ++b) {
        const auto& l = lstars[static_cast<std::size_t>(b)];
        require_length("one-shot decoder batch", n, l.size());
        for (std::size_t t = 0; t < k; ++t) {
            x.data(0, static_cast<Eigen::Index>(t) * B + b) = static_cast<float>(l[2 * t]);
            x.data(1, static_cast<Eigen::Index>(t) * B + b) = static_cast<float>(l[2 * t + 1]);
        }
    }
    return net_.forward(x, nn::Mode::Eval);
}

std::vector<double> OneShotDecoder::probabilities(std::span<const double> lstar) const {
    std::size_t k;
    const auto a = logits({LlrSeq(lstar.begin(), lstar.end())}, k);
    std::vector<double> p(k);
    for (std::size_t t = 0; t < k; ++t)
        p[t] = nn::sigmoid(static_cast<double>(a(0, static_cast<Eigen::Index>(t))));
    return p;
}

BitSeq OneShotDecoder::decode_messages(std::span<const double> lstar) const {
    return decode_batch({LlrSeq(lstar.begin(), lstar.end())}).front();
}

std::vector<BitSeq> OneShotDecoder::decode_batch(const std::vector<LlrSeq>& lstars) const {
    std::size_t k;
    const auto a = logits(lstars, k);
    const int B = static_cast<int>(lstars.size());
    std::vector<BitSeq> out(lstars.size(), BitSeq(k));
    // p > 1/2 exactly when the logit is positive; a zero logit decides 0.
    for (std::size_t t = 0; t < k; ++t)
        for (int b = 0; b < B; ++b)
            out[static_cast<std::size_t>(b)][t] = a(0, static_cast<Eigen::Index>(t) * B + b) > 0.0f ? 1 : 0;
    return out;
}

nn::Checkpoint OneShotDecoder::to_checkpoint() const {
    nn::Checkpoint ck;
    ck.kind = "decoder";
    ck.net = net_.config();
    ck.model = net_;
    return ck;
}

OneShotDecoder OneShotDecoder::from_checkpoint(const nn::Checkpoint& ck) {
    if (ck.kind != "decoder")
        throw Error("checkpoint kind '" + ck.kind + "' is not a decoder");
    return OneShotDecoder(ck.model);
}

OneShotDecoder train_decoder(const DecoderConfig& cfg, const FrameLayout& layout, const Detector& source,
                             std::uint64_t seed, TrainTrace* trace, const StepCallback& on_step) {
    if (layout.outer.kind() != OuterKind::Conv)
        throw Error("train_decoder: one-shot decoding requires the convolutional outer code");
    if (cfg.batch <= 0)
        throw Error("train_decoder: batch must be positive");
    cfg.channel.validate();
    OneShotDecoder dec(cfg.net, derive_seed(seed, ~0ULL));
    auto& net = dec.net();
    auto grads = net.zeros_like();
    auto params = net.parameter_ptrs();
    auto gptrs = grads.parameter_ptrs();
    nn::Adam<float> opt(cfg.optim);
    const int B = cfg.batch;
    const int k = static_cast<int>(layout.k());
    nn::SeqBatch<float> x(2, k, B);
    nn::Mat<float> labels(1, k * B);
    nn::BiGruNet<float>::Tape tape;

    for (long step = 0; step < cfg.steps; ++step) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(step)));
        std::vector<BitSeq> ys, messages;
        std::vector<ChannelParams> truth;
        for (int b = 0; b < B; ++b) {
            auto frame = random_frame(layout, rng);
            const auto ch = cfg.channel.sample(rng);
            ys.push_back(transmit(frame.transmitted, ch, rng));
            truth.push_back(ch);
            messages.push_back(std::move(frame.message));
        }
        const auto llrs = source.detect_batch(ys, layout, truth);
        for (int b = 0; b < B; ++b) {
            const auto lstar = outer_llrs(layout, llrs[static_cast<std::size_t>(b)]);
            for (int t = 0; t < k; ++t) {
                x.data(0, t * B + b) = static_cast<float>(lstar[static_cast<std::size_t>(2 * t)]);
                x.data(1, t * B + b) = static_cast<float>(lstar[static_cast<std::size_t>(2 * t + 1)]);
                labels(0, t * B + b) = static_cast<float>(messages[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)]);
            }
        }
        const auto logits = net.forward(x, nn::Mode::Train, &tape);
        const auto loss = nn::loss_from_logits<float>(logits, labels, nn::LossKind::Bce);
        if (!std::isfinite(loss.value))
            throw nn::NumericError("train_decoder: loss diverged at step " + std::to_string(step));
        for (auto* g : gptrs)
            g->setZero();
        net.backward(tape, loss.dlogits, grads);
        opt.step(params, gptrs);
        if (trace)
            trace->loss.push_back(loss.value);
        if (on_step)
            on_step(step, loss.value);
    }
    return dec;
}

}  // namespace delcode
