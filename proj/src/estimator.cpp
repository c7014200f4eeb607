#include "delcode/estimator.hpp"

#include <sstream>

namespace delcode {

FeatureMode parse_feature_mode(const std::string& s) {
    if (s == "pair-window" || s == "pair")
        return FeatureMode::PairWindow;
    if (s == "causal-prefix" || s == "prefix")
        return FeatureMode::CausalPrefix;
    throw Error("unknown feature mode '" + s + "'");
}

std::string to_string(FeatureMode m) { return m == FeatureMode::PairWindow ? "pair-window" : "causal-prefix"; }

int feature_dim(FeatureMode mode, std::size_t T) {
    return mode == FeatureMode::PairWindow ? 2 : static_cast<int>(T);
}

template <typename S>
void featurize_into(std::span<const std::uint8_t> y, std::size_t T, FeatureMode mode, nn::SeqBatch<S>& x, int b) {
    if (y.size() > T)
        throw Error("featurize: received length " + std::to_string(y.size()) + " exceeds T = " + std::to_string(T));
    if (x.T != static_cast<int>(T) || x.features() != feature_dim(mode, T) || b < 0 || b >= x.B)
        throw Error("featurize: batch shape mismatch");
    const std::size_t R = y.size();
    auto signal = [&](std::size_t t) -> S { return t < R ? S(1) - S(2) * static_cast<S>(y[t]) : S(0); };
    for (std::size_t t = 0; t < T; ++t) {
        auto col = x.data.col(static_cast<Eigen::Index>(t) * x.B + b);
        col.setZero();
        if (mode == FeatureMode::PairWindow) {
            col(0) = signal(t);
            col(1) = t + 1 < T ? signal(t + 1) : S(0);
        } else {
            for (std::size_t j = 0; j <= t && j < R; ++j)
                col(static_cast<Eigen::Index>(j)) = signal(j);
        }
    }
}

template <typename S>
nn::Mat<S> featurize(std::span<const std::uint8_t> y, std::size_t T, FeatureMode mode) {
    nn::SeqBatch<S> x(feature_dim(mode, T), static_cast<int>(T), 1);
    featurize_into(y, T, mode, x, 0);
    return x.data;
}

template nn::Mat<float> featurize<float>(std::span<const std::uint8_t>, std::size_t, FeatureMode);
template nn::Mat<double> featurize<double>(std::span<const std::uint8_t>, std::size_t, FeatureMode);
template void featurize_into<float>(std::span<const std::uint8_t>, std::size_t, FeatureMode, nn::SeqBatch<float>&,
                                    int);
template void featurize_into<double>(std::span<const std::uint8_t>, std::size_t, FeatureMode,
                                     nn::SeqBatch<double>&, int);

double llr_from_probability(double p, double clip) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error("llr_from_probability: p outside [0, 1]");
    double l;
    if (p <= 0.0)
        l = std::numeric_limits<double>::infinity();
    else if (p >= 1.0)
        l = -std::numeric_limits<double>::infinity();
    else
        l = std::log1p(-p) - std::log(p);
    return std::clamp(l, -clip, clip);
}

namespace {

nn::NetConfig with_input(nn::NetConfig net, FeatureMode mode, std::size_t T) {
    net.in_dim = feature_dim(mode, T);
    return net;
}

}  // namespace

LlrEstimator::LlrEstimator(nn::NetConfig net, FeatureMode features, std::size_t T, double llr_clip,
                           std::uint64_t seed)
    : net_(with_input(std::move(net), features, T), seed), features_(features), T_(T), clip_(llr_clip) {
    if (T == 0)
        throw Error("estimator: T must be positive");
    if (net_.head().out_dim() != 1)
        throw Error("estimator: MLP head must end in width 1");
}

LlrEstimator::LlrEstimator(nn::BiGruNet<float> net, FeatureMode features, std::size_t T, double llr_clip)
    : net_(std::move(net)), features_(features), T_(T), clip_(llr_clip) {
    if (net_.config().in_dim != feature_dim(features, T))
        throw Error("estimator: network input dimension does not match feature mode and T");
    if (net_.head().out_dim() != 1)
        throw Error("estimator: MLP head must end in width 1");
}

nn::Mat<float> LlrEstimator::logits(const std::vector<BitSeq>& ys) const {
    const int B = static_cast<int>(ys.size());
    nn::SeqBatch<float> x(feature_dim(features_, T_), static_cast<int>(T_), B);
    for (int b = 0; b < B; ++b)
        featurize_into<float>(ys[static_cast<std::size_t>(b)], T_, features_, x, b);
    return net_.forward(x, nn::Mode::Eval);
}

std::vector<double> LlrEstimator::probabilities(std::span<const std::uint8_t> y) const {
    const auto a = logits({BitSeq(y.begin(), y.end())});
    std::vector<double> p(T_);
    for (std::size_t t = 0; t < T_; ++t)
        p[t] = nn::sigmoid(static_cast<double>(a(0, static_cast<Eigen::Index>(t))));
    return p;
}

LlrSeq LlrEstimator::estimate_llrs(std::span<const std::uint8_t> y) const {
    return estimate_batch({BitSeq(y.begin(), y.end())}).front();
}

std::vector<LlrSeq> LlrEstimator::estimate_batch(const std::vector<BitSeq>& ys) const {
    if (ys.empty())
        return {};
    const auto a = logits(ys);
    const int B = static_cast<int>(ys.size());
    std::vector<LlrSeq> out(ys.size(), LlrSeq(T_));
    for (std::size_t t = 0; t < T_; ++t)
        for (int b = 0; b < B; ++b)
            out[static_cast<std::size_t>(b)][t] =
                llr_from_logit(static_cast<double>(a(0, static_cast<Eigen::Index>(t) * B + b)), clip_);
    return out;
}

nn::Checkpoint LlrEstimator::to_checkpoint() const {
    nn::Checkpoint ck;
    ck.kind = "estimator";
    ck.net = net_.config();
    ck.model = net_;
    ck.meta["features"] = to_string(features_);
    ck.meta["T"] = std::to_string(T_);
    std::ostringstream os;
    os.precision(17);
    os << clip_;
    ck.meta["llr_clip"] = os.str();
    return ck;
}

LlrEstimator LlrEstimator::from_checkpoint(const nn::Checkpoint& ck) {
    if (ck.kind != "estimator")
        throw Error("checkpoint kind '" + ck.kind + "' is not an estimator");
    auto get = [&](const char* key) {
        auto it = ck.meta.find(key);
        if (it == ck.meta.end())
            throw Error(std::string("estimator checkpoint lacks meta key '") + key + "'");
        return it->second;
    };
    return LlrEstimator(ck.model, parse_feature_mode(get("features")), std::stoul(get("T")),
                        std::stod(get("llr_clip")));
}

LlrEstimator train_estimator(const EstimatorConfig& cfg, const FrameLayout& layout, std::uint64_t seed,
                             TrainTrace* trace, const StepCallback& on_step) {
    LlrEstimator est(cfg.net, cfg.features, layout.T(), cfg.llr_clip, derive_seed(seed, ~0ULL));
    train_estimator(est, cfg, layout, seed, trace, on_step);
    return est;
}

void train_estimator(LlrEstimator& est, const EstimatorConfig& cfg, const FrameLayout& layout, std::uint64_t seed,
                     TrainTrace* trace, const StepCallback& on_step) {
    if (cfg.batch <= 0)
        throw Error("train_estimator: batch must be positive");
    cfg.channel.validate();
    const std::size_t T = layout.T();
    if (T != est.T())
        throw Error("train_estimator: estimator T does not match frame layout");
    const int B = cfg.batch;
    const int Ti = static_cast<int>(T);
    auto& net = est.net();
    auto grads = net.zeros_like();
    auto params = net.parameter_ptrs();
    auto gptrs = grads.parameter_ptrs();
    nn::Adam<float> opt(cfg.optim);
    nn::SeqBatch<float> x(feature_dim(cfg.features, T), Ti, B);
    nn::Mat<float> labels(1, Ti * B), mask(1, Ti * B);
    nn::BiGruNet<float>::Tape tape;

    for (long step = 0; step < cfg.steps; ++step) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(step)));
        for (int b = 0; b < B; ++b) {
            const auto frame = random_frame(layout, rng);
            const auto ch = cfg.channel.sample(rng);
            const auto y = transmit(frame.transmitted, ch, rng);
            featurize_into<float>(y, T, cfg.features, x, b);
            for (int t = 0; t < Ti; ++t) {
                labels(0, t * B + b) = static_cast<float>(frame.transmitted[static_cast<std::size_t>(t)]);
                mask(0, t * B + b) = static_cast<std::size_t>(t) < y.size() ? 1.0f : 0.0f;
            }
        }
        const nn::Mat<float>* m = cfg.mask_padding ? &mask : nullptr;
        const auto logits = net.forward(x, nn::Mode::Train, &tape, m);
        const auto loss = nn::loss_from_logits<float>(logits, labels, cfg.loss, m);
        if (!std::isfinite(loss.value))
            throw nn::NumericError("train_estimator: loss diverged at step " + std::to_string(step));
        for (auto* g : gptrs)
            g->setZero();
        net.backward(tape, loss.dlogits, grads);
        opt.step(params, gptrs);
        if (trace)
            trace->loss.push_back(loss.value);
        if (on_step)
            on_step(step, loss.value);
    }
}

}  // namespace delcode
