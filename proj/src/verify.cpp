#include "delcode/verify.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "delcode/channel.hpp"
#include "delcode/map_detector.hpp"
#include "delcode/nn/loss.hpp"

namespace delcode {

namespace {

double llr_gap(double a, double b) {
    if (a == b)
        return 0.0;  // includes equal infinities
    return std::abs(a - b);
}

TemplateSpec random_template(Rng& rng, std::size_t max_length) {
    // Half the instances are marker coded, the rest plain.
    if (rng.bit()) {
        MarkerConfig mc;
        const std::size_t nm = 1 + rng.below(3);
        mc.marker.resize(nm);
        for (auto& b : mc.marker)
            b = static_cast<std::uint8_t>(rng.bit());
        mc.nc = 1 + rng.below(5);
        std::size_t n = 1;
        while (mc.frame_length(n + 1) <= max_length && rng.below(4) != 0)
            ++n;
        return TemplateSpec::from_markers(mc, n);
    }
    return TemplateSpec::all_coded(1 + rng.below(max_length));
}

}  // namespace

OracleReport run_oracle_suite(const OracleSuiteConfig& cfg, std::uint64_t seed) {
    if (cfg.max_length > kBruteForceMaxLength)
        throw Error("oracle suite: max_length exceeds the enumeration limit");
    OracleReport rep;
    rep.tolerance = cfg.tolerance;
    for (long i = 0; i < cfg.instances; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const auto tmpl = random_template(rng, cfg.max_length);
        BitSeq x(tmpl.length());
        for (std::size_t t = 0; t < x.size(); ++t)
            x[t] = tmpl.is_marker(t) ? static_cast<std::uint8_t>(tmpl.kind[t]) : static_cast<std::uint8_t>(rng.bit());
        DetectorParams p;
        p.pd_assumed = cfg.pd[rng.below(cfg.pd.size())];
        p.ps_assumed = cfg.ps[rng.below(cfg.ps.size())];
        p.llr_clip = std::numeric_limits<double>::infinity();
        const auto y = transmit(x, ChannelParams{p.pd_assumed, p.ps_assumed}, rng);

        const auto lattice = forward_backward(y, tmpl, p);
        const auto fast = posterior_llrs(lattice, y, tmpl, p);
        const auto ref = brute_force_llrs(y, tmpl, p);
        double dev = 0.0;
        for (std::size_t t = 0; t < fast.size(); ++t)
            dev = std::max(dev, llr_gap(fast[t], ref[t]));
        if (!(dev <= cfg.tolerance))
            ++rep.failures;
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
        ++rep.instances;
    }
    return rep;
}

GradcheckResult gradient_check(const std::string& name, const GradcheckConfig& cfg, std::uint64_t seed) {
    using nn::Mat;
    nn::BiGruNet<double> net(cfg.net, seed);
    Rng rng(derive_seed(seed, 1));
    nn::SeqBatch<double> x(cfg.net.in_dim, cfg.T, cfg.B);
    for (Eigen::Index i = 0; i < x.data.size(); ++i)
        x.data.data()[i] = 2.0 * rng.uniform() - 1.0;
    Mat<double> labels(1, cfg.T * cfg.B);
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        labels.data()[i] = static_cast<double>(rng.bit());

    nn::GruTape<double>* const kNoGru = nullptr;
    nn::BatchNormTape<double>* const kNoBn = nullptr;
    nn::MlpTape<double>* const kNoMlp = nullptr;

    typename nn::BiGruNet<double>::Tape tape;
    const Mat<double> logits = net.forward(x, nn::Mode::Train, &tape);
    const auto loss = nn::loss_from_logits(logits, labels, nn::LossKind::Bce);
    auto grads = net.zeros_like();
    net.backward(tape, loss.dlogits, grads);

    auto& layers = net.layers();
    auto& bns = net.batchnorms();
    const int d = cfg.net.hidden;
    const std::size_t L = layers.size();

    // Unperturbed intermediate values; a perturbation in layer l only
    // requires recomputing from l upwards.
    std::vector<nn::SeqBatch<double>> inputs(L);
    std::vector<Mat<double>> raw(L);
    Mat<double> top;
    {
        nn::SeqBatch<double> cur = x;
        for (std::size_t l = 0; l < L; ++l) {
            inputs[l] = cur;
            raw[l] = nn::bigru_layer_forward(layers[l], cur, kNoGru, kNoGru);
            if (l < bns.size())
                cur = nn::SeqBatch<double>(nn::batchnorm_forward(bns[l], raw[l], nn::Mode::Train, kNoBn),
                                           cfg.T, cfg.B);
            else
                top = raw[l];
        }
    }
    auto head_loss = [&](const Mat<double>& h) {
        return nn::loss_from_logits(nn::mlp_forward(net.head(), h, kNoMlp), labels, nn::LossKind::Bce).value;
    };
    auto tail_loss = [&](std::size_t l, Mat<double> out) {
        for (;;) {
            if (l >= bns.size())
                return head_loss(out);
            nn::SeqBatch<double> cur(nn::batchnorm_forward(bns[l], out, nn::Mode::Train, kNoBn), cfg.T, cfg.B);
            ++l;
            out = nn::bigru_layer_forward(layers[l], cur, kNoGru, kNoGru);
        }
    };

    struct Slot {
        std::string name;
        Mat<double>* value;
        const Mat<double>* grad;
        std::function<double()> loss;
    };
    std::vector<Slot> slots;
    auto gp = grads.parameters();
    std::size_t gi = 0;
    for (std::size_t l = 0; l < L; ++l) {
        for (int dir = 0; dir < 2; ++dir) {
            std::vector<nn::NamedTensor<double>> ps;
            auto& cell = dir == 0 ? layers[l].fwd : layers[l].bwd;
            cell.collect("gru" + std::to_string(l) + (dir == 0 ? ".fwd" : ".bwd"), ps);
            auto recompute = [&, l, dir] {
                Mat<double> out = raw[l];
                const auto& c = dir == 0 ? layers[l].fwd : layers[l].bwd;
                if (dir == 0)
                    out.topRows(d) = nn::gru_scan(c, inputs[l], false, kNoGru);
                else
                    out.bottomRows(d) = nn::gru_scan(c, inputs[l], true, kNoGru);
                return tail_loss(l, std::move(out));
            };
            for (auto& p : ps)
                slots.push_back({p.name, p.value, gp[gi++].value, recompute});
        }
        if (l < bns.size()) {
            std::vector<nn::NamedTensor<double>> ps;
            bns[l].collect("bn" + std::to_string(l), ps);
            for (auto& p : ps)
                slots.push_back({p.name, p.value, gp[gi++].value, [&, l] { return tail_loss(l, raw[l]); }});
        }
    }
    {
        std::vector<nn::NamedTensor<double>> ps;
        net.head().collect("mlp", ps);
        for (auto& p : ps)
            slots.push_back({p.name, p.value, gp[gi++].value, [&] { return head_loss(top); }});
    }
    if (gi != gp.size())
        throw Error("gradient check: parameter layout mismatch");

    GradcheckResult res;
    res.model = name;
    for (auto& s : slots) {
        Mat<double>& w = *s.value;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double orig = w.data()[i];
            w.data()[i] = orig + cfg.step;
            const double up = s.loss();
            w.data()[i] = orig - cfg.step;
            const double down = s.loss();
            w.data()[i] = orig;
            const double fd = (up - down) / (2.0 * cfg.step);
            const double a = s.grad->data()[i];
            double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), cfg.floor});
            if (!std::isfinite(rel))
                rel = std::numeric_limits<double>::infinity();
            if (rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst = s.name + "[" + std::to_string(i) + "]";
                res.worst_analytic = a;
                res.worst_numeric = fd;
            }
            ++res.parameters;
        }
    }
    return res;
}

nn::NetConfig desk_estimator_net() {
    nn::NetConfig c;
    c.in_dim = 2;
    c.layers = 2;
    c.hidden = 64;
    c.mlp = {32, 1};
    return c;
}

nn::NetConfig desk_decoder_net() {
    nn::NetConfig c;
    c.in_dim = 2;
    c.layers = 2;
    c.hidden = 64;
    c.mlp = {32, 1};
    return c;
}

}  // namespace delcode
