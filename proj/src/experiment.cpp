#include "delcode/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <ostream>
#include <thread>

namespace delcode {

OuterDecoderKind parse_outer_decoder(const std::string& s) {
    if (s == "spa")
        return OuterDecoderKind::Spa;
    if (s == "viterbi_sdd")
        return OuterDecoderKind::ViterbiSdd;
    if (s == "viterbi_hdd")
        return OuterDecoderKind::ViterbiHdd;
    if (s == "bigru")
        return OuterDecoderKind::Bigru;
    if (s == "hard")
        return OuterDecoderKind::Hard;
    throw ConfigError("config key 'decoder.kind': unknown decoder '" + s + "'");
}

std::string to_string(OuterDecoderKind k) {
    switch (k) {
        case OuterDecoderKind::Spa:
            return "spa";
        case OuterDecoderKind::ViterbiSdd:
            return "viterbi_sdd";
        case OuterDecoderKind::ViterbiHdd:
            return "viterbi_hdd";
        case OuterDecoderKind::Bigru:
            return "bigru";
        case OuterDecoderKind::Hard:
            return "hard";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (!layout)
        throw ConfigError("experiment: missing frame layout");
    const auto outer = layout->outer.kind();
    switch (decoder) {
        case OuterDecoderKind::Spa:
            if (outer != OuterKind::Ldpc)
                throw ConfigError("config key 'decoder.kind': spa requires code.outer = ldpc");
            break;
        case OuterDecoderKind::ViterbiSdd:
        case OuterDecoderKind::ViterbiHdd:
        case OuterDecoderKind::Bigru:
            if (outer != OuterKind::Conv)
                throw ConfigError("config key 'decoder.kind': " + to_string(decoder) + " requires code.outer = conv");
            break;
        case OuterDecoderKind::Hard:
            if (outer != OuterKind::Uncoded)
                throw ConfigError("config key 'decoder.kind': hard requires code.outer = uncoded");
            break;
    }
    if (decoder == OuterDecoderKind::Bigru && !oneshot)
        throw ConfigError("config key 'decoder.checkpoint': bigru decoder needs a checkpoint");
    if (pd_grid.empty())
        throw ConfigError("config key 'channel.pd': grid must be nonempty");
    if (ps_grid.empty())
        throw ConfigError("config key 'channel.ps': grid must be nonempty");
    for (double pd : pd_grid)
        for (double ps : ps_grid)
            ChannelParams{pd, ps}.validate();
    if (!assumed_ps.empty() && !detector.is_bcjr())
        throw ConfigError("config key 'detector.assumed_ps': only meaningful for the bcjr detector");
    if (stopping.max_frames < 1)
        throw ConfigError("config key 'sim.max_frames': must be at least 1");
    if (stopping.min_frame_errors < 0)
        throw ConfigError("config key 'sim.min_frame_errors': must be non-negative");
    if (workers < 1)
        throw ConfigError("config key 'sim.workers': must be at least 1");
    if (spa_max_iter < 0)
        throw ConfigError("config key 'decoder.max_iter': must be non-negative");
}

std::shared_ptr<const FrameLayout> layout_from_config(const IniConfig& ini) {
    ini.check_keys("code", {"outer", "alist", "k", "n"});
    ini.check_keys("marker", {"pattern", "nc"});
    ini.check_keys("interleaver", {"seed", "file"});
    const auto outer_kind = ini.get_string("code", "outer");
    OuterCode outer = [&] {
        if (outer_kind == "ldpc")
            return OuterCode::ldpc(ldpc::load_alist(ini.get_path("code", "alist")));
        if (outer_kind == "conv") {
            const auto k = ini.get_int("code", "k", 105);
            if (k <= 0)
                throw ConfigError("config key 'code.k': must be positive");
            return OuterCode::conv(static_cast<std::size_t>(k));
        }
        if (outer_kind == "uncoded") {
            const auto n = ini.get_int("code", "n");
            if (n <= 0)
                throw ConfigError("config key 'code.n': must be positive");
            return OuterCode::uncoded(static_cast<std::size_t>(n));
        }
        throw ConfigError("config key 'code.outer': expected ldpc, conv or uncoded, got '" + outer_kind + "'");
    }();

    MarkerConfig marker;
    const auto pattern = ini.get_string("marker", "pattern", "01");
    marker.marker.clear();
    for (char ch : pattern) {
        if (ch != '0' && ch != '1')
            throw ConfigError("config key 'marker.pattern': expected a string of 0/1, got '" + pattern + "'");
        marker.marker.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    const auto nc = ini.get_int("marker", "nc", 5);
    if (nc <= 0)
        throw ConfigError("config key 'marker.nc': must be positive");
    marker.nc = static_cast<std::size_t>(nc);
    if (marker.marker.empty())
        throw ConfigError("config key 'marker.pattern': must be nonempty");

    const auto seed = ini.get_int("interleaver", "seed", 1);
    if (seed < 0)
        throw ConfigError("config key 'interleaver.seed': must be non-negative");
    auto layout = std::make_shared<FrameLayout>(std::move(outer), std::move(marker), static_cast<std::uint64_t>(seed));
    if (ini.has("interleaver", "file")) {
        auto il = Interleaver::load(ini.get_path("interleaver", "file"));
        if (il.size() != layout->n())
            throw ConfigError("config key 'interleaver.file': permutation length does not match n");
        layout->interleaver = std::move(il);
    }
    return layout;
}

namespace {

nn::NetConfig net_from(const IniConfig& ini, const std::string& sec, nn::NetConfig def) {
    def.layers = static_cast<int>(ini.get_int(sec, "layers", def.layers));
    def.hidden = static_cast<int>(ini.get_int(sec, "hidden", def.hidden));
    def.mlp = ini.get_ints(sec, "mlp", def.mlp);
    def.gru_bias = ini.get_bool(sec, "bias", def.gru_bias);
    try {
        def.hidden_act = nn::parse_activation(ini.get_string(sec, "activation", nn::to_string(def.hidden_act)));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("config key '" + sec + ".activation': " + e.what());
    }
    def.bn_momentum = ini.get_double(sec, "bn_momentum", def.bn_momentum);
    def.bn_eps = ini.get_double(sec, "bn_eps", def.bn_eps);
    if (def.layers <= 0 || def.hidden <= 0 || def.mlp.empty() || def.mlp.back() != 1)
        throw ConfigError("config section [" + sec + "]: layers/hidden must be positive and mlp must end in 1");
    return def;
}

nn::OptimConfig optim_from(const IniConfig& ini, const std::string& sec, nn::OptimConfig def) {
    def.base_lr = ini.get_double(sec, "lr", def.base_lr);
    def.decay = ini.get_double(sec, "decay", def.decay);
    def.decay_interval = static_cast<long>(ini.get_int(sec, "decay_interval", def.decay_interval));
    def.clip = ini.get_double(sec, "clip", def.clip);
    const auto mode = ini.get_string(sec, "clip_mode", "norm");
    try {
        def.clip_mode = nn::parse_clip_mode(mode);
    } catch (const Error& e) {
        throw ConfigError("config key '" + sec + ".clip_mode': " + e.what());
    }
    if (!(def.base_lr > 0.0))
        throw ConfigError("config key '" + sec + ".lr': must be positive");
    if (!(def.decay > 0.0 && def.decay <= 1.0))
        throw ConfigError("config key '" + sec + ".decay': must lie in (0, 1]");
    return def;
}

ChannelDistribution channel_from(const IniConfig& ini, const std::string& sec, ChannelDistribution def) {
    ChannelDistribution c{ini.get_doubles(sec, "pd", def.pd_grid), ini.get_doubles(sec, "ps", def.ps_grid)};
    try {
        c.validate();
    } catch (const Error& e) {
        throw ConfigError("config section [" + sec + "] pd/ps: " + e.what());
    }
    return c;
}

const std::set<std::string> kNetKeys{"layers",  "hidden", "mlp",   "bias",           "activation", "bn_momentum",
                                     "bn_eps",  "lr",     "decay", "decay_interval", "clip",       "clip_mode",
                                     "steps",   "batch",  "pd",    "ps",             "seed"};

}  // namespace

EstimatorConfig estimator_config_from(const IniConfig& ini) {
    const std::string sec = "estimator";
    auto keys = kNetKeys;
    keys.insert({"features", "loss", "llr_clip", "mask_padding"});
    ini.check_keys(sec, keys);
    EstimatorConfig cfg;
    nn::NetConfig def;
    def.layers = 2;
    def.hidden = 64;
    def.mlp = {32, 1};
    cfg.net = net_from(ini, sec, def);
    try {
        cfg.features = parse_feature_mode(ini.get_string(sec, "features", "pair-window"));
        cfg.loss = nn::parse_loss(ini.get_string(sec, "loss", "bce"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("config section [estimator]: " + std::string(e.what()));
    }
    cfg.llr_clip = ini.get_double(sec, "llr_clip", 10.0);
    cfg.steps = static_cast<long>(ini.get_int(sec, "steps", 2000));
    cfg.batch = static_cast<int>(ini.get_int(sec, "batch", 16));
    cfg.optim = optim_from(ini, sec, nn::OptimConfig{});
    cfg.channel = channel_from(ini, sec, ChannelDistribution::fixed(0.05, 0.0));
    cfg.mask_padding = ini.get_bool(sec, "mask_padding", false);
    if (cfg.steps < 0)
        throw ConfigError("config key 'estimator.steps': must be non-negative");
    if (cfg.batch <= 0)
        throw ConfigError("config key 'estimator.batch': must be positive");
    if (!(cfg.llr_clip > 0.0))
        throw ConfigError("config key 'estimator.llr_clip': must be positive");
    return cfg;
}

DecoderConfig decoder_config_from(const IniConfig& ini) {
    const std::string sec = "decoder_training";
    auto keys = kNetKeys;
    keys.insert({"source", "estimator", "llr_clip"});
    ini.check_keys(sec, keys);
    DecoderConfig cfg;
    cfg.net = net_from(ini, sec, cfg.net);
    cfg.net.in_dim = 2;
    cfg.steps = static_cast<long>(ini.get_int(sec, "steps", cfg.steps));
    cfg.batch = static_cast<int>(ini.get_int(sec, "batch", cfg.batch));
    cfg.optim = optim_from(ini, sec, cfg.optim);
    cfg.channel = channel_from(ini, sec, cfg.channel);
    if (cfg.steps < 0)
        throw ConfigError("config key 'decoder_training.steps': must be non-negative");
    if (cfg.batch <= 0)
        throw ConfigError("config key 'decoder_training.batch': must be positive");
    return cfg;
}

Detector decoder_training_source(const IniConfig& ini) {
    const std::string sec = "decoder_training";
    const auto source = ini.get_string(sec, "source", "bcjr");
    if (source == "bcjr") {
        Detector::BcjrSettings s;
        s.llr_clip = ini.get_double(sec, "llr_clip", 10.0);
        return Detector::bcjr(s);
    }
    if (source == "bigru") {
        auto est = std::make_shared<const LlrEstimator>(
            LlrEstimator::from_checkpoint(nn::load_checkpoint(ini.get_path(sec, "estimator"))));
        return Detector::bigru(std::move(est));
    }
    throw ConfigError("config key 'decoder_training.source': expected bcjr or bigru, got '" + source + "'");
}

ExperimentConfig experiment_from_config(const IniConfig& ini) {
    ini.check_keys("detector", {"kind", "checkpoint", "assumed_ps", "assumed_pd", "estimate_pd", "llr_clip"});
    ini.check_keys("decoder", {"kind", "max_iter", "checkpoint"});
    ini.check_keys("channel", {"pd", "ps"});
    ini.check_keys("sim", {"max_frames", "min_frame_errors", "seed", "workers", "timing"});

    ExperimentConfig cfg;
    cfg.layout = layout_from_config(ini);

    const auto det = ini.get_string("detector", "kind", "bcjr");
    if (det == "bcjr") {
        Detector::BcjrSettings s;
        s.llr_clip = ini.get_double("detector", "llr_clip", 10.0);
        s.estimate_pd = ini.get_bool("detector", "estimate_pd", false);
        if (ini.has("detector", "assumed_pd"))
            s.pd_assumed = ini.get_double("detector", "assumed_pd");
        if (!(s.llr_clip > 0.0))
            throw ConfigError("config key 'detector.llr_clip': must be positive");
        cfg.detector = Detector::bcjr(s);
        cfg.assumed_ps = ini.get_doubles("detector", "assumed_ps", std::vector<double>{});
        for (double p : cfg.assumed_ps)
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError("config key 'detector.assumed_ps': values must lie in [0, 1]");
    } else if (det == "bigru") {
        auto est = std::make_shared<const LlrEstimator>(
            LlrEstimator::from_checkpoint(nn::load_checkpoint(ini.get_path("detector", "checkpoint"))));
        if (est->T() != cfg.layout->T())
            throw ConfigError("config key 'detector.checkpoint': estimator was trained for T = " +
                              std::to_string(est->T()) + " but the frame layout has T = " +
                              std::to_string(cfg.layout->T()));
        cfg.detector = Detector::bigru(std::move(est));
    } else {
        throw ConfigError("config key 'detector.kind': expected bcjr or bigru, got '" + det + "'");
    }

    const std::string default_decoder = [&] {
        switch (cfg.layout->outer.kind()) {
            case OuterKind::Ldpc:
                return "spa";
            case OuterKind::Conv:
                return "viterbi_sdd";
            case OuterKind::Uncoded:
                return "hard";
        }
        return "spa";
    }();
    cfg.decoder = parse_outer_decoder(ini.get_string("decoder", "kind", default_decoder));
    cfg.spa_max_iter = static_cast<int>(ini.get_int("decoder", "max_iter", 100));
    if (cfg.decoder == OuterDecoderKind::Bigru) {
        auto dec = std::make_shared<const OneShotDecoder>(
            OneShotDecoder::from_checkpoint(nn::load_checkpoint(ini.get_path("decoder", "checkpoint"))));
        cfg.oneshot = std::move(dec);
    }

    cfg.pd_grid = ini.get_doubles("channel", "pd", std::vector<double>{0.0});
    cfg.ps_grid = ini.get_doubles("channel", "ps", std::vector<double>{0.0});
    cfg.stopping.max_frames = static_cast<long>(ini.get_int("sim", "max_frames", 100000));
    cfg.stopping.min_frame_errors = static_cast<long>(ini.get_int("sim", "min_frame_errors", 100));
    const auto seed = ini.get_int("sim", "seed", 1);
    if (seed < 0)
        throw ConfigError("config key 'sim.seed': must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.workers = static_cast<int>(ini.get_int("sim", "workers", 1));
    cfg.timing = ini.get_bool("sim", "timing", false);
    cfg.validate();
    return cfg;
}

namespace {

// Frames are simulated in fixed groups so batch composition (and therefore
// every per-frame result) is independent of the worker count.
constexpr long kFrameGroup = 8;

Detector detector_for(const ExperimentConfig& cfg, std::optional<double> assumed_ps) {
    if (!assumed_ps || !cfg.detector.is_bcjr())
        return cfg.detector;
    auto s = cfg.detector.bcjr_settings();
    s.ps_assumed = *assumed_ps;
    return Detector::bcjr(s);
}

std::vector<FrameOutcome> run_group(const ExperimentConfig& cfg, const ChannelParams& channel,
                                    std::optional<double> assumed_ps, const std::vector<std::uint64_t>& seeds) {
    const auto& layout = *cfg.layout;
    const auto detector = detector_for(cfg, assumed_ps);
    std::vector<Frame> frames;
    std::vector<BitSeq> ys;
    for (auto s : seeds) {
        Rng rng(s);
        frames.push_back(random_frame(layout, rng));
        ys.push_back(transmit(frames.back().transmitted, channel, rng));
    }
    const auto llrs = detector.detect_batch(ys, layout, std::vector<ChannelParams>(seeds.size(), channel));
    std::vector<LlrSeq> lstars;
    for (const auto& l : llrs)
        lstars.push_back(outer_llrs(layout, l));

    std::vector<BitSeq> decoded;
    switch (cfg.decoder) {
        case OuterDecoderKind::Spa:
            for (const auto& l : lstars)
                decoded.push_back(ldpc::spa_decode(layout.outer.parity_check(), layout.outer.ldpc_encoder(), l,
                                                   cfg.spa_max_iter)
                                      .message);
            break;
        case OuterDecoderKind::ViterbiSdd:
            for (const auto& l : lstars)
                decoded.push_back(conv::viterbi_sdd(l));
            break;
        case OuterDecoderKind::ViterbiHdd:
            for (const auto& l : lstars)
                decoded.push_back(conv::viterbi_hdd(l));
            break;
        case OuterDecoderKind::Bigru:
            decoded = cfg.oneshot->decode_batch(lstars);
            break;
        case OuterDecoderKind::Hard:
            for (const auto& l : lstars)
                decoded.push_back(conv::llr_to_hard(l));
            break;
    }

    std::vector<FrameOutcome> out(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& m = frames[i].message;
        for (std::size_t j = 0; j < m.size(); ++j)
            out[i].bit_errors += m[j] != decoded[i][j];
        out[i].frame_error = out[i].bit_errors > 0;
    }
    return out;
}

}  // namespace

FrameOutcome run_frame(const ExperimentConfig& cfg, const ChannelParams& channel, std::optional<double> assumed_ps,
                       std::uint64_t frame_seed) {
    return run_group(cfg, channel, assumed_ps, {frame_seed}).front();
}

CurvePoint run_point(const ExperimentConfig& cfg, double pd, double ps, std::optional<double> assumed_ps) {
    cfg.validate();
    const ChannelParams channel{pd, ps};
    channel.validate();
    const auto start = std::chrono::steady_clock::now();

    CurvePoint pt;
    pt.pd = pd;
    pt.ps = ps;
    if (!cfg.detector.is_bcjr())
        pt.assumed_ps = -1.0;
    else if (assumed_ps)
        pt.assumed_ps = *assumed_ps;
    else
        pt.assumed_ps = cfg.detector.bcjr_settings().ps_assumed.value_or(ps);

    const long max_frames = cfg.stopping.max_frames;
    const long target = cfg.stopping.min_frame_errors;
    const long groups_per_round = static_cast<long>(cfg.workers) * 4;
    long next_group = 0;
    bool done = false;
    while (!done) {
        const long total_groups = (max_frames + kFrameGroup - 1) / kFrameGroup;
        const long round_end = std::min(total_groups, next_group + groups_per_round);
        std::vector<std::vector<FrameOutcome>> results(static_cast<std::size_t>(round_end - next_group));
        auto work = [&](long g) {
            std::vector<std::uint64_t> seeds;
            for (long f = g * kFrameGroup; f < std::min(max_frames, (g + 1) * kFrameGroup); ++f)
                seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(f)));
            results[static_cast<std::size_t>(g - next_group)] = run_group(cfg, channel, assumed_ps, seeds);
        };
        if (cfg.workers == 1) {
            for (long g = next_group; g < round_end; ++g)
                work(g);
        } else {
            std::vector<std::future<void>> futs;
            for (int w = 0; w < cfg.workers; ++w)
                futs.push_back(std::async(std::launch::async, [&, w] {
                    for (long g = next_group + w; g < round_end; g += cfg.workers)
                        work(g);
                }));
            for (auto& f : futs)
                f.get();
        }
        // Aggregate in frame order; stop exactly where the rule triggers.
        for (const auto& group : results) {
            for (const auto& o : group) {
                ++pt.frames;
                pt.bit_errors += o.bit_errors;
                pt.frame_errors += o.frame_error ? 1 : 0;
                if (pt.frame_errors >= target || pt.frames >= max_frames) {
                    done = true;
                    break;
                }
            }
            if (done)
                break;
        }
        next_group = round_end;
        if (next_group >= total_groups)
            done = true;
    }
    const auto k = static_cast<double>(cfg.layout->k());
    pt.ber = static_cast<double>(pt.bit_errors) / (k * static_cast<double>(pt.frames));
    pt.fer = static_cast<double>(pt.frame_errors) / static_cast<double>(pt.frames);
    if (cfg.timing)
        pt.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return pt;
}

std::vector<CurvePoint> run_sweep(const ExperimentConfig& cfg, const std::function<void(const CurvePoint&)>& on_point) {
    cfg.validate();
    auto pds = cfg.pd_grid, pss = cfg.ps_grid;
    std::sort(pds.begin(), pds.end());
    std::sort(pss.begin(), pss.end());
    std::vector<std::optional<double>> assumed;
    if (cfg.assumed_ps.empty()) {
        assumed.push_back(std::nullopt);
    } else {
        auto a = cfg.assumed_ps;
        std::sort(a.begin(), a.end());
        for (double v : a)
            assumed.push_back(v);
    }
    std::vector<CurvePoint> rows;
    for (double pd : pds)
        for (double ps : pss)
            for (const auto& a : assumed) {
                rows.push_back(run_point(cfg, pd, ps, a));
                if (on_point)
                    on_point(rows.back());
            }
    std::stable_sort(rows.begin(), rows.end(), [](const CurvePoint& a, const CurvePoint& b) {
        return std::tie(a.pd, a.ps, a.assumed_ps) < std::tie(b.pd, b.ps, b.assumed_ps);
    });
    return rows;
}

std::string csv_row(const CurvePoint& p) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%ld,%ld,%ld,%.6g,%.6g,%.6g", p.pd, p.ps, p.assumed_ps, p.frames,
                  p.bit_errors, p.frame_errors, p.ber, p.fer, p.wall_time);
    return buf;
}

void write_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os << kCsvHeader << '\n';
    for (const auto& p : points)
        os << csv_row(p) << '\n';
}

}  // namespace delcode
