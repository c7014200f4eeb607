// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [criterion ...] where a criterion is 1..8 or "table".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "delcode/conv.hpp"
#include "delcode/experiment.hpp"
#include "delcode/verify.hpp"

using namespace delcode;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = DELCODE_SOURCE_DIR;
const fs::path kConfigs = kSource / "configs";

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string format(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

Outcome oracle_equivalence() {
    Clock c;
    const auto rep = run_oracle_suite(OracleSuiteConfig{}, 1);
    const double s = c.seconds();
    return {rep.pass() && rep.instances >= 1000 && s < 60.0,
            format("%ld instances, %ld failures, max |dL| %.2e (tol 1e-9), %.1fs (limit 60s)", rep.instances,
                   rep.failures, rep.max_abs_deviation, s)};
}

Outcome baseline_point(const char* config, double pd, double lo, double hi) {
    Clock c;
    auto cfg = experiment_from_config(IniConfig::load(kConfigs / config));
    cfg.stopping = {1000000, 100};
    cfg.workers = workers();
    const auto pt = run_point(cfg, pd, 0.0);
    const bool pass = pt.frame_errors >= 100 && pt.ber >= lo && pt.ber <= hi;
    return {pass, format("%s pd=%.3g: BER %.3e in [%.2e, %.2e], %ld frame errors / %ld frames, FER %.3e, %.1fs",
                         config, pd, pt.ber, lo, hi, pt.frame_errors, pt.frames, pt.fer, c.seconds())};
}

Outcome gradients() {
    Clock c;
    std::string detail;
    bool pass = true;
    for (const auto& [name, net] : {std::pair{"estimator", desk_estimator_net()}, {"decoder", desk_decoder_net()}}) {
        GradcheckConfig g;
        g.net = net;
        const auto r = gradient_check(name, g, derive_seed(3, name == std::string("estimator") ? 0 : 1));
        pass = pass && r.max_rel_error < 1e-4;
        detail += format("%s %zu params max rel err %.2e (at %s); ", name, r.parameters, r.max_rel_error,
                         r.worst.c_str());
    }
    const double s = c.seconds();
    return {pass && s < 120.0, detail + format("tol 1e-4, %.1fs (limit 120s)", s)};
}

Outcome estimator_training() {
    Clock c;
    const auto ini = IniConfig::load(kConfigs / "desk_estimator.ini");
    const auto layout = layout_from_config(ini);
    const auto cfg = estimator_config_from(ini);
    TrainTrace trace;
    const auto est = train_estimator(cfg, *layout, static_cast<std::uint64_t>(ini.get_int("estimator", "seed")), &trace);
    // final loss = mean over the last 100 steps (single mini-batches are noisy)
    const std::size_t tail = std::min<std::size_t>(100, trace.loss.size());
    double bce = 0.0;
    for (std::size_t i = trace.loss.size() - tail; i < trace.loss.size(); ++i)
        bce += trace.loss[i];
    bce /= static_cast<double>(tail);

    Rng rng(99);
    long agree = 0, total = 0;
    for (int f = 0; f < 200; ++f) {
        const auto fr = random_frame(*layout, rng);
        const auto l = est.estimate_llrs(fr.transmitted);
        for (std::size_t t = 0; t < l.size(); ++t) {
            agree += (l[t] < 0.0) == (fr.transmitted[t] == 1);
            ++total;
        }
    }
    const double acc = static_cast<double>(agree) / static_cast<double>(total);
    const double s = c.seconds();
    return {trace.loss.size() == 2000 && bce < 0.35 && acc > 0.99 && s < 900.0,
            format("%zu steps, 2x64, T=%zu: final BCE %.4f (< 0.35), clean accuracy %.5f (> 0.99), %.1fs (limit 900s)",
                   trace.loss.size(), layout->T(), bce, acc, s)};
}

Outcome oneshot_agreement() {
    Clock c;
    const auto ini = IniConfig::load(kConfigs / "desk_decoder.ini");
    const auto layout = layout_from_config(ini);
    const auto cfg = decoder_config_from(ini);
    const auto dec = train_decoder(cfg, *layout, decoder_training_source(ini),
                                   static_cast<std::uint64_t>(ini.get_int("decoder_training", "seed")));
    const std::size_t k = layout->k();
    Rng rng(77);
    long agree = 0, correct = 0, total = 0;
    for (int f = 0; f < 100; ++f) {
        const auto m = rng.bits(k);
        const auto code = conv::encode(m);
        LlrSeq l(code.size());
        for (std::size_t i = 0; i < code.size(); ++i)
            l[i] = code[i] ? -10.0 : 10.0;
        const auto a = dec.decode_messages(l);
        const auto v = conv::viterbi_sdd(l);
        for (std::size_t i = 0; i < k; ++i) {
            agree += a[i] == v[i];
            correct += a[i] == m[i];
            ++total;
        }
    }
    const double rate = static_cast<double>(agree) / static_cast<double>(total);
    return {k == 105 && rate >= 0.99,
            format("k=%zu, %ld bits: agreement with Viterbi-SDD %.5f (>= 0.99), accuracy vs messages %.5f, %.1fs", k,
                   total, rate, static_cast<double>(correct) / static_cast<double>(total), c.seconds())};
}

Outcome channel_statistics() {
    const std::vector<ChannelParams> pairs{{0.0, 0.0}, {0.05, 0.0}, {0.0, 0.05}, {0.03, 0.1}, {0.3, 0.2}};
    const std::size_t N = 100000;
    bool pass = true;
    std::string detail;
    auto within = [](double observed, double p, double n) {
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        if (sigma == 0.0)
            return observed == p;
        return std::abs(observed - p) <= 4.0 * sigma;
    };
    std::uint64_t seed = 1;
    for (const auto& cp : pairs) {
        for (std::uint8_t bit : {0, 1}) {
            const BitSeq x(N, bit);
            const auto y = transmit(x, cp, seed++);
            const double R = static_cast<double>(y.size());
            const double del = (static_cast<double>(N) - R) / static_cast<double>(N);
            const double flips =
                static_cast<double>(std::count(y.begin(), y.end(), static_cast<std::uint8_t>(1 - bit))) / R;
            const bool ok = within(del, cp.pd, static_cast<double>(N)) && within(flips, cp.ps, R);
            pass = pass && ok;
            detail += format("(%.2g,%.2g|x=%d) del %.4f flip %.4f%s; ", cp.pd, cp.ps, bit, del, flips, ok ? "" : " OUT");
        }
    }
    return {pass, detail + "10^5 bits each, 4 sigma"};
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / "delcode_acceptance";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "sweep.ini");
        f << "[code]\nouter = ldpc\nalist = " << (kSource / "data" / "regular_204_102.alist").string()
          << "\n[marker]\npattern = 01\nnc = 5\n[detector]\nkind = bcjr\nassumed_ps = 0, 0.03\n"
          << "[channel]\npd = 0.05, 0.06\nps = 0, 0.01\n"
          << "[sim]\nmax_frames = 200\nmin_frame_errors = 10\nseed = 7\nworkers = 1\n";
    }
    std::vector<std::string> outputs;
    for (int run = 0; run < 2; ++run) {
        const auto out = dir / ("run" + std::to_string(run) + ".csv");
        const std::string cmd = std::string("\"") + DELCODE_CLI + "\" sweep \"" + (dir / "sweep.ini").string() +
                                "\" --workers 1 --out \"" + out.string() + "\" 2>/dev/null";
        if (std::system(cmd.c_str()) != 0)
            return {false, "sweep command failed: " + cmd};
        outputs.push_back(read_file(out));
    }
    const auto lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
    const bool same = outputs[0] == outputs[1];
    fs::remove_all(dir);
    return {same && lines == 9 && !outputs[0].empty(),
            format("two CLI sweeps, %ld CSV lines, %zu bytes: %s", static_cast<long>(lines), outputs[0].size(),
                   same ? "byte-identical" : "DIFFER")};
}

// Full-size configurations: load, train 10 steps at batch 1 (a full-batch
// step of the 1024-wide stacks takes about a minute here), round-trip.
Outcome table_configs() {
    Clock c;
    constexpr long kSteps = 10;
    constexpr int kBatch = 1;
    bool pass = true;
    std::string detail;
    std::shared_ptr<const LlrEstimator> conv_estimator;
    for (const char* name : {"estimator_nc5.ini", "estimator_nc10.ini", "estimator_robust.ini", "estimator_conv.ini"}) {
        Clock t;
        const auto ini = IniConfig::load(kConfigs / name);
        const auto layout = layout_from_config(ini);
        auto cfg = estimator_config_from(ini);
        cfg.steps = kSteps;
        cfg.batch = kBatch;
        TrainTrace trace;
        bool ok = true;
        try {
            auto est = train_estimator(cfg, *layout, 1, &trace);
            for (double l : trace.loss)
                ok = ok && std::isfinite(l);
            const auto bytes = nn::serialize(est.to_checkpoint());
            const auto back = LlrEstimator::from_checkpoint(nn::deserialize(bytes));
            Rng rng(5);
            const auto fr = random_frame(*layout, rng);
            const auto y = transmit(fr.transmitted, {0.05, 0.0}, rng);
            ok = ok && nn::serialize(back.to_checkpoint()) == bytes && back.estimate_llrs(y) == est.estimate_llrs(y);
            if (std::string(name) == "estimator_conv.ini")
                conv_estimator = std::make_shared<const LlrEstimator>(std::move(est));
        } catch (const std::exception& e) {
            ok = false;
            detail += std::string(name) + " threw: " + e.what() + "; ";
        }
        pass = pass && ok && trace.loss.size() == kSteps;
        detail += format("%s %dx%d T=%zu loss %.3f->%.3f %.0fs%s; ", name, cfg.net.layers, cfg.net.hidden, layout->T(),
                         trace.loss.empty() ? 0.0 : trace.loss.front(), trace.loss.empty() ? 0.0 : trace.loss.back(),
                         t.seconds(), ok ? "" : " FAILED");
    }
    {
        const auto ini = IniConfig::load(kConfigs / "decoder_oneshot.ini");
        const auto layout = layout_from_config(ini);
        auto cfg = decoder_config_from(ini);
        cfg.steps = kSteps;
        cfg.batch = kBatch;
        bool ok = conv_estimator != nullptr && ini.get_string("decoder_training", "source") == "bigru";
        TrainTrace trace;
        if (ok) {
            try {
                const auto dec = train_decoder(cfg, *layout, Detector::bigru(conv_estimator), 1, &trace);
                for (double l : trace.loss)
                    ok = ok && std::isfinite(l);
                const auto bytes = nn::serialize(dec.to_checkpoint());
                const auto back = OneShotDecoder::from_checkpoint(nn::deserialize(bytes));
                const LlrSeq l(2 * layout->k(), 1.5);
                ok = ok && nn::serialize(back.to_checkpoint()) == bytes && back.probabilities(l) == dec.probabilities(l);
            } catch (const std::exception& e) {
                ok = false;
                detail += std::string("decoder_oneshot.ini threw: ") + e.what() + "; ";
            }
        }
        pass = pass && ok && trace.loss.size() == kSteps;
        detail += format("decoder_oneshot.ini %dx%d k=%zu%s; ", cfg.net.layers, cfg.net.hidden, layout->k(),
                         ok ? "" : " FAILED");
    }
    return {pass, detail + format("%ld steps at batch %d, %.0fs", kSteps, kBatch, c.seconds())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::tuple<std::string, std::string, std::function<Outcome()>>> criteria{
        {"1", "oracle equivalence", oracle_equivalence},
        {"2", "baseline nc=5 at pd=0.05", [] { return baseline_point("baseline_nc5.ini", 0.05, 3.3e-4, 3e-3); }},
        {"3", "baseline nc=10 at pd=0.027",
         [] { return baseline_point("baseline_nc10.ini", 0.027, 1e-3 / 3.0, 3e-3); }},
        {"4", "gradient correctness", gradients},
        {"5", "desk estimator training", estimator_training},
        {"6", "one-shot decoder vs Viterbi-SDD", oneshot_agreement},
        {"7", "channel statistics", channel_statistics},
        {"8", "sweep determinism", determinism},
        {"table", "full-size configs train and round-trip", table_configs},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [id, title, run] : criteria) {
        if (!only.empty() && !only.count(id))
            continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s [%s] %s: %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
