// delcode command line: training, evaluation, sweeps and self checks.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "delcode/experiment.hpp"
#include "delcode/verify.hpp"

using namespace delcode;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    int workers = 0;  // 0: keep the config value
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
    cmd->add_option("--out", c.out, "Output path");
    cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::NonNegativeNumber);
}

/// Writes to --out if given, else stdout.
void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f)
        throw Error("cannot open '" + out + "' for writing");
    f << text;
    if (!f)
        throw Error("write to '" + out + "' failed");
}

std::uint64_t section_seed(const IniConfig& ini, const std::string& sec, const Common& c) {
    if (c.seed)
        return *c.seed;
    const auto s = ini.get_int(sec, "seed", 1);
    if (s < 0)
        throw ConfigError("config key '" + sec + ".seed': must be non-negative");
    return static_cast<std::uint64_t>(s);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

ExperimentConfig load_experiment(const std::string& path, const Common& c, bool timing) {
    auto cfg = experiment_from_config(IniConfig::load(path));
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.workers > 0)
        cfg.workers = c.workers;
    if (timing)
        cfg.timing = true;
    cfg.validate();
    return cfg;
}

void progress(long step, long total, double loss, std::chrono::steady_clock::time_point start) {
    if (step % 100 == 0 || step + 1 == total) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "step %ld/%ld loss %.5f (%.1fs)\n", step + 1, total, loss, s);
    }
}

int cmd_train_estimator(const std::string& path, const Common& c, const std::string& resume) {
    const auto ini = IniConfig::load(path);
    const auto layout = layout_from_config(ini);
    const auto cfg = estimator_config_from(ini);
    const auto seed = section_seed(ini, "estimator", c);
    const std::string out = c.out.empty() ? "estimator.ckpt" : c.out;
    std::fprintf(stderr, "estimator: T=%zu n=%zu k=%zu steps=%ld batch=%d\n", layout->T(), layout->n(), layout->k(),
                 cfg.steps, cfg.batch);
    TrainTrace trace;
    const auto start = std::chrono::steady_clock::now();
    auto cb = [&](long step, double loss) { progress(step, cfg.steps, loss, start); };
    auto est = [&] {
        if (resume.empty())
            return train_estimator(cfg, *layout, seed, &trace, cb);
        auto e = LlrEstimator::from_checkpoint(nn::load_checkpoint(resume));
        train_estimator(e, cfg, *layout, seed, &trace, cb);
        return e;
    }();
    auto ck = est.to_checkpoint();
    ck.meta["steps"] = std::to_string(cfg.steps);
    ck.meta["seed"] = std::to_string(seed);
    if (!trace.loss.empty())
        ck.meta["final_loss"] = fmt(trace.loss.back());
    nn::save_checkpoint(ck, out);
    std::fprintf(stderr, "wrote %s\n", out.c_str());
    return 0;
}

int cmd_train_decoder(const std::string& path, const Common& c) {
    const auto ini = IniConfig::load(path);
    const auto layout = layout_from_config(ini);
    const auto cfg = decoder_config_from(ini);
    const auto source = decoder_training_source(ini);
    const auto seed = section_seed(ini, "decoder_training", c);
    const std::string out = c.out.empty() ? "decoder.ckpt" : c.out;
    std::fprintf(stderr, "decoder: k=%zu steps=%ld batch=%d source=%s\n", layout->k(), cfg.steps, cfg.batch,
                 source.is_bcjr() ? "bcjr" : "bigru");
    TrainTrace trace;
    const auto start = std::chrono::steady_clock::now();
    auto dec = train_decoder(cfg, *layout, source, seed, &trace,
                             [&](long step, double loss) { progress(step, cfg.steps, loss, start); });
    auto ck = dec.to_checkpoint();
    ck.meta["steps"] = std::to_string(cfg.steps);
    ck.meta["seed"] = std::to_string(seed);
    if (!trace.loss.empty())
        ck.meta["final_loss"] = fmt(trace.loss.back());
    nn::save_checkpoint(ck, out);
    std::fprintf(stderr, "wrote %s\n", out.c_str());
    return 0;
}

int cmd_eval(const std::string& path, const Common& c, bool timing, std::optional<double> pd,
             std::optional<double> ps) {
    const auto cfg = load_experiment(path, c, timing);
    const double p_d = pd.value_or(cfg.pd_grid.front());
    const double p_s = ps.value_or(cfg.ps_grid.front());
    std::optional<double> assumed;
    if (!cfg.assumed_ps.empty())
        assumed = cfg.assumed_ps.front();
    const auto pt = run_point(cfg, p_d, p_s, assumed);
    emit(c.out, std::string(kCsvHeader) + "\n" + csv_row(pt) + "\n");
    return 0;
}

int cmd_sweep(const std::string& path, const Common& c, bool timing) {
    const auto cfg = load_experiment(path, c, timing);
    const auto rows = run_sweep(cfg, [](const CurvePoint& p) { std::fprintf(stderr, "%s\n", csv_row(p).c_str()); });
    std::ostringstream os;
    write_csv(os, rows);
    emit(c.out, os.str());
    return 0;
}

int cmd_oracle(const Common& c, long instances) {
    OracleSuiteConfig cfg;
    cfg.instances = instances;
    const auto start = std::chrono::steady_clock::now();
    const auto rep = run_oracle_suite(cfg, c.seed.value_or(1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s oracle-check: %ld instances, %ld failures, max |dLLR| = %.3g (tol %.0e), %.2fs\n",
                  rep.pass() ? "PASS" : "FAIL", rep.instances, rep.failures, rep.max_abs_deviation, rep.tolerance,
                  secs);
    emit(c.out, buf);
    return rep.pass() ? 0 : 2;
}

int cmd_gradcheck(const Common& c, double tol) {
    std::string text;
    bool ok = true;
    const std::uint64_t seed = c.seed.value_or(3);
    for (const auto& [name, net] : {std::pair{"estimator", desk_estimator_net()}, {"decoder", desk_decoder_net()}}) {
        GradcheckConfig g;
        g.net = net;
        const auto start = std::chrono::steady_clock::now();
        const auto r = gradient_check(name, g, derive_seed(seed, name == std::string("estimator") ? 0 : 1));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = r.max_rel_error < tol;
        ok = ok && pass;
        char buf[512];
        std::snprintf(buf, sizeof buf, "%s gradcheck %s: %zu parameters, max rel error %.3g at %s (tol %.0e), %.1fs\n",
                      pass ? "PASS" : "FAIL", name, r.parameters, r.max_rel_error, r.worst.c_str(), tol, secs);
        std::fputs(buf, stderr);
        text += buf;
    }
    if (!c.out.empty())
        emit(c.out, text);
    return ok ? 0 : 2;
}

int cmd_info(const std::string& path, const Common& c) {
    auto ck = nn::load_checkpoint(path);
    std::ostringstream os;
    os << nn::checkpoint_header(ck);
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(nn::checkpoint_digest(ck)));
    os << "parameters " << ck.model.parameter_count() << "\n";
    os << "digest " << digest << "\n";
    emit(c.out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marker-coded deletion channel: detectors, decoders and Monte Carlo sweeps"};
    app.require_subcommand(1);

    Common common;
    std::string config, checkpoint, resume;
    bool timing = false;
    std::optional<double> pd, ps;
    long instances = 1000;
    double tol = 1e-4;

    auto* te = app.add_subcommand("train-estimator", "Train a BI-GRU LLR estimator");
    te->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    te->add_option("--resume", resume, "Continue from this estimator checkpoint")->check(CLI::ExistingFile);
    add_common(te, common);

    auto* td = app.add_subcommand("train-decoder", "Train a one-shot BI-GRU outer decoder");
    td->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    add_common(td, common);

    auto* ev = app.add_subcommand("eval", "Simulate one channel point");
    ev->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    ev->add_option("--pd", pd, "Deletion probability (default: first grid value)");
    ev->add_option("--ps", ps, "Substitution probability (default: first grid value)");
    ev->add_flag("--timing", timing, "Fill the wall_time column");
    add_common(ev, common);

    auto* sw = app.add_subcommand("sweep", "Simulate the whole channel grid, CSV output");
    sw->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    sw->add_flag("--timing", timing, "Fill the wall_time column");
    add_common(sw, common);

    auto* oc = app.add_subcommand("oracle-check", "MAP detector against exhaustive enumeration");
    oc->add_option("--instances", instances, "Random instances")->check(CLI::PositiveNumber);
    add_common(oc, common);

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the network gradients");
    gc->add_option("--tol", tol, "Relative error tolerance");
    add_common(gc, common);

    auto* in = app.add_subcommand("info", "Describe a checkpoint");
    in->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    add_common(in, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*te)
            return cmd_train_estimator(config, common, resume);
        if (*td)
            return cmd_train_decoder(config, common);
        if (*ev)
            return cmd_eval(config, common, timing, pd, ps);
        if (*sw)
            return cmd_sweep(config, common, timing);
        if (*oc)
            return cmd_oracle(common, instances);
        if (*gc)
            return cmd_gradcheck(common, tol);
        if (*in)
            return cmd_info(checkpoint, common);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
