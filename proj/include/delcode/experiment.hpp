#pragma once

#include <iosfwd>
#include <memory>

#include "delcode/config.hpp"
#include "delcode/detector.hpp"
#include "delcode/oneshot.hpp"

namespace delcode {

enum class OuterDecoderKind { Spa, ViterbiSdd, ViterbiHdd, Bigru, Hard };

OuterDecoderKind parse_outer_decoder(const std::string& s);
std::string to_string(OuterDecoderKind k);

struct StoppingRule {
    long max_frames = 100000;
    long min_frame_errors = 100;
};

/// Everything needed to simulate one setup end to end.
struct ExperimentConfig {
    std::shared_ptr<const FrameLayout> layout;
    Detector detector = Detector::bcjr({});
    OuterDecoderKind decoder = OuterDecoderKind::Spa;
    int spa_max_iter = 100;
    std::shared_ptr<const OneShotDecoder> oneshot;
    std::vector<double> pd_grid{0.0};
    std::vector<double> ps_grid{0.0};
    /// Receiver-side substitution probabilities for the MAP detector; empty
    /// means the detector uses the true (or fixed) value.
    std::vector<double> assumed_ps;
    StoppingRule stopping;
    std::uint64_t seed = 1;
    int workers = 1;
    bool timing = false;

    void validate() const;
};

/// Builds the frame layout from [code], [marker] and [interleaver].
std::shared_ptr<const FrameLayout> layout_from_config(const IniConfig& ini);
/// Full experiment from [code] [marker] [interleaver] [detector] [decoder] [channel] [sim].
ExperimentConfig experiment_from_config(const IniConfig& ini);
/// Training settings from [estimator].
EstimatorConfig estimator_config_from(const IniConfig& ini);
/// Training settings from [decoder_training].
DecoderConfig decoder_config_from(const IniConfig& ini);
/// LLR source for decoder training from [decoder_training] source (+ [detector]).
Detector decoder_training_source(const IniConfig& ini);

struct FrameOutcome {
    long bit_errors = 0;
    bool frame_error = false;
};

/// Message -> outer encode -> interleave -> markers -> channel -> detect ->
/// strip/deinterleave -> outer decode -> compare. The frame's randomness comes
/// only from `frame_seed`.
FrameOutcome run_frame(const ExperimentConfig& cfg, const ChannelParams& channel, std::optional<double> assumed_ps,
                       std::uint64_t frame_seed);

struct CurvePoint {
    double pd = 0.0;
    double ps = 0.0;
    /// Receiver-side ps of the MAP detector; -1 when the detector is neural.
    double assumed_ps = 0.0;
    long frames = 0;
    long bit_errors = 0;
    long frame_errors = 0;
    double ber = 0.0;
    double fer = 0.0;
    double wall_time = 0.0;
};

/// Simulates frames 0, 1, 2, ... (seed derived from (cfg.seed, index)) until
/// min_frame_errors frame errors or max_frames frames, at least one frame.
/// The result does not depend on cfg.workers.
CurvePoint run_point(const ExperimentConfig& cfg, double pd, double ps, std::optional<double> assumed_ps = {});

/// Cartesian product of the grids and assumed_ps list, sorted by (pd, ps, assumed_ps).
std::vector<CurvePoint> run_sweep(const ExperimentConfig& cfg,
                                  const std::function<void(const CurvePoint&)>& on_point = {});

inline constexpr const char* kCsvHeader = "pd,ps,assumed_ps,frames,bit_errors,frame_errors,ber,fer,wall_time";
std::string csv_row(const CurvePoint& p);
void write_csv(std::ostream& os, const std::vector<CurvePoint>& points);

}  // namespace delcode
