#pragma once

#include <memory>
#include <optional>

#include "delcode/estimator.hpp"
#include "delcode/map_detector.hpp"

namespace delcode {

/// Produces length-T bit LLRs for received frames, either with the
/// drift-lattice MAP detector or a trained BI-GRU estimator.
class Detector {
public:
    /// MAP detector. Unset fields fall back to the true channel parameters;
    /// estimate_pd replaces pd with (T-R)/T per frame.
    struct BcjrSettings {
        std::optional<double> pd_assumed;
        std::optional<double> ps_assumed;
        bool estimate_pd = false;
        double llr_clip = 10.0;
    };

    static Detector bcjr(BcjrSettings s);
    static Detector bigru(std::shared_ptr<const LlrEstimator> est);

    bool is_bcjr() const { return !estimator_; }
    const BcjrSettings& bcjr_settings() const { return bcjr_; }
    const LlrEstimator* estimator() const { return estimator_.get(); }

    /// Zero-probability observations under the assumed parameters yield
    /// all-zero (uninformative) LLRs instead of an error.
    LlrSeq detect(std::span<const std::uint8_t> y, const FrameLayout& layout, const ChannelParams& truth) const;
    std::vector<LlrSeq> detect_batch(const std::vector<BitSeq>& ys, const FrameLayout& layout,
                                     const std::vector<ChannelParams>& truth) const;

    DetectorParams params_for(std::size_t T, std::size_t R, const ChannelParams& truth) const;

private:
    BcjrSettings bcjr_;
    std::shared_ptr<const LlrEstimator> estimator_;
};

}  // namespace delcode
