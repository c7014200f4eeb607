#include "delcode/detector.hpp"

namespace delcode {

Detector Detector::bcjr(BcjrSettings s) {
    Detector d;
    d.bcjr_ = s;
    return d;
}

Detector Detector::bigru(std::shared_ptr<const LlrEstimator> est) {
    if (!est)
        throw Error("detector: null estimator");
    Detector d;
    d.estimator_ = std::move(est);
    return d;
}

DetectorParams Detector::params_for(std::size_t T, std::size_t R, const ChannelParams& truth) const {
    DetectorParams p;
    p.pd_assumed = bcjr_.estimate_pd ? estimate_pd(T, R) : bcjr_.pd_assumed.value_or(truth.pd);
    p.ps_assumed = bcjr_.ps_assumed.value_or(truth.ps);
    p.llr_clip = bcjr_.llr_clip;
    return p;
}

LlrSeq Detector::detect(std::span<const std::uint8_t> y, const FrameLayout& layout,
                        const ChannelParams& truth) const {
    if (estimator_) {
        if (estimator_->T() != layout.T())
            throw Error("detector: estimator trained for T = " + std::to_string(estimator_->T()) +
                        ", frame has T = " + std::to_string(layout.T()));
        return estimator_->estimate_llrs(y);
    }
    const auto p = params_for(layout.T(), y.size(), truth);
    try {
        return map_detect(y, layout.marker, layout.n(), p);
    } catch (const InconsistentObservation&) {
        return LlrSeq(layout.T(), 0.0);
    }
}

std::vector<LlrSeq> Detector::detect_batch(const std::vector<BitSeq>& ys, const FrameLayout& layout,
                                           const std::vector<ChannelParams>& truth) const {
    if (truth.size() != ys.size())
        throw Error("detector: one channel parameter set per frame required");
    if (estimator_) {
        if (estimator_->T() != layout.T())
            throw Error("detector: estimator/frame length mismatch");
        return estimator_->estimate_batch(ys);
    }
    std::vector<LlrSeq> out;
    out.reserve(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i)
        out.push_back(detect(ys[i], layout, truth[i]));
    return out;
}

}  // namespace delcode
