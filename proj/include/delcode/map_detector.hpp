#pragma once

#include <algorithm>
#include <cmath>

#include "delcode/common.hpp"
#include "delcode/marker.hpp"

namespace delcode {

/// Known marker bits and uniform-prior coded positions of a frame.
struct TemplateSpec {
    /// -1 for a coded position, otherwise the marker bit value.
    std::vector<std::int8_t> kind;

    std::size_t length() const { return kind.size(); }
    bool is_marker(std::size_t t) const { return kind[t] >= 0; }

    static TemplateSpec from_markers(const MarkerConfig& cfg, std::size_t n);
    static TemplateSpec all_coded(std::size_t T) { return {std::vector<std::int8_t>(T, -1)}; }
};

struct DetectorParams {
    double pd_assumed = 0.0;
    double ps_assumed = 0.0;
    /// Output LLRs are clipped to +-llr_clip; infinity disables clipping.
    double llr_clip = 10.0;

    void validate() const;
};

/// Raised when the observation has zero probability under the assumed
/// parameters (e.g. pd = 0 with R < T).
class InconsistentObservation : public Error {
public:
    using Error::Error;
};

/// (T-R)/T.
double estimate_pd(std::size_t T, std::size_t R);

/// Forward/backward tables over (time t in [0, T], drift d). Row t holds drifts
/// d_lo(t)..d_hi(t) = max(0, t-R)..min(t, T-R). Each row is normalised to sum 1
/// and its log normaliser accumulated, so alpha_t(d) = alpha_row[t][d] * exp(log_alpha_scale[t]).
class DriftLattice {
public:
    DriftLattice(std::size_t T, std::size_t R);

    std::size_t T() const { return T_; }
    std::size_t R() const { return R_; }
    std::size_t d_lo(std::size_t t) const { return t > R_ ? t - R_ : 0; }
    std::size_t d_hi(std::size_t t) const { return std::min(t, T_ - R_); }

    /// Normalised values; out-of-range drifts read as 0.
    double alpha(std::size_t t, std::size_t d) const { return get(alpha_, t, d); }
    double beta(std::size_t t, std::size_t d) const { return get(beta_, t, d); }
    double log_alpha_scale(std::size_t t) const { return log_alpha_scale_[t]; }
    double log_beta_scale(std::size_t t) const { return log_beta_scale_[t]; }

    /// log P(y) = log alpha_T(T-R).
    double log_likelihood() const { return log_alpha_scale_[T_] + std::log(alpha(T_, T_ - R_)); }
    /// log sum_d alpha_t(d) beta_t(d), which equals log P(y) for every t.
    double log_likelihood_at(std::size_t t) const;

private:
    friend DriftLattice forward_backward(std::span<const std::uint8_t>, const TemplateSpec&,
                                         const DetectorParams&);
    double get(const std::vector<std::vector<double>>& table, std::size_t t, std::size_t d) const {
        if (d < d_lo(t) || d > d_hi(t))
            return 0.0;
        return table[t][d - d_lo(t)];
    }
    double& at(std::vector<std::vector<double>>& table, std::size_t t, std::size_t d) {
        return table[t][d - d_lo(t)];
    }

    std::size_t T_, R_;
    std::vector<std::vector<double>> alpha_, beta_;
    std::vector<double> log_alpha_scale_, log_beta_scale_;
};

/// Drift-lattice recursions
///   alpha_t(d)   = pd * alpha_{t-1}(d-1) + (1-pd) * E_t(y_{t-d}) * alpha_{t-1}(d)
///   beta_{t-1}(d) = pd * beta_t(d+1)    + (1-pd) * E_t(y_{t-d}) * beta_t(d)
/// with E_t(b) = 1-ps / ps for a marker bit equal / unequal to b and 1/2 for a
/// coded bit. Throws InconsistentObservation if P(y) = 0.
DriftLattice forward_backward(std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                              const DetectorParams& params);

/// Joint masses P(x_t = 0, y) and P(x_t = 1, y) relative to P(y), i.e. the
/// bit posteriors. For marker positions the template fixes the bit.
struct BitPosterior {
    double p0 = 0.0;
    double p1 = 0.0;
};
std::vector<BitPosterior> posterior_marginals(const DriftLattice& lattice, std::span<const std::uint8_t> y,
                                              const TemplateSpec& tmpl, const DetectorParams& params);

/// Bit LLRs clipped to +-llr_clip. Marker positions emit +clip for a 0 marker
/// bit and -clip for a 1.
LlrSeq posterior_llrs(const DriftLattice& lattice, std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                      const DetectorParams& params);

/// Exhaustive reference: enumerates every survivor set of size R and
/// marginalises bits with their priors. Throws for T > kBruteForceMaxLength.
inline constexpr std::size_t kBruteForceMaxLength = 18;
LlrSeq brute_force_llrs(std::span<const std::uint8_t> y, const TemplateSpec& tmpl, const DetectorParams& params);
/// P(y) from the same enumeration.
double brute_force_likelihood(std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                              const DetectorParams& params);

/// Full detector for a marker-coded frame carrying n coded bits. Without
/// explicit params, pd is estimated from lengths and ps_assumed is used.
LlrSeq map_detect(std::span<const std::uint8_t> y, const MarkerConfig& cfg, std::size_t n,
                  const DetectorParams& params);
LlrSeq map_detect_mismatched(std::span<const std::uint8_t> y, const MarkerConfig& cfg, std::size_t n,
                             double ps_assumed, double llr_clip = 10.0);

}  // namespace delcode
