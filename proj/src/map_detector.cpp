#include "delcode/map_detector.hpp"

#include <bit>
#include <cmath>

namespace delcode {

namespace {

double emission(const TemplateSpec& tmpl, std::size_t pos, std::uint8_t y, double ps) {
    const auto k = tmpl.kind[pos];
    if (k < 0)
        return 0.5;
    return static_cast<std::uint8_t>(k) == y ? 1.0 - ps : ps;
}

double substitution(std::uint8_t y, std::uint8_t b, double ps) { return y == b ? 1.0 - ps : ps; }

double clipped_llr(double mass0, double mass1, double clip) {
    if (mass0 <= 0.0 && mass1 <= 0.0)
        throw InconsistentObservation("map detector: zero posterior mass");
    double l;
    if (mass1 <= 0.0)
        l = std::numeric_limits<double>::infinity();
    else if (mass0 <= 0.0)
        l = -std::numeric_limits<double>::infinity();
    else
        l = std::log(mass0) - std::log(mass1);
    return std::clamp(l, -clip, clip);
}

double normalise(std::vector<double>& row) {
    double sum = 0.0;
    for (double v : row)
        sum += v;
    if (!(sum > 0.0))
        return 0.0;
    for (double& v : row)
        v /= sum;
    return sum;
}

}  // namespace

TemplateSpec TemplateSpec::from_markers(const MarkerConfig& cfg, std::size_t n) {
    cfg.validate();
    TemplateSpec tmpl;
    tmpl.kind.reserve(cfg.frame_length(n));
    for (std::size_t i = 0; i < n; ++i) {
        tmpl.kind.push_back(-1);
        if ((i + 1) % cfg.nc == 0)
            for (auto b : cfg.marker)
                tmpl.kind.push_back(static_cast<std::int8_t>(b));
    }
    return tmpl;
}

void DetectorParams::validate() const {
    if (!(pd_assumed >= 0.0 && pd_assumed <= 1.0))
        throw Error("detector: pd_assumed must lie in [0, 1]");
    if (!(ps_assumed >= 0.0 && ps_assumed <= 1.0))
        throw Error("detector: ps_assumed must lie in [0, 1]");
    if (!(llr_clip > 0.0))
        throw Error("detector: llr_clip must be positive");
}

double estimate_pd(std::size_t T, std::size_t R) {
    if (T == 0)
        throw Error("estimate_pd: T must be positive");
    if (R > T)
        throw Error("estimate_pd: R exceeds T");
    return static_cast<double>(T - R) / static_cast<double>(T);
}

DriftLattice::DriftLattice(std::size_t T, std::size_t R)
    : T_(T), R_(R), alpha_(T + 1), beta_(T + 1), log_alpha_scale_(T + 1, 0.0), log_beta_scale_(T + 1, 0.0) {
    if (R > T)
        throw Error("drift lattice: received length exceeds transmitted length");
    for (std::size_t t = 0; t <= T; ++t) {
        alpha_[t].assign(d_hi(t) - d_lo(t) + 1, 0.0);
        beta_[t].assign(d_hi(t) - d_lo(t) + 1, 0.0);
    }
}

double DriftLattice::log_likelihood_at(std::size_t t) const {
    double s = 0.0;
    for (std::size_t d = d_lo(t); d <= d_hi(t); ++d)
        s += alpha(t, d) * beta(t, d);
    return std::log(s) + log_alpha_scale_[t] + log_beta_scale_[t];
}

DriftLattice forward_backward(std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                              const DetectorParams& params) {
    params.validate();
    const std::size_t T = tmpl.length();
    const std::size_t R = y.size();
    if (R > T)
        throw Error("forward_backward: received length " + std::to_string(R) + " exceeds frame length " +
                    std::to_string(T));
    const double pd = params.pd_assumed, ps = params.ps_assumed;
    DriftLattice L(T, R);

    L.at(L.alpha_, 0, 0) = 1.0;
    for (std::size_t t = 1; t <= T; ++t) {
        auto& row = L.alpha_[t];
        for (std::size_t d = L.d_lo(t); d <= L.d_hi(t); ++d) {
            double v = 0.0;
            if (d >= 1)
                v += pd * L.alpha(t - 1, d - 1);
            if (d < t)  // bit t survives as y_{t-d}
                v += (1.0 - pd) * emission(tmpl, t - 1, y[t - d - 1], ps) * L.alpha(t - 1, d);
            L.at(L.alpha_, t, d) = v;
        }
        const double c = normalise(row);
        if (c == 0.0)
            throw InconsistentObservation("map detector: observation impossible under assumed parameters");
        L.log_alpha_scale_[t] = L.log_alpha_scale_[t - 1] + std::log(c);
    }

    L.at(L.beta_, T, T - R) = 1.0;
    for (std::size_t t = T; t >= 1; --t) {
        for (std::size_t d = L.d_lo(t - 1); d <= L.d_hi(t - 1); ++d) {
            double v = pd * L.beta(t, d + 1);
            if (d < t && t - d <= R)
                v += (1.0 - pd) * emission(tmpl, t - 1, y[t - d - 1], ps) * L.beta(t, d);
            L.at(L.beta_, t - 1, d) = v;
        }
        const double c = normalise(L.beta_[t - 1]);
        if (c == 0.0)
            throw InconsistentObservation("map detector: observation impossible under assumed parameters");
        L.log_beta_scale_[t - 1] = L.log_beta_scale_[t] + std::log(c);
    }
    return L;
}

namespace {

// Unnormalised masses in the scaled domain of (alpha_{t-1}, beta_t).
void coded_masses(const DriftLattice& L, std::span<const std::uint8_t> y, std::size_t t, double pd, double ps,
                  double& s0, double& s1) {
    s0 = s1 = 0.0;
    const std::size_t R = y.size();
    for (std::size_t d = L.d_lo(t - 1); d <= L.d_hi(t - 1); ++d) {
        const double a = L.alpha(t - 1, d);
        if (a == 0.0)
            continue;
        const double del = pd * L.beta(t, d + 1);
        double keep0 = 0.0, keep1 = 0.0;
        if (d < t && t - d <= R) {
            const double b = (1.0 - pd) * L.beta(t, d);
            keep0 = b * substitution(y[t - d - 1], 0, ps);
            keep1 = b * substitution(y[t - d - 1], 1, ps);
        }
        s0 += a * 0.5 * (del + keep0);
        s1 += a * 0.5 * (del + keep1);
    }
}

}  // namespace

std::vector<BitPosterior> posterior_marginals(const DriftLattice& L, std::span<const std::uint8_t> y,
                                              const TemplateSpec& tmpl, const DetectorParams& params) {
    params.validate();
    const std::size_t T = tmpl.length();
    if (L.T() != T || L.R() != y.size())
        throw Error("posterior_marginals: lattice does not match inputs");
    const double logp = L.log_likelihood();
    std::vector<BitPosterior> out(T);
    for (std::size_t t = 1; t <= T; ++t) {
        if (tmpl.is_marker(t - 1)) {
            out[t - 1] = tmpl.kind[t - 1] == 0 ? BitPosterior{1.0, 0.0} : BitPosterior{0.0, 1.0};
            continue;
        }
        double s0, s1;
        coded_masses(L, y, t, params.pd_assumed, params.ps_assumed, s0, s1);
        const double scale = std::exp(L.log_alpha_scale(t - 1) + L.log_beta_scale(t) - logp);
        out[t - 1] = {s0 * scale, s1 * scale};
    }
    return out;
}

LlrSeq posterior_llrs(const DriftLattice& L, std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                      const DetectorParams& params) {
    params.validate();
    const std::size_t T = tmpl.length();
    if (L.T() != T || L.R() != y.size())
        throw Error("posterior_llrs: lattice does not match inputs");
    LlrSeq out(T);
    for (std::size_t t = 1; t <= T; ++t) {
        if (tmpl.is_marker(t - 1)) {
            out[t - 1] = tmpl.kind[t - 1] == 0 ? params.llr_clip : -params.llr_clip;
            continue;
        }
        double s0, s1;
        coded_masses(L, y, t, params.pd_assumed, params.ps_assumed, s0, s1);
        out[t - 1] = clipped_llr(s0, s1, params.llr_clip);
    }
    return out;
}

namespace {

struct Enumeration {
    double total = 0.0;
    std::vector<double> mass0, mass1;
};

Enumeration enumerate(std::span<const std::uint8_t> y, const TemplateSpec& tmpl, const DetectorParams& params) {
    params.validate();
    const std::size_t T = tmpl.length();
    const std::size_t R = y.size();
    if (T > kBruteForceMaxLength)
        throw Error("brute_force_llrs: instance too large (T = " + std::to_string(T) + ")");
    if (R > T)
        throw Error("brute_force_llrs: received length exceeds frame length");
    const double pd = params.pd_assumed, ps = params.ps_assumed;
    const double path = std::pow(pd, static_cast<double>(T - R)) * std::pow(1.0 - pd, static_cast<double>(R));

    Enumeration e;
    e.mass0.assign(T, 0.0);
    e.mass1.assign(T, 0.0);
    std::vector<double> w0(T), w1(T), tot(T);
    for (std::uint32_t mask = 0; mask < (1u << T); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != R)
            continue;
        // Position j survives iff bit j of mask is set; survivors map to y in order.
        std::size_t k = 0;
        for (std::size_t j = 0; j < T; ++j) {
            const double prior0 = tmpl.is_marker(j) ? (tmpl.kind[j] == 0 ? 1.0 : 0.0) : 0.5;
            const double prior1 = 1.0 - prior0;
            if (mask >> j & 1u) {
                w0[j] = prior0 * substitution(y[k], 0, ps);
                w1[j] = prior1 * substitution(y[k], 1, ps);
                ++k;
            } else {
                w0[j] = prior0;
                w1[j] = prior1;
            }
            tot[j] = w0[j] + w1[j];
        }
        double all = path;
        for (std::size_t j = 0; j < T; ++j)
            all *= tot[j];
        e.total += all;
        for (std::size_t t = 0; t < T; ++t) {
            double others = path;
            for (std::size_t j = 0; j < T; ++j)
                if (j != t)
                    others *= tot[j];
            e.mass0[t] += others * w0[t];
            e.mass1[t] += others * w1[t];
        }
    }
    return e;
}

}  // namespace

LlrSeq brute_force_llrs(std::span<const std::uint8_t> y, const TemplateSpec& tmpl, const DetectorParams& params) {
    const auto e = enumerate(y, tmpl, params);
    LlrSeq out(tmpl.length());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = clipped_llr(e.mass0[t], e.mass1[t], params.llr_clip);
    return out;
}

double brute_force_likelihood(std::span<const std::uint8_t> y, const TemplateSpec& tmpl,
                              const DetectorParams& params) {
    return enumerate(y, tmpl, params).total;
}

LlrSeq map_detect(std::span<const std::uint8_t> y, const MarkerConfig& cfg, std::size_t n,
                  const DetectorParams& params) {
    const auto tmpl = TemplateSpec::from_markers(cfg, n);
    const auto lattice = forward_backward(y, tmpl, params);
    return posterior_llrs(lattice, y, tmpl, params);
}

LlrSeq map_detect_mismatched(std::span<const std::uint8_t> y, const MarkerConfig& cfg, std::size_t n,
                             double ps_assumed, double llr_clip) {
    DetectorParams p;
    p.pd_assumed = estimate_pd(cfg.frame_length(n), y.size());
    p.ps_assumed = ps_assumed;
    p.llr_clip = llr_clip;
    return map_detect(y, cfg, n, p);
}

}  // namespace delcode
