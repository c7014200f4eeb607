#include "delcode/marker.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace delcode {

void MarkerConfig::validate() const {
    if (marker.empty())
        throw Error("marker: marker sequence must be nonempty");
    if (nc == 0)
        throw Error("marker: nc must be positive");
    for (auto b : marker)
        if (b > 1)
            throw Error("marker: marker bits must be 0 or 1");
}

Interleaver::Interleaver(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
    std::vector<bool> seen(perm_.size(), false);
    for (auto p : perm_) {
        if (p >= perm_.size() || seen[p])
            throw Error("interleaver: not a permutation");
        seen[p] = true;
    }
}

Interleaver Interleaver::identity(std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    return Interleaver(std::move(perm));
}

Interleaver Interleaver::make(std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw Error("interleaver: n must be positive");
    auto il = identity(n);
    if (seed == 0)
        return il;
    Rng rng(seed);
    // Fisher-Yates
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(il.perm_[i], il.perm_[j]);
    }
    return il;
}

BitSeq Interleaver::interleave(std::span<const std::uint8_t> c) const {
    require_length("interleave", perm_.size(), c.size());
    BitSeq out(c.size());
    for (std::size_t i = 0; i < perm_.size(); ++i)
        out[i] = c[perm_[i]];
    return out;
}

BitSeq Interleaver::deinterleave(std::span<const std::uint8_t> cpi) const {
    require_length("deinterleave", perm_.size(), cpi.size());
    BitSeq out(cpi.size());
    for (std::size_t i = 0; i < perm_.size(); ++i)
        out[perm_[i]] = cpi[i];
    return out;
}

LlrSeq Interleaver::deinterleave_llrs(std::span<const double> llrs) const {
    require_length("deinterleave_llrs", perm_.size(), llrs.size());
    LlrSeq out(llrs.size());
    for (std::size_t i = 0; i < perm_.size(); ++i)
        out[perm_[i]] = llrs[i];
    return out;
}

std::string Interleaver::to_text() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < perm_.size(); ++i)
        os << (i ? " " : "") << perm_[i] + 1;
    os << '\n';
    return os.str();
}

Interleaver Interleaver::from_text(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::size_t> perm;
    long long v;
    while (is >> v) {
        if (v < 1)
            throw Error("interleaver: indices are 1-based, got " + std::to_string(v));
        perm.push_back(static_cast<std::size_t>(v - 1));
    }
    if (!is.eof())
        throw Error("interleaver: non-numeric token in permutation text");
    return Interleaver(std::move(perm));
}

void Interleaver::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw Error("interleaver: cannot write " + path.string());
    out << to_text();
}

Interleaver Interleaver::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("interleaver: cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

BitSeq insert_markers(std::span<const std::uint8_t> cpi, const MarkerConfig& cfg) {
    cfg.validate();
    BitSeq out;
    out.reserve(cfg.frame_length(cpi.size()));
    for (std::size_t i = 0; i < cpi.size(); ++i) {
        out.push_back(cpi[i]);
        if ((i + 1) % cfg.nc == 0)
            out.insert(out.end(), cfg.marker.begin(), cfg.marker.end());
    }
    return out;
}

std::vector<bool> marker_mask(const MarkerConfig& cfg, std::size_t n) {
    cfg.validate();
    std::vector<bool> mask;
    mask.reserve(cfg.frame_length(n));
    for (std::size_t i = 0; i < n; ++i) {
        mask.push_back(false);
        if ((i + 1) % cfg.nc == 0)
            mask.insert(mask.end(), cfg.marker.size(), true);
    }
    return mask;
}

LlrSeq strip_marker_llrs(std::span<const double> llrs, const MarkerConfig& cfg, std::size_t n) {
    const auto mask = marker_mask(cfg, n);
    require_length("strip_marker_llrs", mask.size(), llrs.size());
    LlrSeq out;
    out.reserve(n);
    for (std::size_t t = 0; t < mask.size(); ++t)
        if (!mask[t])
            out.push_back(llrs[t]);
    return out;
}

Rational overall_rate(const MarkerConfig& cfg, std::size_t k, std::size_t n) {
    if (n == 0 || k > n)
        throw Error("overall_rate: need 0 < n and k <= n");
    if (cfg.nc == 0)
        throw Error("overall_rate: nc must be positive");
    const std::uint64_t num = static_cast<std::uint64_t>(cfg.nc) * k;
    const std::uint64_t den = static_cast<std::uint64_t>(cfg.nc + cfg.marker.size()) * n;
    const auto g = std::gcd(num, den);
    if (g == 0)
        return {0, 1};
    return {num / g, den / g};
}

}  // namespace delcode
