#pragma once

#include <cstdint>
#include <filesystem>
#include <numeric>

#include "delcode/common.hpp"

namespace delcode {

/// Marker layout: `marker` is appended after every complete block of `nc`
/// coded bits. A trailing partial block gets no marker.
struct MarkerConfig {
    BitSeq marker{0, 1};
    std::size_t nc = 5;

    void validate() const;
    std::size_t num_markers(std::size_t n) const { return n / nc; }
    /// Transmitted length T for n coded bits.
    std::size_t frame_length(std::size_t n) const { return n + marker.size() * num_markers(n); }
};

/// Permutation on {0..n-1}. interleave() places c[perm[i]] at output position i.
class Interleaver {
public:
    Interleaver() = default;
    explicit Interleaver(std::vector<std::size_t> perm);

    /// Uniform random permutation from the seed; seed 0 gives the identity.
    static Interleaver make(std::size_t n, std::uint64_t seed);
    static Interleaver identity(std::size_t n);

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::size_t>& perm() const { return perm_; }

    BitSeq interleave(std::span<const std::uint8_t> c) const;
    BitSeq deinterleave(std::span<const std::uint8_t> cpi) const;
    LlrSeq deinterleave_llrs(std::span<const double> llrs) const;

    /// Whitespace-separated 1-based indices.
    std::string to_text() const;
    static Interleaver from_text(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static Interleaver load(const std::filesystem::path& path);

private:
    std::vector<std::size_t> perm_;
};

BitSeq insert_markers(std::span<const std::uint8_t> cpi, const MarkerConfig& cfg);

/// True at marker positions of a frame carrying n coded bits.
std::vector<bool> marker_mask(const MarkerConfig& cfg, std::size_t n);

/// LLRs at the non-marker positions, in order.
LlrSeq strip_marker_llrs(std::span<const double> llrs, const MarkerConfig& cfg, std::size_t n);

/// Exact rational p/q in lowest terms.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Nominal overall rate nc*k / ((nc + Nm) * n).
Rational overall_rate(const MarkerConfig& cfg, std::size_t k, std::size_t n);

}  // namespace delcode
