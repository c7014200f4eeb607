#pragma once

#include "delcode/channel.hpp"
#include "delcode/marker.hpp"
#include "delcode/outer.hpp"

namespace delcode {

/// Transmitter-side structure shared by transmitter and receiver: outer code,
/// interleaver, and marker layout.
struct FrameLayout {
    OuterCode outer;
    MarkerConfig marker;
    Interleaver interleaver;

    FrameLayout(OuterCode o, MarkerConfig m, std::uint64_t interleaver_seed)
        : outer(std::move(o)), marker(std::move(m)), interleaver(Interleaver::make(outer.n(), interleaver_seed)) {
        marker.validate();
    }

    std::size_t k() const { return outer.k(); }
    std::size_t n() const { return outer.n(); }
    std::size_t T() const { return marker.frame_length(outer.n()); }
};

struct Frame {
    BitSeq message;
    BitSeq codeword;
    BitSeq transmitted;
};

/// m -> outer encode -> interleave -> insert markers.
Frame encode_frame(const FrameLayout& layout, BitSeq message);
Frame random_frame(const FrameLayout& layout, Rng& rng);

/// Length-T LLRs in transmission order -> length-n LLRs in codeword order
/// (marker positions dropped, then the interleaver undone).
LlrSeq outer_llrs(const FrameLayout& layout, std::span<const double> llrs);

/// Channel parameters for training: a fixed pair or independent uniform
/// picks from two grids, drawn per frame.
struct ChannelDistribution {
    std::vector<double> pd_grid{0.0};
    std::vector<double> ps_grid{0.0};

    static ChannelDistribution fixed(double pd, double ps) { return {{pd}, {ps}}; }
    ChannelParams sample(Rng& rng) const;
    void validate() const;
};

}  // namespace delcode
