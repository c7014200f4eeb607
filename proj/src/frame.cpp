#include "delcode/frame.hpp"

namespace delcode {

Frame encode_frame(const FrameLayout& layout, BitSeq message) {
    Frame f;
    f.codeword = layout.outer.encode(message);
    f.message = std::move(message);
    f.transmitted = insert_markers(layout.interleaver.interleave(f.codeword), layout.marker);
    return f;
}

Frame random_frame(const FrameLayout& layout, Rng& rng) { return encode_frame(layout, rng.bits(layout.k())); }

LlrSeq outer_llrs(const FrameLayout& layout, std::span<const double> llrs) {
    const auto stripped = strip_marker_llrs(llrs, layout.marker, layout.n());
    return layout.interleaver.deinterleave_llrs(stripped);
}

ChannelParams ChannelDistribution::sample(Rng& rng) const {
    // Both draws are always consumed so the stream layout does not depend on grid sizes.
    const auto i = rng.below(pd_grid.size());
    const auto j = rng.below(ps_grid.size());
    return {pd_grid[i], ps_grid[j]};
}

void ChannelDistribution::validate() const {
    if (pd_grid.empty() || ps_grid.empty())
        throw Error("channel distribution: grids must be nonempty");
    for (double pd : pd_grid)
        for (double ps : ps_grid)
            ChannelParams{pd, ps}.validate();
}

}  // namespace delcode
