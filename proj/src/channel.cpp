#include "delcode/channel.hpp"

namespace delcode {

void ChannelParams::validate() const {
    if (!(pd >= 0.0 && pd <= 1.0))
        throw Error("channel: pd must lie in [0, 1], got " + std::to_string(pd));
    if (!(ps >= 0.0 && ps <= 1.0))
        throw Error("channel: ps must lie in [0, 1], got " + std::to_string(ps));
}

BitSeq transmit(std::span<const std::uint8_t> x, const ChannelParams& params, Rng& rng) {
    params.validate();
    BitSeq y;
    y.reserve(x.size());
    for (auto bit : x) {
        if (rng.uniform() < params.pd)
            continue;
        const bool flip = rng.uniform() < params.ps;
        y.push_back(static_cast<std::uint8_t>(bit ^ static_cast<std::uint8_t>(flip)));
    }
    return y;
}

BitSeq transmit(std::span<const std::uint8_t> x, const ChannelParams& params, std::uint64_t seed) {
    Rng rng(seed);
    return transmit(x, params, rng);
}

}  // namespace delcode
