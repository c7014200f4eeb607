#pragma once

#include "delcode/common.hpp"

namespace delcode {

/// I.i.d. deletion/substitution channel parameters.
struct ChannelParams {
    double pd = 0.0;  ///< deletion probability
    double ps = 0.0;  ///< substitution probability of a surviving bit

    void validate() const;
};

/// Sends `x` through the channel. Each bit consumes one uniform draw for the
/// deletion decision and, if it survives, one more for the flip decision.
BitSeq transmit(std::span<const std::uint8_t> x, const ChannelParams& params, Rng& rng);
BitSeq transmit(std::span<const std::uint8_t> x, const ChannelParams& params, std::uint64_t seed);

}  // namespace delcode
