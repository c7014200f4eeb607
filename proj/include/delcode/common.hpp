#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace delcode {

/// Binary sequence, one element per bit, each element 0 or 1.
using BitSeq = std::vector<std::uint8_t>;

/// Per-position log-likelihood ratios, L = log(P(bit=0) / P(bit=1)).
using LlrSeq = std::vector<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LengthMismatch : public Error {
public:
    LengthMismatch(const std::string& what, std::size_t expected, std::size_t got)
        : Error(what + ": expected length " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

inline void require_length(const char* what, std::size_t expected, std::size_t got) {
    if (expected != got)
        throw LengthMismatch(what, expected, got);
}

/// SplitMix64 step; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`; distinct indices give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seeded random source with bit-exact, platform-independent draws.
///
/// The engine is std::mt19937_64, which the standard specifies exactly.
/// std::uniform_real_distribution is implementation-defined, so uniforms are
/// formed from the top 53 bits of each engine output instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() noexcept { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint8_t bit() noexcept { return static_cast<std::uint8_t>(engine_() >> 63); }

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    BitSeq bits(std::size_t n) {
        BitSeq out(n);
        for (auto& b : out)
            b = bit();
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace delcode
