#include <cmath>

#include "delcode/channel.hpp"
#include "doctest.h"

using namespace delcode;

namespace {

// y embeds into x as a subsequence with exactly `flips` mismatches, greedily.
bool is_subsequence(const BitSeq& y, const BitSeq& x) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < x.size() && j < y.size(); ++i)
        if (x[i] == y[j])
            ++j;
    return j == y.size();
}

}  // namespace

TEST_CASE("identity and erasing channels") {
    const BitSeq x{1, 0, 1, 1};
    CHECK(transmit(x, {0.0, 0.0}, 1) == x);
    CHECK(transmit(x, {1.0, 0.0}, 1).empty());
    CHECK(transmit(x, {0.0, 1.0}, 1) == BitSeq{0, 1, 0, 0});
    CHECK(transmit(BitSeq{}, {0.3, 0.3}, 1).empty());
}

TEST_CASE("parameters outside [0,1] are rejected") {
    const BitSeq x{1, 0};
    CHECK_THROWS_AS(transmit(x, {-0.1, 0.0}, 1), Error);
    CHECK_THROWS_AS(transmit(x, {0.0, 1.5}, 1), Error);
    CHECK_THROWS_AS(transmit(x, {std::nan(""), 0.0}, 1), Error);
}

TEST_CASE("same seed gives the same output") {
    Rng r(5);
    const auto x = r.bits(1000);
    CHECK(transmit(x, {0.1, 0.05}, 77) == transmit(x, {0.1, 0.05}, 77));
    CHECK(transmit(x, {0.1, 0.05}, 77) != transmit(x, {0.1, 0.05}, 78));
}

TEST_CASE("event order: one draw for deletion, one more for a survivor's flip") {
    const BitSeq x{0, 1, 1, 0, 1, 0, 0, 1};
    const ChannelParams p{0.4, 0.3};
    Rng draws(123);
    BitSeq expect;
    for (auto b : x) {
        if (draws.uniform() < p.pd)
            continue;
        expect.push_back(draws.uniform() < p.ps ? b ^ 1 : b);
    }
    CHECK(transmit(x, p, 123) == expect);
}

TEST_CASE("without substitutions the output is a subsequence") {
    Rng r(9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = r.bits(200);
        const auto y = transmit(x, {0.2, 0.0}, r);
        CHECK(y.size() <= x.size());
        CHECK(is_subsequence(y, x));
    }
}

TEST_CASE("deletion rate concentrates around pd") {
    Rng r(2024);
    const auto x = r.bits(100000);
    const auto y = transmit(x, {0.05, 0.0}, 3);
    const double ratio = static_cast<double>(y.size()) / x.size();
    CHECK(std::abs(ratio - 0.95) <= 3.0 * std::sqrt(0.05 * 0.95 / 1e5));
}
