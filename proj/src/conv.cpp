#include "delcode/conv.hpp"

#include <array>
#include <limits>

namespace delcode::conv {

namespace {

// State s = (m[t-1] << 1) | m[t-2].
constexpr int kStates = 4;

struct Branch {
    int next;
    std::uint8_t c0, c1;
};

constexpr Branch branch(int state, std::uint8_t u) {
    const std::uint8_t m1 = static_cast<std::uint8_t>((state >> 1) & 1);
    const std::uint8_t m2 = static_cast<std::uint8_t>(state & 1);
    return Branch{(u << 1) | m1, static_cast<std::uint8_t>(u ^ m2), static_cast<std::uint8_t>(u ^ m1 ^ m2)};
}

// Generic add-compare-select over the (5,7) trellis. `metric(t, c0, c1)` is
// the branch gain to maximise. Among equal-metric survivors the predecessor
// with the smaller state index is kept; the final state is the lowest-index
// maximiser.
template <typename Metric, typename Gain>
BitSeq viterbi(std::size_t steps, Gain gain) {
    constexpr Metric kNeg = std::numeric_limits<Metric>::lowest();
    std::array<Metric, kStates> pm;
    pm.fill(kNeg);
    pm[0] = Metric{0};
    std::vector<std::array<std::int8_t, kStates>> from(steps);

    for (std::size_t t = 0; t < steps; ++t) {
        std::array<Metric, kStates> next;
        next.fill(kNeg);
        auto& prev = from[t];
        prev.fill(-1);
        for (int s = 0; s < kStates; ++s) {
            if (pm[s] == kNeg)
                continue;
            for (std::uint8_t u = 0; u < 2; ++u) {
                const auto b = branch(s, u);
                const Metric cand = pm[s] + gain(t, b.c0, b.c1);
                // States are visited in increasing order, so strict '>' keeps
                // the lower-index predecessor on ties.
                if (prev[b.next] < 0 || cand > next[b.next]) {
                    next[b.next] = cand;
                    prev[b.next] = static_cast<std::int8_t>(s);
                }
            }
        }
        pm = next;
    }

    int best = 0;
    for (int s = 1; s < kStates; ++s)
        if (pm[s] > pm[best])
            best = s;

    BitSeq m(steps);
    int s = best;
    for (std::size_t t = steps; t-- > 0;) {
        m[t] = static_cast<std::uint8_t>((s >> 1) & 1);
        s = from[t][s];
    }
    return m;
}

void require_even(const char* what, std::size_t n) {
    if (n % 2 != 0)
        throw Error(std::string(what) + ": LLR length must be even, got " + std::to_string(n));
}

}  // namespace

BitSeq encode(std::span<const std::uint8_t> m) {
    BitSeq c;
    c.reserve(2 * m.size());
    int state = 0;
    for (auto u : m) {
        const auto b = branch(state, u);
        c.push_back(b.c0);
        c.push_back(b.c1);
        state = b.next;
    }
    return c;
}

BitSeq llr_to_hard(std::span<const double> llrs) {
    BitSeq out(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i)
        out[i] = llrs[i] >= 0.0 ? 0 : 1;
    return out;
}

BitSeq viterbi_sdd(std::span<const double> llrs) {
    require_even("viterbi_sdd", llrs.size());
    return viterbi<double>(llrs.size() / 2, [&](std::size_t t, std::uint8_t c0, std::uint8_t c1) {
        const double a = llrs[2 * t], b = llrs[2 * t + 1];
        return (c0 ? -a : a) + (c1 ? -b : b);
    });
}

BitSeq viterbi_hdd(std::span<const double> llrs) {
    require_even("viterbi_hdd", llrs.size());
    const auto r = llr_to_hard(llrs);
    return viterbi<int>(llrs.size() / 2, [&](std::size_t t, std::uint8_t c0, std::uint8_t c1) {
        return -static_cast<int>((c0 ^ r[2 * t]) + (c1 ^ r[2 * t + 1]));
    });
}

double correlation_metric(std::span<const std::uint8_t> m, std::span<const double> llrs) {
    const auto c = encode(m);
    require_length("correlation_metric", c.size(), llrs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        acc += c[i] ? -llrs[i] : llrs[i];
    return acc;
}

}  // namespace delcode::conv
