#pragma once

#include "delcode/common.hpp"

namespace delcode::conv {

/// Rate-1/2, memory-2 feedforward code with generators (5,7) octal:
///   c[2t]   = m[t] ^ m[t-2]
///   c[2t+1] = m[t] ^ m[t-1] ^ m[t-2]
/// Zero initial state, no termination, so n = 2k.
BitSeq encode(std::span<const std::uint8_t> m);

/// 0 when L >= 0, else 1.
BitSeq llr_to_hard(std::span<const double> llrs);

/// Maximises sum_j s(c_j) * L_j with s(0) = +1, s(1) = -1 over paths from
/// state 0 with a free end state.
BitSeq viterbi_sdd(std::span<const double> llrs);

/// Minimum-Hamming-distance Viterbi on llr_to_hard(llrs).
BitSeq viterbi_hdd(std::span<const double> llrs);

/// Correlation metric of a candidate message against LLRs (the quantity
/// viterbi_sdd maximises).
double correlation_metric(std::span<const std::uint8_t> m, std::span<const double> llrs);

}  // namespace delcode::conv
