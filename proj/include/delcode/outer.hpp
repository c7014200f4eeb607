#pragma once

#include <memory>

#include "delcode/conv.hpp"
#include "delcode/ldpc.hpp"

namespace delcode {

enum class OuterKind { Ldpc, Conv, Uncoded };

/// The outer code of the concatenated scheme: an LDPC code from an alist
/// file, the (5,7) convolutional code, or no code at all.
class OuterCode {
public:
    static OuterCode ldpc(ldpc::ParityCheckMatrix H);
    static OuterCode conv(std::size_t k);
    static OuterCode uncoded(std::size_t n);

    OuterKind kind() const { return kind_; }
    std::size_t k() const { return k_; }
    std::size_t n() const { return n_; }

    BitSeq encode(std::span<const std::uint8_t> m) const;

    /// Only valid for kind() == Ldpc.
    const ldpc::ParityCheckMatrix& parity_check() const;
    const ldpc::Encoder& ldpc_encoder() const;

private:
    OuterKind kind_ = OuterKind::Uncoded;
    std::size_t k_ = 0, n_ = 0;
    std::shared_ptr<const ldpc::ParityCheckMatrix> H_;
    std::shared_ptr<const ldpc::Encoder> enc_;
};

}  // namespace delcode
