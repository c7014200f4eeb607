#include "delcode/outer.hpp"

namespace delcode {

OuterCode OuterCode::ldpc(ldpc::ParityCheckMatrix H) {
    OuterCode c;
    c.kind_ = OuterKind::Ldpc;
    c.H_ = std::make_shared<const ldpc::ParityCheckMatrix>(std::move(H));
    c.enc_ = std::make_shared<const ldpc::Encoder>(*c.H_);
    c.k_ = c.enc_->k();
    c.n_ = c.enc_->n();
    return c;
}

OuterCode OuterCode::conv(std::size_t k) {
    if (k == 0)
        throw Error("conv outer code: k must be positive");
    OuterCode c;
    c.kind_ = OuterKind::Conv;
    c.k_ = k;
    c.n_ = 2 * k;
    return c;
}

OuterCode OuterCode::uncoded(std::size_t n) {
    if (n == 0)
        throw Error("uncoded outer code: n must be positive");
    OuterCode c;
    c.kind_ = OuterKind::Uncoded;
    c.k_ = c.n_ = n;
    return c;
}

BitSeq OuterCode::encode(std::span<const std::uint8_t> m) const {
    require_length("outer encode", k_, m.size());
    switch (kind_) {
        case OuterKind::Ldpc:
            return enc_->encode(m);
        case OuterKind::Conv:
            return conv::encode(m);
        case OuterKind::Uncoded:
            return BitSeq(m.begin(), m.end());
    }
    return {};
}

const ldpc::ParityCheckMatrix& OuterCode::parity_check() const {
    if (!H_)
        throw Error("outer code is not LDPC");
    return *H_;
}

const ldpc::Encoder& OuterCode::ldpc_encoder() const {
    if (!enc_)
        throw Error("outer code is not LDPC");
    return *enc_;
}

}  // namespace delcode
