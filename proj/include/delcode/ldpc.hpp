#pragma once

#include <filesystem>
#include <string_view>

#include "delcode/common.hpp"

namespace delcode::ldpc {

enum class AlistErrorKind {
    MalformedHeader,
    Truncated,
    DegreeMismatch,
    IndexOutOfRange,
    DuplicateEdge,
    Inconsistent,
};

class AlistError : public Error {
public:
    AlistError(AlistErrorKind kind, const std::string& what) : Error("alist: " + what), kind_(kind) {}
    AlistErrorKind kind() const { return kind_; }

private:
    AlistErrorKind kind_;
};

/// Sparse parity-check matrix kept as adjacency lists in both directions.
/// Edge e joins check `edge_check[e]` and variable `edge_var[e]`; edges are
/// numbered in check-major order.
class ParityCheckMatrix {
public:
    ParityCheckMatrix(std::size_t num_checks, std::size_t num_vars,
                      std::vector<std::vector<std::size_t>> vars_of_check);

    std::size_t num_checks() const { return vars_of_check_.size(); }
    std::size_t num_vars() const { return num_vars_; }
    std::size_t num_edges() const { return edge_var_.size(); }

    const std::vector<std::size_t>& vars_of(std::size_t check) const { return vars_of_check_[check]; }
    const std::vector<std::size_t>& checks_of(std::size_t var) const { return checks_of_var_[var]; }
    /// Edge ids incident to each check / variable.
    const std::vector<std::size_t>& check_edges(std::size_t check) const { return check_edges_[check]; }
    const std::vector<std::size_t>& var_edges(std::size_t var) const { return var_edges_[var]; }
    std::size_t edge_var(std::size_t e) const { return edge_var_[e]; }

    bool entry(std::size_t check, std::size_t var) const;
    std::vector<std::uint8_t> syndrome(std::span<const std::uint8_t> c) const;
    bool is_codeword(std::span<const std::uint8_t> c) const;

private:
    std::size_t num_vars_;
    std::vector<std::vector<std::size_t>> vars_of_check_;
    std::vector<std::vector<std::size_t>> checks_of_var_;
    std::vector<std::vector<std::size_t>> check_edges_;
    std::vector<std::vector<std::size_t>> var_edges_;
    std::vector<std::size_t> edge_var_;
};

/// Parses MacKay alist text:
///   n m / max_col_deg max_row_deg / n column degrees / m row degrees /
///   n lines of 1-based row indices / m lines of 1-based column indices,
/// where index lists may be zero-padded to the maximum degree.
ParityCheckMatrix parse_alist(std::string_view text);
ParityCheckMatrix load_alist(const std::filesystem::path& path);
std::string to_alist(const ParityCheckMatrix& H);

/// Systematic encoder from GF(2) elimination of H. Message bits occupy the
/// non-pivot (information) columns; pivot columns carry parity.
class Encoder {
public:
    explicit Encoder(const ParityCheckMatrix& H);

    std::size_t n() const { return n_; }
    std::size_t k() const { return info_cols_.size(); }
    std::size_t rank() const { return parity_cols_.size(); }
    const std::vector<std::size_t>& info_positions() const { return info_cols_; }

    BitSeq encode(std::span<const std::uint8_t> m) const;
    BitSeq extract_message(std::span<const std::uint8_t> c) const;

private:
    std::size_t n_;
    std::vector<std::size_t> info_cols_;
    std::vector<std::size_t> parity_cols_;
    // parity_rows_[i][j]: parity bit i depends on message bit j
    std::vector<BitSeq> parity_rows_;
};

struct SpaResult {
    BitSeq codeword;
    BitSeq message;
    std::vector<double> posterior;  ///< a-posteriori LLRs at exit
    int iterations = 0;
    bool converged = false;
};

/// Check-to-variable messages are clamped to this magnitude (atanh guard).
inline constexpr double kSpaMessageClamp = 19.07;

/// Flooding sum-product decoding with tanh-rule check updates. The channel
/// hard decision is tested first; a zero syndrome there exits with 0 iterations.
/// Ties (posterior exactly 0) decide bit 0.
SpaResult spa_decode(const ParityCheckMatrix& H, const Encoder& enc, std::span<const double> llrs,
                     int max_iter);

/// A-posteriori LLRs after exactly `iterations` flooding iterations, with no
/// early exit.
std::vector<double> spa_posteriors(const ParityCheckMatrix& H, std::span<const double> llrs, int iterations);

}  // namespace delcode::ldpc
