#include "delcode/ldpc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace delcode::ldpc {

ParityCheckMatrix::ParityCheckMatrix(std::size_t num_checks, std::size_t num_vars,
                                     std::vector<std::vector<std::size_t>> vars_of_check)
    : num_vars_(num_vars),
      vars_of_check_(std::move(vars_of_check)),
      checks_of_var_(num_vars),
      check_edges_(num_checks),
      var_edges_(num_vars) {
    if (vars_of_check_.size() != num_checks)
        throw Error("parity-check matrix: row count mismatch");
    for (std::size_t c = 0; c < num_checks; ++c) {
        auto& row = vars_of_check_[c];
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end())
            throw AlistError(AlistErrorKind::DuplicateEdge,
                             "duplicate edge in check " + std::to_string(c + 1));
        for (auto v : row) {
            if (v >= num_vars)
                throw AlistError(AlistErrorKind::IndexOutOfRange, "variable index out of range");
            const std::size_t e = edge_var_.size();
            edge_var_.push_back(v);
            check_edges_[c].push_back(e);
            checks_of_var_[v].push_back(c);
            var_edges_[v].push_back(e);
        }
    }
}

bool ParityCheckMatrix::entry(std::size_t check, std::size_t var) const {
    const auto& row = vars_of_check_[check];
    return std::binary_search(row.begin(), row.end(), var);
}

std::vector<std::uint8_t> ParityCheckMatrix::syndrome(std::span<const std::uint8_t> c) const {
    require_length("syndrome", num_vars_, c.size());
    std::vector<std::uint8_t> s(num_checks(), 0);
    for (std::size_t i = 0; i < num_checks(); ++i)
        for (auto v : vars_of_check_[i])
            s[i] ^= c[v];
    return s;
}

bool ParityCheckMatrix::is_codeword(std::span<const std::uint8_t> c) const {
    require_length("is_codeword", num_vars_, c.size());
    for (const auto& row : vars_of_check_) {
        std::uint8_t acc = 0;
        for (auto v : row)
            acc ^= c[v];
        if (acc)
            return false;
    }
    return true;
}

namespace {

class Tokens {
public:
    explicit Tokens(std::string_view text) : text_(text) {}

    bool next(long long& out) {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ >= text_.size())
            return false;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || (ptr != last && !std::isspace(static_cast<unsigned char>(*ptr))))
            throw AlistError(AlistErrorKind::MalformedHeader,
                             "non-integer token near offset " + std::to_string(pos_));
        pos_ += static_cast<std::size_t>(ptr - first);
        return true;
    }

    long long require(const char* what) {
        long long v;
        if (!next(v))
            throw AlistError(AlistErrorKind::Truncated, std::string("unexpected end of input reading ") + what);
        return v;
    }

    /// Offset just past the last token read.
    std::size_t position() const { return pos_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

ParityCheckMatrix parse_alist(std::string_view text) {
    Tokens tok(text);
    long long n, m, max_col, max_row;
    long long vals[4];
    for (int i = 0; i < 4; ++i) {
        if (!tok.next(vals[i]))
            throw AlistError(AlistErrorKind::MalformedHeader, "header needs n m max_col max_row");
    }
    n = vals[0];
    m = vals[1];
    max_col = vals[2];
    max_row = vals[3];
    if (n <= 0 || m <= 0 || max_col <= 0 || max_row <= 0 || max_col > m || max_row > n)
        throw AlistError(AlistErrorKind::MalformedHeader, "invalid dimensions in header");

    std::vector<long long> col_deg(static_cast<std::size_t>(n)), row_deg(static_cast<std::size_t>(m));
    for (auto& d : col_deg) {
        d = tok.require("column degrees");
        if (d < 0 || d > max_col)
            throw AlistError(AlistErrorKind::DegreeMismatch, "column degree exceeds stated maximum");
    }
    for (auto& d : row_deg) {
        d = tok.require("row degrees");
        if (d < 0 || d > max_row)
            throw AlistError(AlistErrorKind::DegreeMismatch, "row degree exceeds stated maximum");
    }
    if (*std::max_element(col_deg.begin(), col_deg.end()) != max_col ||
        *std::max_element(row_deg.begin(), row_deg.end()) != max_row)
        throw AlistError(AlistErrorKind::DegreeMismatch, "stated maximum degree not attained");

    // The index sections are read line-oriented so that both zero-padded and
    // unpadded files are accepted.
    std::string_view rest = text.substr(tok.position());
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto end = rest.find('\n', start);
            if (end == std::string_view::npos)
                end = rest.size();
            auto line = rest.substr(start, end - start);
            if (line.find_first_not_of(" \t\r") != std::string_view::npos)
                lines.push_back(line);
            start = end + 1;
        }
    }
    if (lines.size() < static_cast<std::size_t>(n + m))
        throw AlistError(AlistErrorKind::Truncated, "expected " + std::to_string(n + m) +
                                                        " index lines, found " + std::to_string(lines.size()));

    auto read_list = [](std::string_view line, long long degree, long long bound, const char* what) {
        Tokens lt(line);
        std::vector<std::size_t> out;
        long long v;
        while (lt.next(v)) {
            if (v == 0)
                continue;
            if (v < 0 || v > bound)
                throw AlistError(AlistErrorKind::IndexOutOfRange, std::string(what) + " index " +
                                                                      std::to_string(v) + " out of range");
            out.push_back(static_cast<std::size_t>(v - 1));
        }
        std::sort(out.begin(), out.end());
        if (std::adjacent_find(out.begin(), out.end()) != out.end())
            throw AlistError(AlistErrorKind::DuplicateEdge, std::string(what) + " list repeats an index");
        if (static_cast<long long>(out.size()) != degree)
            throw AlistError(AlistErrorKind::DegreeMismatch,
                             std::string(what) + " list has " + std::to_string(out.size()) +
                                 " entries, degree says " + std::to_string(degree));
        return out;
    };

    std::vector<std::vector<std::size_t>> rows_of_col(static_cast<std::size_t>(n));
    for (long long j = 0; j < n; ++j)
        rows_of_col[static_cast<std::size_t>(j)] =
            read_list(lines[static_cast<std::size_t>(j)], col_deg[static_cast<std::size_t>(j)], m, "row");
    std::vector<std::vector<std::size_t>> cols_of_row(static_cast<std::size_t>(m));
    for (long long i = 0; i < m; ++i)
        cols_of_row[static_cast<std::size_t>(i)] = read_list(
            lines[static_cast<std::size_t>(n + i)], row_deg[static_cast<std::size_t>(i)], n, "column");

    // Column section and row section must describe the same matrix.
    std::vector<std::vector<std::size_t>> from_cols(static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < rows_of_col.size(); ++j)
        for (auto i : rows_of_col[j])
            from_cols[i].push_back(j);
    if (from_cols != cols_of_row)
        throw AlistError(AlistErrorKind::Inconsistent, "column and row index lists disagree");

    return ParityCheckMatrix(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(cols_of_row));
}

ParityCheckMatrix load_alist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("alist: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_alist(ss.str());
}

std::string to_alist(const ParityCheckMatrix& H) {
    std::size_t max_col = 0, max_row = 0;
    for (std::size_t j = 0; j < H.num_vars(); ++j)
        max_col = std::max(max_col, H.checks_of(j).size());
    for (std::size_t i = 0; i < H.num_checks(); ++i)
        max_row = std::max(max_row, H.vars_of(i).size());
    std::ostringstream os;
    os << H.num_vars() << ' ' << H.num_checks() << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t j = 0; j < H.num_vars(); ++j)
        os << (j ? " " : "") << H.checks_of(j).size();
    os << '\n';
    for (std::size_t i = 0; i < H.num_checks(); ++i)
        os << (i ? " " : "") << H.vars_of(i).size();
    os << '\n';
    for (std::size_t j = 0; j < H.num_vars(); ++j) {
        const auto& l = H.checks_of(j);
        for (std::size_t a = 0; a < l.size(); ++a)
            os << (a ? " " : "") << l[a] + 1;
        os << '\n';
    }
    for (std::size_t i = 0; i < H.num_checks(); ++i) {
        const auto& l = H.vars_of(i);
        for (std::size_t a = 0; a < l.size(); ++a)
            os << (a ? " " : "") << l[a] + 1;
        os << '\n';
    }
    return os.str();
}

Encoder::Encoder(const ParityCheckMatrix& H) : n_(H.num_vars()) {
    const std::size_t m = H.num_checks();
    std::vector<BitSeq> rows(m, BitSeq(n_, 0));
    for (std::size_t i = 0; i < m; ++i)
        for (auto v : H.vars_of(i))
            rows[i][v] = 1;

    // Reduced row echelon form; pivot columns become parity positions.
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_of_row;
    std::vector<bool> is_pivot(n_, false);
    for (std::size_t col = 0; col < n_ && rank < m; ++col) {
        std::size_t piv = rank;
        while (piv < m && !rows[piv][col])
            ++piv;
        if (piv == m)
            continue;
        std::swap(rows[rank], rows[piv]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i != rank && rows[i][col]) {
                for (std::size_t j = 0; j < n_; ++j)
                    rows[i][j] ^= rows[rank][j];
            }
        }
        pivot_of_row.push_back(col);
        is_pivot[col] = true;
        ++rank;
    }
    for (std::size_t j = 0; j < n_; ++j)
        if (!is_pivot[j])
            info_cols_.push_back(j);
    parity_cols_ = pivot_of_row;
    parity_rows_.assign(rank, BitSeq(info_cols_.size(), 0));
    for (std::size_t r = 0; r < rank; ++r)
        for (std::size_t j = 0; j < info_cols_.size(); ++j)
            parity_rows_[r][j] = rows[r][info_cols_[j]];
}

BitSeq Encoder::encode(std::span<const std::uint8_t> m) const {
    require_length("ldpc encode", k(), m.size());
    BitSeq c(n_, 0);
    for (std::size_t j = 0; j < info_cols_.size(); ++j)
        c[info_cols_[j]] = m[j];
    for (std::size_t r = 0; r < parity_cols_.size(); ++r) {
        std::uint8_t acc = 0;
        const auto& row = parity_rows_[r];
        for (std::size_t j = 0; j < row.size(); ++j)
            acc ^= static_cast<std::uint8_t>(row[j] & m[j]);
        c[parity_cols_[r]] = acc;
    }
    return c;
}

BitSeq Encoder::extract_message(std::span<const std::uint8_t> c) const {
    require_length("ldpc extract_message", n_, c.size());
    BitSeq m(info_cols_.size());
    for (std::size_t j = 0; j < info_cols_.size(); ++j)
        m[j] = c[info_cols_[j]];
    return m;
}

namespace {

// One flooding iteration: check update by the tanh rule (leave-one-out via
// prefix/suffix products), then variable update. Writes the a-posteriori LLRs.
void spa_iteration(const ParityCheckMatrix& H, const std::vector<double>& channel, std::vector<double>& v2c,
                   std::vector<double>& c2v, std::vector<double>& post) {
    std::vector<double> t, fwd, bwd;
    for (std::size_t c = 0; c < H.num_checks(); ++c) {
        const auto& edges = H.check_edges(c);
        const std::size_t deg = edges.size();
        t.resize(deg);
        fwd.resize(deg + 1);
        bwd.resize(deg + 1);
        for (std::size_t a = 0; a < deg; ++a)
            t[a] = std::tanh(0.5 * std::clamp(v2c[edges[a]], -kSpaMessageClamp * 2, kSpaMessageClamp * 2));
        fwd[0] = 1.0;
        for (std::size_t a = 0; a < deg; ++a)
            fwd[a + 1] = fwd[a] * t[a];
        bwd[deg] = 1.0;
        for (std::size_t a = deg; a-- > 0;)
            bwd[a] = bwd[a + 1] * t[a];
        for (std::size_t a = 0; a < deg; ++a) {
            const double prod = fwd[a] * bwd[a + 1];
            c2v[edges[a]] =
                std::clamp(2.0 * std::atanh(std::clamp(prod, -1.0, 1.0)), -kSpaMessageClamp, kSpaMessageClamp);
        }
    }
    for (std::size_t v = 0; v < H.num_vars(); ++v) {
        double sum = channel[v];
        for (auto e : H.var_edges(v))
            sum += c2v[e];
        for (auto e : H.var_edges(v))
            v2c[e] = sum - c2v[e];
        post[v] = sum;
    }
}

std::vector<double> finite_channel(std::span<const double> llrs) {
    std::vector<double> channel(llrs.size());
    for (std::size_t v = 0; v < llrs.size(); ++v)
        channel[v] = std::clamp(llrs[v], -1e300, 1e300);  // +-inf -> finite
    return channel;
}

}  // namespace

std::vector<double> spa_posteriors(const ParityCheckMatrix& H, std::span<const double> llrs, int iterations) {
    require_length("spa_posteriors", H.num_vars(), llrs.size());
    const auto channel = finite_channel(llrs);
    std::vector<double> post = channel;
    std::vector<double> v2c(H.num_edges()), c2v(H.num_edges(), 0.0);
    for (std::size_t e = 0; e < H.num_edges(); ++e)
        v2c[e] = channel[H.edge_var(e)];
    for (int it = 0; it < iterations; ++it)
        spa_iteration(H, channel, v2c, c2v, post);
    return post;
}

SpaResult spa_decode(const ParityCheckMatrix& H, const Encoder& enc, std::span<const double> llrs,
                     int max_iter) {
    const std::size_t n = H.num_vars();
    require_length("spa_decode", n, llrs.size());

    SpaResult res;
    const auto channel = finite_channel(llrs);
    res.posterior = channel;
    res.codeword.resize(n);
    for (std::size_t v = 0; v < n; ++v)
        res.codeword[v] = channel[v] < 0.0 ? 1 : 0;
    if (H.is_codeword(res.codeword)) {
        res.converged = true;
        res.message = enc.extract_message(res.codeword);
        return res;
    }

    std::vector<double> v2c(H.num_edges()), c2v(H.num_edges(), 0.0);
    for (std::size_t e = 0; e < H.num_edges(); ++e)
        v2c[e] = channel[H.edge_var(e)];
    for (int it = 1; it <= max_iter; ++it) {
        spa_iteration(H, channel, v2c, c2v, res.posterior);
        for (std::size_t v = 0; v < n; ++v)
            res.codeword[v] = res.posterior[v] < 0.0 ? 1 : 0;
        res.iterations = it;
        if (H.is_codeword(res.codeword)) {
            res.converged = true;
            break;
        }
    }
    res.message = enc.extract_message(res.codeword);
    return res;
}

}  // namespace delcode::ldpc
