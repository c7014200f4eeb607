#pragma once

#include "delcode/nn/tensor.hpp"

namespace delcode::nn {

/// GRU cell without biases by default:
///   z = sigmoid(Wz [h; u]),  r = sigmoid(Wr [h; u]),
///   c = tanh(Wh [r*h; u]),   h' = (1-z)*h + z*c.
/// Each W is hidden x (hidden + in); the first `hidden` columns act on h.
template <typename S>
struct GruCell {
    int hidden = 0;
    int in = 0;
    bool bias = false;
    Mat<S> Wz, Wr, Wh;
    Mat<S> bz, br, bh;  // hidden x 1, empty unless bias

    GruCell() = default;
    GruCell(int hidden_, int in_, bool bias_)
        : hidden(hidden_),
          in(in_),
          bias(bias_),
          Wz(Mat<S>::Zero(hidden_, hidden_ + in_)),
          Wr(Mat<S>::Zero(hidden_, hidden_ + in_)),
          Wh(Mat<S>::Zero(hidden_, hidden_ + in_)) {
        if (bias) {
            bz = Mat<S>::Zero(hidden, 1);
            br = Mat<S>::Zero(hidden, 1);
            bh = Mat<S>::Zero(hidden, 1);
        }
    }

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(hidden + in));
        fill_uniform(Wz, bound, rng);
        fill_uniform(Wr, bound, rng);
        fill_uniform(Wh, bound, rng);
        if (bias) {
            fill_uniform(bz, bound, rng);
            fill_uniform(br, bound, rng);
            fill_uniform(bh, bound, rng);
        }
    }

    void collect(const std::string& prefix, std::vector<NamedTensor<S>>& out) {
        out.push_back({prefix + ".Wz", &Wz});
        out.push_back({prefix + ".Wr", &Wr});
        out.push_back({prefix + ".Wh", &Wh});
        if (bias) {
            out.push_back({prefix + ".bz", &bz});
            out.push_back({prefix + ".br", &br});
            out.push_back({prefix + ".bh", &bh});
        }
    }

    auto rec(const Mat<S>& W) const { return W.leftCols(hidden); }
    auto inp(const Mat<S>& W) const { return W.rightCols(in); }
};

/// Single step for one sample or a batch (columns are samples).
template <typename S>
Mat<S> gru_cell_forward(const Mat<S>& h_prev, const Mat<S>& u, const GruCell<S>& p) {
    if (h_prev.rows() != p.hidden || u.rows() != p.in || h_prev.cols() != u.cols())
        throw Error("gru_cell_forward: shape mismatch");
    Mat<S> az = p.rec(p.Wz) * h_prev + p.inp(p.Wz) * u;
    Mat<S> ar = p.rec(p.Wr) * h_prev + p.inp(p.Wr) * u;
    if (p.bias) {
        az.colwise() += p.bz.col(0);
        ar.colwise() += p.br.col(0);
    }
    const Mat<S> z = sigmoid(az);
    const Mat<S> r = sigmoid(ar);
    Mat<S> ah = p.rec(p.Wh) * r.cwiseProduct(h_prev) + p.inp(p.Wh) * u;
    if (p.bias)
        ah.colwise() += p.bh.col(0);
    const Mat<S> c = ah.array().tanh().matrix();
    return (h_prev.array() * (S(1) - z.array()) + z.array() * c.array()).matrix();
}

/// Activations kept for the backward pass of one direction.
template <typename S>
struct GruTape {
    Mat<S> Z, Rg, C, H;  // hidden x (T*B)
};

/// Runs one direction over the whole batch from a zero initial state.
/// `reverse` scans t = T-1 .. 0.
template <typename S>
Mat<S> gru_scan(const GruCell<S>& p, const SeqBatch<S>& x, bool reverse, GruTape<S>* tape) {
    if (x.features() != p.in)
        throw Error("gru_scan: input dimension " + std::to_string(x.features()) + " != " + std::to_string(p.in));
    const int T = x.T, B = x.B, d = p.hidden;
    Mat<S> Xz = p.inp(p.Wz) * x.data;
    Mat<S> Xr = p.inp(p.Wr) * x.data;
    Mat<S> Xh = p.inp(p.Wh) * x.data;
    if (p.bias) {
        Xz.colwise() += p.bz.col(0);
        Xr.colwise() += p.br.col(0);
        Xh.colwise() += p.bh.col(0);
    }
    Mat<S> H(d, T * B);
    Mat<S> Z, Rg, C;
    if (tape) {
        Z.resize(d, T * B);
        Rg.resize(d, T * B);
        C.resize(d, T * B);
    }
    Mat<S> h = Mat<S>::Zero(d, B);
    Mat<S> z(d, B), r(d, B), c(d, B);
    for (int k = 0; k < T; ++k) {
        const int t = reverse ? T - 1 - k : k;
        z.noalias() = p.rec(p.Wz) * h;
        z += Xz.middleCols(t * B, B);
        z = sigmoid(z);
        r.noalias() = p.rec(p.Wr) * h;
        r += Xr.middleCols(t * B, B);
        r = sigmoid(r);
        c.noalias() = p.rec(p.Wh) * r.cwiseProduct(h);
        c += Xh.middleCols(t * B, B);
        c = c.array().tanh().matrix();
        h = (h.array() + z.array() * (c.array() - h.array())).matrix();
        H.middleCols(t * B, B) = h;
        if (tape) {
            Z.middleCols(t * B, B) = z;
            Rg.middleCols(t * B, B) = r;
            C.middleCols(t * B, B) = c;
        }
    }
    if (tape) {
        tape->Z = std::move(Z);
        tape->Rg = std::move(Rg);
        tape->C = std::move(C);
        tape->H = H;
    }
    return H;
}

/// Backpropagation through time for one direction. `dH` is dLoss/dH_t from
/// the layer above; gradients are accumulated into `g`; returns dLoss/dx.
template <typename S>
Mat<S> gru_scan_backward(const GruCell<S>& p, const SeqBatch<S>& x, bool reverse, const GruTape<S>& tape,
                         const Mat<S>& dH, GruCell<S>& g) {
    const int T = x.T, B = x.B, d = p.hidden;
    Mat<S> dAz(d, T * B), dAr(d, T * B), dAh(d, T * B), RH(d, T * B), Hprev(d, T * B);
    Mat<S> carry = Mat<S>::Zero(d, B);
    Mat<S> dh(d, B), hp(d, B), drh(d, B);
    for (int k = T - 1; k >= 0; --k) {
        const int t = reverse ? T - 1 - k : k;
        const int tp = reverse ? t + 1 : t - 1;  // time index of h_prev
        if (k == 0)
            hp.setZero();
        else
            hp = tape.H.middleCols(tp * B, B);
        const auto z = tape.Z.middleCols(t * B, B);
        const auto r = tape.Rg.middleCols(t * B, B);
        const auto c = tape.C.middleCols(t * B, B);

        dh = dH.middleCols(t * B, B) + carry;
        auto dah = dAh.middleCols(t * B, B);
        auto daz = dAz.middleCols(t * B, B);
        auto dar = dAr.middleCols(t * B, B);
        dah = (dh.array() * z.array() * (S(1) - c.array().square())).matrix();
        daz = (dh.array() * (c.array() - hp.array()) * z.array() * (S(1) - z.array())).matrix();
        carry = (dh.array() * (S(1) - z.array())).matrix();
        drh.noalias() = p.rec(p.Wh).transpose() * dah;
        dar = (drh.array() * hp.array() * r.array() * (S(1) - r.array())).matrix();
        carry += drh.cwiseProduct(r);
        carry.noalias() += p.rec(p.Wz).transpose() * daz;
        carry.noalias() += p.rec(p.Wr).transpose() * dar;
        RH.middleCols(t * B, B) = r.cwiseProduct(hp);
        Hprev.middleCols(t * B, B) = hp;
    }
    g.Wz.leftCols(d).noalias() += dAz * Hprev.transpose();
    g.Wr.leftCols(d).noalias() += dAr * Hprev.transpose();
    g.Wh.leftCols(d).noalias() += dAh * RH.transpose();
    g.Wz.rightCols(p.in).noalias() += dAz * x.data.transpose();
    g.Wr.rightCols(p.in).noalias() += dAr * x.data.transpose();
    g.Wh.rightCols(p.in).noalias() += dAh * x.data.transpose();
    if (p.bias) {
        g.bz += dAz.rowwise().sum();
        g.br += dAr.rowwise().sum();
        g.bh += dAh.rowwise().sum();
    }
    Mat<S> dx = p.inp(p.Wz).transpose() * dAz;
    dx.noalias() += p.inp(p.Wr).transpose() * dAr;
    dx.noalias() += p.inp(p.Wh).transpose() * dAh;
    return dx;
}

}  // namespace delcode::nn
