#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

// Small trainable layers over Eigen matrices. Feature maps are channels x
// pixels; parameters live in the layer, gradients accumulate into twin
// buffers, and forward activations go through an explicit per-call Store so
// parameter-const inference is safe to run concurrently.
namespace stereodiff::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <class T>
struct Store {
    std::vector<Mat<T>> stack;

    void push(Mat<T> m) { stack.push_back(std::move(m)); }
    Mat<T> pop() {
        check(!stack.empty(), "activation store underflow");
        Mat<T> m = std::move(stack.back());
        stack.pop_back();
        return m;
    }
};

template <class T>
using ParamVisitor = std::function<void(const std::string&, Mat<T>&, Mat<T>&)>;

template <class T>
Mat<T> normal_mat(Rng& rng, int rows, int cols, double stddev) {
    Mat<T> m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = T(rng.normal() * stddev);
    return m;
}

template <class T>
T sigmoid(T v) {
    return T(1) / (T(1) + std::exp(-v));
}

template <class T>
struct SiLU {
    Mat<T> forward(const Mat<T>& x, Store<T>& s) const {
        s.push(x);
        return x.unaryExpr([](T v) { return v * sigmoid(v); });
    }
    Mat<T> backward(const Mat<T>& dy, Store<T>& s) const {
        Mat<T> x = s.pop();
        Mat<T> dx = x.unaryExpr([](T v) {
            const T sg = sigmoid(v);
            return sg * (T(1) + v * (T(1) - sg));
        });
        return dx.cwiseProduct(dy);
    }
};

template <class T>
struct Linear {
    int in = 0, out = 0;
    Mat<T> W, b;    // W: out x in, b: out x 1
    Mat<T> gW, gb;

    void init(Rng& rng, int in_dim, int out_dim) {
        in = in_dim;
        out = out_dim;
        W = normal_mat<T>(rng, out, in, 1.0 / std::sqrt(double(in)));
        b = Mat<T>::Zero(out, 1);
        gW = Mat<T>::Zero(out, in);
        gb = Mat<T>::Zero(out, 1);
    }
    // x: in x n (columns are independent samples)
    Mat<T> forward(const Mat<T>& x, Store<T>& s) const {
        s.push(x);
        return (W * x).colwise() + Eigen::Matrix<T, Eigen::Dynamic, 1>(b.col(0));
    }
    Mat<T> backward(const Mat<T>& dy, Store<T>& s) {
        Mat<T> x = s.pop();
        gW += dy * x.transpose();
        gb.col(0) += dy.rowwise().sum();
        return W.transpose() * dy;
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
        fn(prefix + ".W", W, gW);
        fn(prefix + ".b", b, gb);
    }
};

template <class T>
struct Conv2d {
    int in = 0, out = 0, k = 3, stride = 1, pad = 1;
    Mat<T> W, b;    // W: out x in*k*k
    Mat<T> gW, gb;

    void init(Rng& rng, int in_ch, int out_ch, int kernel, int stride_, int pad_,
              bool zero = false) {
        in = in_ch;
        out = out_ch;
        k = kernel;
        stride = stride_;
        pad = pad_;
        const int fan = in * k * k;
        W = zero ? Mat<T>::Zero(out, fan)
                 : normal_mat<T>(rng, out, fan, std::sqrt(2.0 / fan));
        b = Mat<T>::Zero(out, 1);
        gW = Mat<T>::Zero(out, fan);
        gb = Mat<T>::Zero(out, 1);
    }

    int out_dim(int d) const { return (d + 2 * pad - k) / stride + 1; }

    Mat<T> im2col(const Mat<T>& x, int H, int Wd) const {
        const int oh = out_dim(H), ow = out_dim(Wd);
        Mat<T> cols = Mat<T>::Zero(in * k * k, oh * ow);
        for (int ci = 0; ci < in; ++ci)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const int row = (ci * k + ky) * k + kx;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= Wd) continue;
                            cols(row, oy * ow + ox) = x(ci, iy * Wd + ix);
                        }
                    }
                }
        return cols;
    }

    Mat<T> col2im(const Mat<T>& cols, int H, int Wd) const {
        const int oh = out_dim(H), ow = out_dim(Wd);
        Mat<T> x = Mat<T>::Zero(in, H * Wd);
        for (int ci = 0; ci < in; ++ci)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const int row = (ci * k + ky) * k + kx;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= Wd) continue;
                            x(ci, iy * Wd + ix) += cols(row, oy * ow + ox);
                        }
                    }
                }
        return x;
    }

    Mat<T> forward(const Mat<T>& x, int H, int Wd, Store<T>& s) const {
        check(x.rows() == in, "conv: channel mismatch");
        Mat<T> cols = im2col(x, H, Wd);
        Mat<T> y = (W * cols).colwise() + Eigen::Matrix<T, Eigen::Dynamic, 1>(b.col(0));
        s.push(std::move(cols));
        return y;
    }
    Mat<T> backward(const Mat<T>& dy, int H, int Wd, Store<T>& s) {
        Mat<T> cols = s.pop();
        gW += dy * cols.transpose();
        gb.col(0) += dy.rowwise().sum();
        return col2im(W.transpose() * dy, H, Wd);
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
        fn(prefix + ".W", W, gW);
        fn(prefix + ".b", b, gb);
    }
};

template <class T>
struct GroupNorm {
    int ch = 0, groups = 8;
    T eps = T(1e-5);
    Mat<T> gamma, beta;    // ch x 1
    Mat<T> ggamma, gbeta;

    void init(int channels, int groups_) {
        ch = channels;
        groups = groups_;
        check(ch % groups == 0, "groupnorm: channels not divisible by groups");
        gamma = Mat<T>::Ones(ch, 1);
        beta = Mat<T>::Zero(ch, 1);
        ggamma = Mat<T>::Zero(ch, 1);
        gbeta = Mat<T>::Zero(ch, 1);
    }

    Mat<T> forward(const Mat<T>& x, Store<T>& s) const {
        check(x.rows() == ch, "groupnorm: channel mismatch");
        const int per = ch / groups;
        const auto n = x.cols();
        Mat<T> xhat(ch, n);
        Mat<T> invstd(groups, 1);
        for (int g = 0; g < groups; ++g) {
            auto blk = x.middleRows(g * per, per);
            const T mean = blk.sum() / T(per * n);
            const T var = (blk.array() - mean).square().sum() / T(per * n);
            const T is = T(1) / std::sqrt(var + eps);
            invstd(g, 0) = is;
            xhat.middleRows(g * per, per) = (blk.array() - mean) * is;
        }
        Mat<T> y = xhat;
        y.array().colwise() *= gamma.col(0).array();
        y.array().colwise() += beta.col(0).array();
        s.push(xhat);
        s.push(invstd);
        return y;
    }

    Mat<T> backward(const Mat<T>& dy, Store<T>& s) {
        Mat<T> invstd = s.pop();
        Mat<T> xhat = s.pop();
        const int per = ch / groups;
        const auto n = dy.cols();
        ggamma.col(0) += dy.cwiseProduct(xhat).rowwise().sum();
        gbeta.col(0) += dy.rowwise().sum();
        Mat<T> dxhat = dy;
        dxhat.array().colwise() *= gamma.col(0).array();
        Mat<T> dx(ch, n);
        for (int g = 0; g < groups; ++g) {
            auto dxh = dxhat.middleRows(g * per, per);
            auto xh = xhat.middleRows(g * per, per);
            const T m = T(per * n);
            const T sum_dxh = dxh.sum();
            const T sum_dxh_xh = dxh.cwiseProduct(xh).sum();
            dx.middleRows(g * per, per) =
                (invstd(g, 0) / m) *
                (m * dxh.array() - sum_dxh - xh.array() * sum_dxh_xh).matrix();
        }
        return dx;
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
        fn(prefix + ".gamma", gamma, ggamma);
        fn(prefix + ".beta", beta, gbeta);
    }
};

// Nearest-neighbor 2x upsampling on a channels x (H*W) map.
template <class T>
Mat<T> nearest_up2(const Mat<T>& x, int H, int Wd) {
    Mat<T> y(x.rows(), 4 * H * Wd);
    for (int yy = 0; yy < 2 * H; ++yy)
        for (int xx = 0; xx < 2 * Wd; ++xx)
            y.col(yy * 2 * Wd + xx) = x.col((yy / 2) * Wd + xx / 2);
    return y;
}

template <class T>
Mat<T> nearest_up2_backward(const Mat<T>& dy, int H, int Wd) {
    Mat<T> dx = Mat<T>::Zero(dy.rows(), H * Wd);
    for (int yy = 0; yy < 2 * H; ++yy)
        for (int xx = 0; xx < 2 * Wd; ++xx)
            dx.col((yy / 2) * Wd + xx / 2) += dy.col(yy * 2 * Wd + xx);
    return dx;
}

// Row-stable softmax over each row of S.
template <class T>
Mat<T> softmax_rows(const Mat<T>& S) {
    Mat<T> A(S.rows(), S.cols());
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        const T mx = S.row(i).maxCoeff();
        Eigen::Array<T, 1, Eigen::Dynamic> e = (S.row(i).array() - mx).exp();
        A.row(i) = e / e.sum();
    }
    return A;
}

// Scaled dot-product attention core. Tokens are columns: q is d x Nq, k/v are
// d x Nk. Returns d x Nq. Saves what the backward pass needs; attn_out, when
// given, receives a copy of the attention map for inspection hooks.
template <class T>
Mat<T> attend(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v, Store<T>& s,
              Mat<T>* attn_out = nullptr) {
    const T scale = T(1) / std::sqrt(T(q.rows()));
    Mat<T> A = softmax_rows<T>(q.transpose() * k * scale);    // Nq x Nk
    if (attn_out) *attn_out = A;
    Mat<T> o = v * A.transpose();
    s.push(q);
    s.push(k);
    s.push(v);
    s.push(A);
    return o;
}

template <class T>
struct AttendGrads {
    Mat<T> dq, dk, dv;
};

template <class T>
AttendGrads<T> attend_backward(const Mat<T>& dout, Store<T>& s) {
    Mat<T> A = s.pop();
    Mat<T> v = s.pop();
    Mat<T> k = s.pop();
    Mat<T> q = s.pop();
    const T scale = T(1) / std::sqrt(T(q.rows()));
    AttendGrads<T> g;
    g.dv = dout * A;
    Mat<T> dA = dout.transpose() * v;    // Nq x Nk
    Mat<T> dS(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const T dot = (dA.row(i).array() * A.row(i).array()).sum();
        dS.row(i) = (A.row(i).array() * (dA.row(i).array() - dot)).matrix();
    }
    g.dq = k * dS.transpose() * scale;
    g.dk = q * dS * scale;
    return g;
}

// Sinusoidal timestep embedding, dim even.
template <class T>
Mat<T> timestep_embedding(double t, int dim) {
    const int half = dim / 2;
    Mat<T> e(dim, 1);
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
        e(i, 0) = T(std::sin(t * freq));
        e(half + i, 0) = T(std::cos(t * freq));
    }
    return e;
}

} // namespace stereodiff::nn
