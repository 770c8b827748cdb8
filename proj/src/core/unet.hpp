#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/nn.hpp"

namespace stereodiff {

// Self-attention rewiring for stereo pairs: uni lets the second entry query
// the first entry's keys/values; bi concatenates both (own tokens first).
enum class AttentionPlan { none, uni, bi };

struct UNetConfig {
    int latent_channels = 12;
    int latent_size = 32;          // square latent maps
    std::vector<int> widths = {32, 64};
    int res_blocks = 1;            // residual blocks per encoder level
    int heads = 1;
    int vocab = 5;                 // class tokens; the last id is the null token
    int temb_dim = 128;
    int cond_dim = 32;
    int groups = 8;
    uint64_t param_seed = 1;

    int null_token() const { return vocab - 1; }
};

template <class T>
struct AttnRecorder {
    struct Item {
        int layer = 0, entry = 0, head = 0;
        nn::Mat<T> q, k, v, attn;
    };
    std::vector<Item> items;
};

namespace detail {

using nn::Mat;
using nn::Store;

template <class T>
struct ResBlock {
    int in = 0, out = 0;
    nn::GroupNorm<T> gn1, gn2;
    nn::SiLU<T> silu1, silu2, silu_t;
    nn::Conv2d<T> conv1, conv2;
    nn::Linear<T> temb_proj;
    nn::Conv2d<T> skip;

    void init(Rng& rng, int in_ch, int out_ch, int groups, int temb_dim, bool zero_tails) {
        in = in_ch;
        out = out_ch;
        gn1.init(in_ch, groups);
        conv1.init(rng, in_ch, out_ch, 3, 1, 1);
        temb_proj.init(rng, temb_dim, out_ch);
        gn2.init(out_ch, groups);
        conv2.init(rng, out_ch, out_ch, 3, 1, 1, zero_tails);
        if (in != out) skip.init(rng, in_ch, out_ch, 1, 1, 0);
    }

    Mat<T> forward(const Mat<T>& x, const Mat<T>& temb, int H, int W, Store<T>& s) const {
        Mat<T> h = gn1.forward(x, s);
        h = silu1.forward(h, s);
        h = conv1.forward(h, H, W, s);
        Mat<T> tp = temb_proj.forward(silu_t.forward(temb, s), s);
        h.colwise() += Eigen::Matrix<T, Eigen::Dynamic, 1>(tp.col(0));
        h = gn2.forward(h, s);
        h = silu2.forward(h, s);
        h = conv2.forward(h, H, W, s);
        if (in != out) return h + skip.forward(x, H, W, s);
        return h + x;
    }

    Mat<T> backward(const Mat<T>& dy, Mat<T>& dtemb_accum, int H, int W, Store<T>& s) {
        Mat<T> dx_skip = in != out ? skip.backward(dy, H, W, s) : dy;
        Mat<T> dh = conv2.backward(dy, H, W, s);
        dh = silu2.backward(dh, s);
        dh = gn2.backward(dh, s);
        Mat<T> dtp(out, 1);
        dtp.col(0) = dh.rowwise().sum();
        dtemb_accum += silu_t.backward(temb_proj.backward(dtp, s), s);
        dh = conv1.backward(dh, H, W, s);
        dh = silu1.backward(dh, s);
        return gn1.backward(dh, s) + dx_skip;
    }

    void visit(const std::string& p, const nn::ParamVisitor<T>& fn) {
        gn1.visit(p + ".gn1", fn);
        conv1.visit(p + ".conv1", fn);
        temb_proj.visit(p + ".temb", fn);
        gn2.visit(p + ".gn2", fn);
        conv2.visit(p + ".conv2", fn);
        if (in != out) skip.visit(p + ".skip", fn);
    }
};

template <class T>
struct SelfAttn {
    int ch = 0, heads = 1;
    nn::Linear<T> Wq, Wk, Wv, Wo;

    void init(Rng& rng, int channels, int heads_, bool zero_tails) {
        ch = channels;
        heads = heads_;
        check(ch % heads == 0, "attention: heads must divide channels");
        Wq.init(rng, ch, ch);
        Wk.init(rng, ch, ch);
        Wv.init(rng, ch, ch);
        Wo.init(rng, ch, ch);
        if (zero_tails) Wo.W.setZero();
    }

    std::vector<Mat<T>> forward(const std::vector<Mat<T>>& xs, AttentionPlan plan, Store<T>& s,
                                AttnRecorder<T>* rec, int layer_idx) const {
        const int B = int(xs.size());
        check(plan == AttentionPlan::none || B == 2, "attention plan requires a pair");
        std::vector<Mat<T>> q(B), k(B), v(B);
        for (int i = 0; i < B; ++i) {
            q[i] = Wq.forward(xs[i], s);
            k[i] = Wk.forward(xs[i], s);
            v[i] = Wv.forward(xs[i], s);
        }
        const int dh = ch / heads;
        std::vector<Mat<T>> out(B);
        for (int i = 0; i < B; ++i) {
            Mat<T> kk, vv;
            if (plan == AttentionPlan::bi) {
                const int j = 1 - i;
                kk.resize(ch, k[i].cols() + k[j].cols());
                kk << k[i], k[j];
                vv.resize(ch, v[i].cols() + v[j].cols());
                vv << v[i], v[j];
            } else if (plan == AttentionPlan::uni && i == 1) {
                kk = k[0];
                vv = v[0];
            } else {
                kk = k[i];
                vv = v[i];
            }
            out[i].resize(ch, xs[i].cols());
            for (int h = 0; h < heads; ++h) {
                Mat<T> attn;
                Mat<T> o = nn::attend<T>(q[i].middleRows(h * dh, dh), kk.middleRows(h * dh, dh),
                                         vv.middleRows(h * dh, dh), s, rec ? &attn : nullptr);
                if (rec)
                    rec->items.push_back({layer_idx, i, h, q[i].middleRows(h * dh, dh),
                                          kk.middleRows(h * dh, dh), vv.middleRows(h * dh, dh),
                                          attn});
                out[i].middleRows(h * dh, dh) = o;
            }
        }
        std::vector<Mat<T>> ys(B);
        for (int i = 0; i < B; ++i) ys[i] = xs[i] + Wo.forward(out[i], s);
        return ys;
    }

    std::vector<Mat<T>> backward(const std::vector<Mat<T>>& dys, Store<T>& s) {
        const int B = int(dys.size());
        const int dh = ch / heads;
        std::vector<Mat<T>> dout(B);
        for (int i = B - 1; i >= 0; --i) dout[i] = Wo.backward(dys[i], s);
        std::vector<Mat<T>> dq(B), dk(B), dv(B);
        for (int i = B - 1; i >= 0; --i) {
            dq[i].setZero(ch, dout[i].cols());
            dk[i].setZero(ch, dout[i].cols());
            dv[i].setZero(ch, dout[i].cols());
            for (int h = heads - 1; h >= 0; --h) {
                auto g = nn::attend_backward<T>(Mat<T>(dout[i].middleRows(h * dh, dh)), s);
                dq[i].middleRows(h * dh, dh) = g.dq;
                dk[i].middleRows(h * dh, dh) = g.dk;
                dv[i].middleRows(h * dh, dh) = g.dv;
            }
        }
        std::vector<Mat<T>> dxs(B);
        for (int i = B - 1; i >= 0; --i) {
            Mat<T> dx = Wv.backward(dv[i], s);
            dx += Wk.backward(dk[i], s);
            dx += Wq.backward(dq[i], s);
            dxs[i] = dx + dys[i];
        }
        return dxs;
    }

    void visit(const std::string& p, const nn::ParamVisitor<T>& fn) {
        Wq.visit(p + ".q", fn);
        Wk.visit(p + ".k", fn);
        Wv.visit(p + ".v", fn);
        Wo.visit(p + ".o", fn);
    }
};

template <class T>
struct CrossAttn {
    int ch = 0, heads = 1, kv_dim = 0;
    nn::Linear<T> Wq, Wk, Wv, Wo;

    void init(Rng& rng, int channels, int cond_dim, int heads_, bool zero_tails) {
        ch = channels;
        heads = heads_;
        kv_dim = cond_dim;
        check(ch % heads == 0, "attention: heads must divide channels");
        Wq.init(rng, ch, ch);
        Wk.init(rng, cond_dim, ch);
        Wv.init(rng, cond_dim, ch);
        Wo.init(rng, ch, ch);
        if (zero_tails) Wo.W.setZero();
    }

    std::vector<Mat<T>> forward(const std::vector<Mat<T>>& xs, const std::vector<Mat<T>>& toks,
                                Store<T>& s) const {
        const int B = int(xs.size());
        std::vector<Mat<T>> q(B), k(B), v(B);
        for (int i = 0; i < B; ++i) {
            q[i] = Wq.forward(xs[i], s);
            k[i] = Wk.forward(toks[i], s);
            v[i] = Wv.forward(toks[i], s);
        }
        const int dh = ch / heads;
        std::vector<Mat<T>> out(B);
        for (int i = 0; i < B; ++i) {
            out[i].resize(ch, xs[i].cols());
            for (int h = 0; h < heads; ++h)
                out[i].middleRows(h * dh, dh) =
                    nn::attend<T>(q[i].middleRows(h * dh, dh), k[i].middleRows(h * dh, dh),
                                  v[i].middleRows(h * dh, dh), s, nullptr);
        }
        std::vector<Mat<T>> ys(B);
        for (int i = 0; i < B; ++i) ys[i] = xs[i] + Wo.forward(out[i], s);
        return ys;
    }

    struct Back {
        std::vector<Mat<T>> dx, dtok;
    };
    Back backward(const std::vector<Mat<T>>& dys, Store<T>& s) {
        const int B = int(dys.size());
        const int dh = ch / heads;
        std::vector<Mat<T>> dout(B);
        for (int i = B - 1; i >= 0; --i) dout[i] = Wo.backward(dys[i], s);
        std::vector<Mat<T>> dq(B), dk(B), dv(B);
        for (int i = B - 1; i >= 0; --i) {
            dq[i].setZero(ch, dout[i].cols());
            for (int h = heads - 1; h >= 0; --h) {
                auto g = nn::attend_backward<T>(Mat<T>(dout[i].middleRows(h * dh, dh)), s);
                dq[i].middleRows(h * dh, dh) = g.dq;
                if (dk[i].size() == 0) {
                    dk[i].setZero(ch, g.dk.cols());
                    dv[i].setZero(ch, g.dv.cols());
                }
                dk[i].middleRows(h * dh, dh) = g.dk;
                dv[i].middleRows(h * dh, dh) = g.dv;
            }
        }
        Back b;
        b.dx.resize(B);
        b.dtok.resize(B);
        for (int i = B - 1; i >= 0; --i) {
            b.dtok[i] = Wv.backward(dv[i], s);
            b.dtok[i] += Wk.backward(dk[i], s);
            b.dx[i] = Wq.backward(dq[i], s) + dys[i];
        }
        return b;
    }

    void visit(const std::string& p, const nn::ParamVisitor<T>& fn) {
        Wq.visit(p + ".q", fn);
        Wk.visit(p + ".k", fn);
        Wv.visit(p + ".v", fn);
        Wo.visit(p + ".o", fn);
    }
};

} // namespace detail

// Two-level UNet over space-to-depth latents: stem + res blocks at full
// latent resolution, strided conv down to the attention bottleneck (self +
// cross), a mid stack (res/self/cross/res), then upsample, skip concat, and a
// zero-initialized output head. Timestep enters through a sinusoidal MLP fed
// to every residual block; the condition enters through cross-attention over
// a [start, class] token pair.
template <class T>
class ToyUNet {
public:
    using Mat = nn::Mat<T>;
    using Store = nn::Store<T>;

    UNetConfig cfg;

    void init(const UNetConfig& c, bool zero_tails = true) {
        cfg = c;
        check(cfg.widths.size() == 2, "unet: exactly two level widths");
        check(cfg.latent_size % 2 == 0, "unet: latent size must be even");
        check(cfg.res_blocks >= 1, "unet: res_blocks must be positive");
        check(cfg.vocab >= 2, "unet: vocabulary needs a class and the null token");
        check(cfg.temb_dim % 2 == 0, "unet: temb_dim must be even");
        for (int w : cfg.widths)
            check(w > 0 && w % cfg.groups == 0, "unet: widths must be positive multiples of groups");
        const int w0 = cfg.widths[0], w1 = cfg.widths[1];
        Rng rng(cfg.param_seed);
        lin_t1.init(rng, cfg.temb_dim, cfg.temb_dim);
        lin_t2.init(rng, cfg.temb_dim, cfg.temb_dim);
        emb = nn::normal_mat<T>(rng, cfg.cond_dim, cfg.vocab, 1.0);
        start = nn::normal_mat<T>(rng, cfg.cond_dim, 1, 1.0);
        gemb = Mat::Zero(cfg.cond_dim, cfg.vocab);
        gstart = Mat::Zero(cfg.cond_dim, 1);
        stem.init(rng, cfg.latent_channels, w0, 3, 1, 1);
        enc0.resize(cfg.res_blocks);
        for (auto& rb : enc0) rb.init(rng, w0, w0, cfg.groups, cfg.temb_dim, zero_tails);
        down.init(rng, w0, w1, 3, 2, 1);
        enc1.resize(cfg.res_blocks);
        for (auto& rb : enc1) rb.init(rng, w1, w1, cfg.groups, cfg.temb_dim, zero_tails);
        enc1_self.init(rng, w1, cfg.heads, zero_tails);
        enc1_cross.init(rng, w1, cfg.cond_dim, cfg.heads, zero_tails);
        mid1.init(rng, w1, w1, cfg.groups, cfg.temb_dim, zero_tails);
        mid_self.init(rng, w1, cfg.heads, zero_tails);
        mid_cross.init(rng, w1, cfg.cond_dim, cfg.heads, zero_tails);
        mid2.init(rng, w1, w1, cfg.groups, cfg.temb_dim, zero_tails);
        up.init(rng, w1, w0, 3, 1, 1);
        dec.resize(cfg.res_blocks);
        dec[0].init(rng, 2 * w0, w0, cfg.groups, cfg.temb_dim, zero_tails);
        for (int i = 1; i < cfg.res_blocks; ++i)
            dec[i].init(rng, w0, w0, cfg.groups, cfg.temb_dim, zero_tails);
        gn_out.init(w0, cfg.groups);
        conv_out.init(rng, w0, cfg.latent_channels, 3, 1, 1, zero_tails);
    }

    // token matrix [start | class-or-override], cond_dim x 2
    Mat cond_tokens(int token) const {
        check(token >= 0 && token < cfg.vocab, "unet: token out of vocabulary");
        Mat t(cfg.cond_dim, 2);
        t.col(0) = start.col(0);
        t.col(1) = emb.col(token);
        return t;
    }
    Mat cond_tokens_override(const Mat& embedding) const {
        check(embedding.rows() == cfg.cond_dim && embedding.cols() == 1,
              "unet: override embedding has wrong shape");
        Mat t(cfg.cond_dim, 2);
        t.col(0) = start.col(0);
        t.col(1) = embedding.col(0);
        return t;
    }

    // xs: latent_channels x (latent_size^2) per entry
    std::vector<Mat> forward(const std::vector<Mat>& xs, const std::vector<double>& ts,
                             const std::vector<Mat>& toks, AttentionPlan plan, Store& s,
                             AttnRecorder<T>* rec = nullptr,
                             std::vector<Mat>* mid_tap = nullptr) const {
        const int B = int(xs.size());
        check(B >= 1 && int(ts.size()) == B && int(toks.size()) == B, "unet: batch size mismatch");
        const int s0 = cfg.latent_size, s1 = s0 / 2;
        const int n0 = s0 * s0;
        for (const Mat& x : xs)
            check(x.rows() == cfg.latent_channels && x.cols() == n0, "unet: latent shape mismatch");

        std::vector<Mat> temb(B);
        for (int i = 0; i < B; ++i) {
            Mat e = nn::timestep_embedding<T>(ts[i], cfg.temb_dim);
            e = lin_t1.forward(e, s);
            e = silu_t1.forward(e, s);
            temb[i] = lin_t2.forward(e, s);
        }

        std::vector<Mat> h(B);
        for (int i = 0; i < B; ++i) h[i] = stem.forward(xs[i], s0, s0, s);
        for (auto& rb : enc0)
            for (int i = 0; i < B; ++i) h[i] = rb.forward(h[i], temb[i], s0, s0, s);
        std::vector<Mat> skip = h;
        for (int i = 0; i < B; ++i) h[i] = down.forward(h[i], s0, s0, s);
        for (auto& rb : enc1)
            for (int i = 0; i < B; ++i) h[i] = rb.forward(h[i], temb[i], s1, s1, s);
        h = enc1_self.forward(h, plan, s, rec, 0);
        h = enc1_cross.forward(h, toks, s);
        for (int i = 0; i < B; ++i) h[i] = mid1.forward(h[i], temb[i], s1, s1, s);
        h = mid_self.forward(h, plan, s, rec, 1);
        h = mid_cross.forward(h, toks, s);
        for (int i = 0; i < B; ++i) h[i] = mid2.forward(h[i], temb[i], s1, s1, s);
        if (mid_tap) *mid_tap = h;
        for (int i = 0; i < B; ++i) h[i] = up.forward(nn::nearest_up2<T>(h[i], s1, s1), s0, s0, s);
        for (int i = 0; i < B; ++i) {
            Mat cat(h[i].rows() + skip[i].rows(), n0);
            cat << h[i], skip[i];
            h[i] = std::move(cat);
        }
        for (auto& rb : dec)
            for (int i = 0; i < B; ++i) h[i] = rb.forward(h[i], temb[i], s0, s0, s);
        for (int i = 0; i < B; ++i) {
            h[i] = gn_out.forward(h[i], s);
            h[i] = silu_out.forward(h[i], s);
            h[i] = conv_out.forward(h[i], s0, s0, s);
        }
        return h;
    }

    struct BackResult {
        std::vector<Mat> dx;
        std::vector<Mat> dtok;
    };

    // mirrors forward with plan == none
    BackResult backward(const std::vector<Mat>& deps, Store& s) {
        const int B = int(deps.size());
        const int s0 = cfg.latent_size, s1 = s0 / 2;
        const int w0 = cfg.widths[0];
        std::vector<Mat> dh = deps;
        std::vector<Mat> dtemb(B);
        for (int i = 0; i < B; ++i) dtemb[i] = Mat::Zero(cfg.temb_dim, 1);

        for (int i = B - 1; i >= 0; --i) {
            dh[i] = conv_out.backward(dh[i], s0, s0, s);
            dh[i] = silu_out.backward(dh[i], s);
            dh[i] = gn_out.backward(dh[i], s);
        }
        for (int r = int(dec.size()) - 1; r >= 0; --r)
            for (int i = B - 1; i >= 0; --i) dh[i] = dec[r].backward(dh[i], dtemb[i], s0, s0, s);
        std::vector<Mat> dskip(B);
        for (int i = B - 1; i >= 0; --i) {
            dskip[i] = dh[i].bottomRows(w0);
            dh[i] = Mat(dh[i].topRows(w0));
        }
        for (int i = B - 1; i >= 0; --i)
            dh[i] = nn::nearest_up2_backward<T>(up.backward(dh[i], s0, s0, s), s1, s1);
        for (int i = B - 1; i >= 0; --i) dh[i] = mid2.backward(dh[i], dtemb[i], s1, s1, s);
        auto bx_mid = mid_cross.backward(dh, s);
        std::vector<Mat> dtok = std::move(bx_mid.dtok);
        dh = mid_self.backward(bx_mid.dx, s);
        for (int i = B - 1; i >= 0; --i) dh[i] = mid1.backward(dh[i], dtemb[i], s1, s1, s);
        auto bx_enc = enc1_cross.backward(dh, s);
        for (int i = 0; i < B; ++i) dtok[i] += bx_enc.dtok[i];
        dh = enc1_self.backward(bx_enc.dx, s);
        for (int r = int(enc1.size()) - 1; r >= 0; --r)
            for (int i = B - 1; i >= 0; --i) dh[i] = enc1[r].backward(dh[i], dtemb[i], s1, s1, s);
        for (int i = B - 1; i >= 0; --i) dh[i] = down.backward(dh[i], s0, s0, s) + dskip[i];
        for (int r = int(enc0.size()) - 1; r >= 0; --r)
            for (int i = B - 1; i >= 0; --i) dh[i] = enc0[r].backward(dh[i], dtemb[i], s0, s0, s);
        BackResult out;
        out.dx.resize(B);
        for (int i = B - 1; i >= 0; --i) out.dx[i] = stem.backward(dh[i], s0, s0, s);
        for (int i = B - 1; i >= 0; --i) {
            Mat de = lin_t2.backward(dtemb[i], s);
            de = silu_t1.backward(de, s);
            (void)lin_t1.backward(de, s);
        }
        out.dtok = std::move(dtok);
        return out;
    }

    // routes a token-matrix gradient into the embedding table buffers
    void scatter_cond_grad(int token, const Mat& dtok) {
        gstart.col(0) += dtok.col(0);
        gemb.col(token) += dtok.col(1);
    }

    void visit_params(const nn::ParamVisitor<T>& fn) {
        fn("emb.start", start, gstart);
        fn("emb.table", emb, gemb);
        lin_t1.visit("temb.lin1", fn);
        lin_t2.visit("temb.lin2", fn);
        stem.visit("stem", fn);
        for (size_t i = 0; i < enc0.size(); ++i) enc0[i].visit("enc0." + std::to_string(i), fn);
        down.visit("down", fn);
        for (size_t i = 0; i < enc1.size(); ++i) enc1[i].visit("enc1." + std::to_string(i), fn);
        enc1_self.visit("enc1.self", fn);
        enc1_cross.visit("enc1.cross", fn);
        mid1.visit("mid.rb1", fn);
        mid_self.visit("mid.self", fn);
        mid_cross.visit("mid.cross", fn);
        mid2.visit("mid.rb2", fn);
        up.visit("up", fn);
        for (size_t i = 0; i < dec.size(); ++i) dec[i].visit("dec." + std::to_string(i), fn);
        gn_out.visit("out.gn", fn);
        conv_out.visit("out.conv", fn);
    }

    void zero_grads() {
        visit_params([](const std::string&, Mat&, Mat& g) { g.setZero(); });
    }

    size_t param_count() {
        size_t n = 0;
        visit_params([&n](const std::string&, Mat& p, Mat&) { n += size_t(p.size()); });
        return n;
    }

private:
    nn::Linear<T> lin_t1, lin_t2;
    nn::SiLU<T> silu_t1, silu_out;
    Mat emb, start, gemb, gstart;
    nn::Conv2d<T> stem, down, up, conv_out;
    std::vector<detail::ResBlock<T>> enc0, enc1, dec;
    detail::SelfAttn<T> enc1_self, mid_self;
    detail::CrossAttn<T> enc1_cross, mid_cross;
    detail::ResBlock<T> mid1, mid2;
    nn::GroupNorm<T> gn_out;
};

} // namespace stereodiff
