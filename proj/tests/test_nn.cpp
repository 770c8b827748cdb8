#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "core/nn.hpp"
#include "core/rng.hpp"
#include "core/unet.hpp"

using namespace stereodiff;
using Md = nn::Mat<double>;

namespace {

// central finite difference of a scalar functional against one coordinate
double fd_coord(double& coord, const std::function<double()>& eval, double h = 1e-5) {
    const double keep = coord;
    coord = keep + h;
    const double lp = eval();
    coord = keep - h;
    const double lm = eval();
    coord = keep;
    return (lp - lm) / (2.0 * h);
}

void check_close_grad(double analytic, double fd) {
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-3});
    CHECK(std::abs(analytic - fd) <= 1e-3 * denom);
}

} // namespace

TEST_CASE("linear layer gradients match finite differences") {
    Rng rng(11);
    nn::Linear<double> lin;
    lin.init(rng, 3, 4);
    Md x = nn::normal_mat<double>(rng, 3, 5, 1.0);
    Md wt = nn::normal_mat<double>(rng, 4, 5, 1.0);
    auto eval = [&] {
        nn::Store<double> s;
        return lin.forward(x, s).cwiseProduct(wt).sum();
    };
    nn::Store<double> s;
    Md y = lin.forward(x, s);
    Md dx = lin.backward(wt, s);
    CHECK(y.rows() == 4);
    CHECK(s.stack.empty());
    for (int i = 0; i < 5; ++i) {
        const int r = int(rng.uniform() * 3), c = int(rng.uniform() * 5);
        check_close_grad(dx(r, c), fd_coord(x(r, c), eval));
    }
    for (int i = 0; i < 5; ++i) {
        const int r = int(rng.uniform() * 4), c = int(rng.uniform() * 3);
        check_close_grad(lin.gW(r, c), fd_coord(lin.W(r, c), eval));
    }
    check_close_grad(lin.gb(2, 0), fd_coord(lin.b(2, 0), eval));
}

TEST_CASE("conv layer gradients match finite differences") {
    struct Conf {
        int in, out, k, stride, pad, H, W;
    };
    for (const Conf cf : {Conf{3, 2, 3, 1, 1, 5, 4}, Conf{2, 3, 3, 2, 1, 4, 6},
                          Conf{4, 2, 1, 1, 0, 3, 3}}) {
        CAPTURE(cf.stride);
        Rng rng(7 + cf.stride);
        nn::Conv2d<double> conv;
        conv.init(rng, cf.in, cf.out, cf.k, cf.stride, cf.pad);
        const int oh = conv.out_dim(cf.H), ow = conv.out_dim(cf.W);
        Md x = nn::normal_mat<double>(rng, cf.in, cf.H * cf.W, 1.0);
        Md wt = nn::normal_mat<double>(rng, cf.out, oh * ow, 1.0);
        auto eval = [&] {
            nn::Store<double> s;
            return conv.forward(x, cf.H, cf.W, s).cwiseProduct(wt).sum();
        };
        nn::Store<double> s;
        Md y = conv.forward(x, cf.H, cf.W, s);
        CHECK(y.cols() == oh * ow);
        Md dx = conv.backward(wt, cf.H, cf.W, s);
        for (int i = 0; i < 6; ++i) {
            const int r = int(rng.uniform() * cf.in), c = int(rng.uniform() * cf.H * cf.W);
            check_close_grad(dx(r, c), fd_coord(x(r, c), eval));
        }
        for (int i = 0; i < 6; ++i) {
            const int r = int(rng.uniform() * cf.out);
            const int c = int(rng.uniform() * (cf.in * cf.k * cf.k));
            check_close_grad(conv.gW(r, c), fd_coord(conv.W(r, c), eval));
        }
        check_close_grad(conv.gb(0, 0), fd_coord(conv.b(0, 0), eval));
    }
}

TEST_CASE("group norm gradients match finite differences") {
    Rng rng(19);
    nn::GroupNorm<double> gn;
    gn.init(6, 3);
    gn.gamma = nn::normal_mat<double>(rng, 6, 1, 1.0);
    gn.beta = nn::normal_mat<double>(rng, 6, 1, 1.0);
    Md x = nn::normal_mat<double>(rng, 6, 7, 1.5);
    Md wt = nn::normal_mat<double>(rng, 6, 7, 1.0);
    auto eval = [&] {
        nn::Store<double> s;
        return gn.forward(x, s).cwiseProduct(wt).sum();
    };
    nn::Store<double> s;
    gn.forward(x, s);
    Md dx = gn.backward(wt, s);
    for (int i = 0; i < 8; ++i) {
        const int r = int(rng.uniform() * 6), c = int(rng.uniform() * 7);
        check_close_grad(dx(r, c), fd_coord(x(r, c), eval));
    }
    for (int r = 0; r < 6; ++r) {
        check_close_grad(gn.ggamma(r, 0), fd_coord(gn.gamma(r, 0), eval));
        check_close_grad(gn.gbeta(r, 0), fd_coord(gn.beta(r, 0), eval));
    }
}

TEST_CASE("silu gradients match finite differences") {
    Rng rng(23);
    nn::SiLU<double> act;
    Md x = nn::normal_mat<double>(rng, 4, 3, 2.0);
    Md wt = nn::normal_mat<double>(rng, 4, 3, 1.0);
    auto eval = [&] {
        nn::Store<double> s;
        return act.forward(x, s).cwiseProduct(wt).sum();
    };
    nn::Store<double> s;
    act.forward(x, s);
    Md dx = act.backward(wt, s);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c) check_close_grad(dx(r, c), fd_coord(x(r, c), eval));
}

TEST_CASE("attention gradients match finite differences") {
    Rng rng(31);
    Md q = nn::normal_mat<double>(rng, 4, 5, 1.0);
    Md k = nn::normal_mat<double>(rng, 4, 6, 1.0);
    Md v = nn::normal_mat<double>(rng, 4, 6, 1.0);
    Md wt = nn::normal_mat<double>(rng, 4, 5, 1.0);
    auto eval = [&] {
        nn::Store<double> s;
        return nn::attend<double>(q, k, v, s).cwiseProduct(wt).sum();
    };
    nn::Store<double> s;
    nn::attend<double>(q, k, v, s);
    auto g = nn::attend_backward<double>(wt, s);
    for (int i = 0; i < 6; ++i) {
        const int r = int(rng.uniform() * 4);
        const int cq = int(rng.uniform() * 5), ck = int(rng.uniform() * 6);
        check_close_grad(g.dq(r, cq), fd_coord(q(r, cq), eval));
        check_close_grad(g.dk(r, ck), fd_coord(k(r, ck), eval));
        check_close_grad(g.dv(r, ck), fd_coord(v(r, ck), eval));
    }
}

TEST_CASE("attention maps are row-stochastic and stable under large logits") {
    Rng rng(37);
    Md S = nn::normal_mat<double>(rng, 5, 7, 1.0);
    S.row(2).array() += 1e4;
    Md A = nn::softmax_rows<double>(S);
    for (int r = 0; r < 5; ++r) {
        CHECK(A.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        for (int c = 0; c < 7; ++c) {
            CHECK(std::isfinite(A(r, c)));
            CHECK(A(r, c) >= 0.0);
        }
    }
}

TEST_CASE("nearest upsampling backward is the exact adjoint") {
    Rng rng(41);
    Md x = nn::normal_mat<double>(rng, 3, 4 * 5, 1.0);
    Md y = nn::normal_mat<double>(rng, 3, 16 * 5 * 4 / 4, 1.0);    // 3 x (8*10)
    Md up = nn::nearest_up2<double>(x, 4, 5);
    Md down = nn::nearest_up2_backward<double>(y, 4, 5);
    CHECK(up.cols() == 80);
    CHECK(up.cwiseProduct(y).sum() == doctest::Approx(x.cwiseProduct(down).sum()).epsilon(1e-12));
    // exact replication
    for (int yy = 0; yy < 8; ++yy)
        for (int xx = 0; xx < 10; ++xx)
            CHECK(up(1, yy * 10 + xx) == x(1, (yy / 2) * 5 + xx / 2));
}

TEST_CASE("timestep embedding has the expected structure") {
    Md e0 = nn::timestep_embedding<double>(0.0, 8);
    for (int i = 0; i < 4; ++i) {
        CHECK(e0(i, 0) == 0.0);
        CHECK(e0(4 + i, 0) == 1.0);
    }
    Md e = nn::timestep_embedding<double>(123.0, 16);
    CHECK(e.rows() == 16);
    for (int i = 0; i < 16; ++i) {
        CHECK(e(i, 0) <= 1.0);
        CHECK(e(i, 0) >= -1.0);
    }
    CHECK(nn::timestep_embedding<double>(123.0, 16) == e);
}

TEST_CASE("activation store underflow is rejected") {
    nn::Store<double> s;
    CHECK_THROWS(s.pop());
}

TEST_CASE("full network gradients match finite differences at 10 coordinates") {
    UNetConfig cfg;
    cfg.latent_channels = 4;
    cfg.latent_size = 8;
    cfg.widths = {8, 16};
    cfg.res_blocks = 1;
    cfg.heads = 2;
    cfg.vocab = 3;
    cfg.temb_dim = 16;
    cfg.cond_dim = 6;
    cfg.groups = 4;
    cfg.param_seed = 77;

    ToyUNet<double> net;
    net.init(cfg, /*zero_tails=*/false);    // zeroed output heads would null the gradients

    Rng rng(55);
    const int N = cfg.latent_size * cfg.latent_size;
    std::vector<Md> xs{nn::normal_mat<double>(rng, 4, N, 1.0),
                       nn::normal_mat<double>(rng, 4, N, 1.0)};
    const std::vector<double> ts{37.0, 512.0};
    const std::vector<int> tok_ids{0, 2};
    std::vector<Md> wt{nn::normal_mat<double>(rng, 4, N, 1.0),
                       nn::normal_mat<double>(rng, 4, N, 1.0)};

    auto eval = [&] {
        nn::Store<double> s;
        std::vector<Md> toks{net.cond_tokens(tok_ids[0]), net.cond_tokens(tok_ids[1])};
        auto eps = net.forward(xs, ts, toks, AttentionPlan::none, s);
        return eps[0].cwiseProduct(wt[0]).sum() + eps[1].cwiseProduct(wt[1]).sum();
    };

    net.zero_grads();
    nn::Store<double> s;
    std::vector<Md> toks{net.cond_tokens(tok_ids[0]), net.cond_tokens(tok_ids[1])};
    auto eps = net.forward(xs, ts, toks, AttentionPlan::none, s);
    auto back = net.backward(wt, s);
    CHECK(s.stack.empty());
    for (int i = 0; i < 2; ++i) net.scatter_cond_grad(tok_ids[i], back.dtok[i]);

    struct Entry {
        std::string name;
        Md* p;
        Md* g;
    };
    std::vector<Entry> entries;
    net.visit_params([&entries](const std::string& name, Md& p, Md& g) {
        entries.push_back({name, &p, &g});
    });
    CHECK(entries.size() > 20);

    Rng pick(123);
    int healthy = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Entry& e = entries[size_t(pick.uniform() * double(entries.size()))];
        const int r = int(pick.uniform() * double(e.p->rows()));
        const int c = int(pick.uniform() * double(e.p->cols()));
        CAPTURE(e.name);
        CAPTURE(r);
        CAPTURE(c);
        const double analytic = (*e.g)(r, c);
        const double fd = fd_coord((*e.p)(r, c), eval);
        check_close_grad(analytic, fd);
        if (std::abs(fd) > 1e-6) ++healthy;
    }
    CHECK(healthy >= 7);

    // input and embedding-table gradients against finite differences too
    for (int i = 0; i < 4; ++i) {
        const int entry = i % 2;
        const int r = int(pick.uniform() * 4.0);
        const int c = int(pick.uniform() * double(N));
        check_close_grad(back.dx[entry](r, c), fd_coord(xs[entry](r, c), eval));
    }
}
