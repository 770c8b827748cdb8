#include "core/train.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "core/errors.hpp"

namespace stereodiff {

TrainResult train_toy(ToyDenoiser& den, const std::vector<SceneRecord>& scenes,
                      const TrainConfig& cfg) {
    check(!scenes.empty(), "training requires a nonempty scene set");
    check(cfg.steps >= 1, "training requires at least one step");
    check(cfg.batch >= 1, "training batch must be positive");

    const UNetConfig& ucfg = den.config();
    const auto dims = den.latent_dims();
    const int C = dims[0];
    const Eigen::Index N = Eigen::Index(dims[1]) * dims[2];

    // raw (unstandardized) latents for both views, with their class tokens
    std::vector<Grid> raw;
    std::vector<int> tokens;
    for (const SceneRecord& sc : scenes) {
        check(sc.class_token >= 0 && sc.class_token < ucfg.null_token(),
              "scene class token collides with the null token; widen the vocabulary");
        for (const Grid* view : {&sc.left, &sc.right}) {
            raw.push_back(encode(*view, den.codec()));
            tokens.push_back(sc.class_token);
        }
    }

    std::vector<double> mean(size_t(C), 0.0), stdv(size_t(C), 0.0);
    const double count = double(raw.size()) * double(N);
    for (const Grid& z : raw)
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < z.height; ++y)
                for (int x = 0; x < z.width; ++x) mean[size_t(c)] += z.at(c, y, x);
    for (double& m : mean) m /= count;
    for (const Grid& z : raw)
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < z.height; ++y)
                for (int x = 0; x < z.width; ++x) {
                    const double d = z.at(c, y, x) - mean[size_t(c)];
                    stdv[size_t(c)] += d * d;
                }
    for (double& s : stdv) {
        s = std::sqrt(s / count);
        if (s < 1e-6) s = 1.0;    // constant channel: leave it unscaled
    }
    den.set_stats(mean, stdv);

    std::vector<nn::Mat<float>> data(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const Grid& z = raw[i];
        data[i].resize(C, N);
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < z.height; ++y)
                for (int x = 0; x < z.width; ++x)
                    data[i](c, y * z.width + x) =
                        float((z.at(c, y, x) - mean[size_t(c)]) / stdv[size_t(c)]);
    }

    const NoiseSchedule sched = den.parent_schedule();
    ToyUNet<float>& net = den.net();

    std::unordered_map<std::string, nn::Mat<float>> vel;
    net.visit_params([&vel](const std::string& name, nn::Mat<float>& p, nn::Mat<float>&) {
        vel.emplace(name, nn::Mat<float>::Zero(p.rows(), p.cols()));
    });

    Rng rng(cfg.seed);
    TrainResult res;
    res.loss_curve.reserve(size_t(cfg.steps));
    const double denom = double(cfg.batch) * double(C) * double(N);

    for (int step = 0; step < cfg.steps; ++step) {
        net.zero_grads();
        nn::Store<float> store;
        std::vector<nn::Mat<float>> xs(size_t(cfg.batch));
        std::vector<nn::Mat<float>> noise(size_t(cfg.batch));
        std::vector<double> ts(size_t(cfg.batch));
        std::vector<nn::Mat<float>> toks(size_t(cfg.batch));
        std::vector<int> tok_ids(size_t(cfg.batch));
        for (int b = 0; b < cfg.batch; ++b) {
            const size_t idx =
                std::min(raw.size() - 1, size_t(rng.uniform() * double(raw.size())));
            const int t = std::min(sched.total_steps,
                                   1 + int(rng.uniform() * double(sched.total_steps)));
            const bool drop = rng.uniform() < cfg.null_drop;
            noise[b] = nn::normal_mat<float>(rng, C, int(N), 1.0);
            const double ab = sched.abar(t);
            xs[b] = float(std::sqrt(ab)) * data[idx] + float(std::sqrt(1.0 - ab)) * noise[b];
            ts[b] = double(t);
            tok_ids[b] = drop ? ucfg.null_token() : tokens[idx];
            toks[b] = net.cond_tokens(tok_ids[b]);
        }
        auto pred = net.forward(xs, ts, toks, AttentionPlan::none, store);
        double loss = 0.0;
        std::vector<nn::Mat<float>> deps(size_t(cfg.batch));
        for (int b = 0; b < cfg.batch; ++b) {
            nn::Mat<float> diff = pred[b] - noise[b];
            loss += double(diff.squaredNorm());
            deps[b] = (2.0f / float(denom)) * diff;
        }
        loss /= denom;
        if (!std::isfinite(loss))
            fail("training diverged (non-finite loss) at step " + std::to_string(step));
        auto back = net.backward(deps, store);
        check(store.stack.empty(), "activation store imbalance after backward");
        for (int b = 0; b < cfg.batch; ++b) net.scatter_cond_grad(tok_ids[b], back.dtok[b]);
        net.visit_params([&vel, &cfg](const std::string& name, nn::Mat<float>& p,
                                      nn::Mat<float>& g) {
            nn::Mat<float>& v = vel.at(name);
            v = float(cfg.momentum) * v - float(cfg.lr) * g;
            p += v;
        });
        res.loss_curve.push_back(loss);
    }
    den.mark_trained();
    return res;
}

} // namespace stereodiff
