#include "core/denoiser.hpp"

#include <cmath>
#include <unordered_map>

#include "core/checkpoint.hpp"
#include "core/errors.hpp"

namespace stereodiff {

nn::Mat<float> grid_to_mat(const Grid& g) {
    nn::Mat<float> m(g.channels, g.height * g.width);
    for (int c = 0; c < g.channels; ++c)
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) m(c, y * g.width + x) = float(g.at(c, y, x));
    return m;
}

Grid mat_to_grid(const nn::Mat<float>& m, int h, int w) {
    check(m.cols() == Eigen::Index(h) * w, "latent map size mismatch");
    Grid g(int(m.rows()), h, w);
    for (int c = 0; c < g.channels; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) g.at(c, y, x) = double(m(c, y * w + x));
    return g;
}

std::pair<Grid, Grid> Denoiser::epsilon_pair(const Grid& a, const Grid& b, int label,
                                             const Condition& ca, const Condition& cb,
                                             AttentionPlan plan, AttnRecorder<float>* rec) const {
    check(plan == AttentionPlan::none && rec == nullptr,
          "this denoiser does not expose attention interception; use plan none");
    return {epsilon(a, label, ca), epsilon(b, label, cb)};
}

Grid Denoiser::encode_image(const Grid& image) const { return encode(image, codec()); }
Grid Denoiser::decode_latent(const Grid& latent) const { return decode(latent, codec()); }

Grid analytic_epsilon(const Grid& x_t, int t, const NoiseSchedule& s, const Grid& mu,
                      double var0) {
    check(var0 > 0.0, "analytic denoiser: variance must be positive");
    check_same_shape(x_t, mu, "analytic denoiser");
    check(t >= 1 && t <= s.total_steps, "analytic denoiser: timestep out of range");
    const double ab = s.abar(t);
    check(ab < 1.0, "analytic denoiser: nothing to denoise at abar = 1");
    const double sab = std::sqrt(ab);
    const double rest = 1.0 - ab;
    const double denom = ab * var0 + rest;
    Grid eps(x_t.channels, x_t.height, x_t.width);
    const double srest = std::sqrt(rest);
    for (size_t i = 0; i < eps.numel(); ++i) {
        const double m = (var0 * sab * x_t.v[i] + rest * mu.v[i]) / denom;
        eps.v[i] = (x_t.v[i] - sab * m) / srest;
    }
    return eps;
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(Grid mu, double var0, NoiseSchedule parent)
    : mu_(std::move(mu)), var0_(var0), parent_(std::move(parent)) {
    check(var0_ > 0.0, "analytic denoiser: variance must be positive");
    check_nonempty(mu_, "analytic denoiser mean");
    validate_schedule(parent_);
}

std::array<int, 3> AnalyticGaussianDenoiser::latent_dims() const {
    return {mu_.channels, mu_.height, mu_.width};
}

CodecConfig AnalyticGaussianDenoiser::codec() const { return CodecConfig{1, mu_.channels}; }

Grid AnalyticGaussianDenoiser::epsilon(const Grid& x, int label, const Condition&) const {
    return analytic_epsilon(x, label, parent_, mu_, var0_);
}

ToyDenoiser::ToyDenoiser(const UNetConfig& cfg, int codec_factor) : cfg_(cfg) {
    check(codec_factor >= 1, "toy denoiser: codec factor must be positive");
    const int f2 = codec_factor * codec_factor;
    check(cfg.latent_channels % f2 == 0,
          "toy denoiser: latent channels incompatible with codec factor");
    codec_ = CodecConfig{codec_factor, cfg.latent_channels / f2};
    net_.init(cfg);
    stats_.mean.assign(size_t(cfg.latent_channels), 0.0);
    stats_.std.assign(size_t(cfg.latent_channels), 1.0);
}

std::array<int, 3> ToyDenoiser::latent_dims() const {
    return {cfg_.latent_channels, cfg_.latent_size, cfg_.latent_size};
}

CodecConfig ToyDenoiser::codec() const { return codec_; }

NoiseSchedule ToyDenoiser::parent_schedule() const {
    return make_schedule(ScheduleKind::linear_beta, 1000);
}

std::vector<double> ToyDenoiser::null_embedding() const {
    const nn::Mat<float> toks = net_.cond_tokens(null_token());
    std::vector<double> e(size_t(cfg_.cond_dim));
    for (int i = 0; i < cfg_.cond_dim; ++i) e[size_t(i)] = double(toks(i, 1));
    return e;
}

nn::Mat<float> ToyDenoiser::tokens_for(const Condition& c) const {
    if (!c.override_embedding.empty()) {
        check(int(c.override_embedding.size()) == cfg_.cond_dim,
              "condition override embedding has wrong dimension");
        nn::Mat<float> e(cfg_.cond_dim, 1);
        for (int i = 0; i < cfg_.cond_dim; ++i) e(i, 0) = float(c.override_embedding[i]);
        return net_.cond_tokens_override(e);
    }
    return net_.cond_tokens(c.token);
}

Grid ToyDenoiser::epsilon(const Grid& x, int label, const Condition& cond) const {
    const auto d = latent_dims();
    check(x.channels == d[0] && x.height == d[1] && x.width == d[2],
          "toy denoiser: latent shape mismatch");
    check(label >= 0, "toy denoiser: negative timestep label");
    nn::Store<float> store;
    std::vector<nn::Mat<float>> xs{grid_to_mat(x)};
    auto eps = net_.forward(xs, {double(label)}, {tokens_for(cond)}, AttentionPlan::none, store);
    return mat_to_grid(eps[0], d[1], d[2]);
}

std::pair<Grid, Grid> ToyDenoiser::epsilon_pair(const Grid& a, const Grid& b, int label,
                                                const Condition& ca, const Condition& cb,
                                                AttentionPlan plan,
                                                AttnRecorder<float>* rec) const {
    const auto d = latent_dims();
    for (const Grid* g : {&a, &b})
        check(g->channels == d[0] && g->height == d[1] && g->width == d[2],
              "toy denoiser: latent shape mismatch");
    check(label >= 0, "toy denoiser: negative timestep label");
    nn::Store<float> store;
    std::vector<nn::Mat<float>> xs{grid_to_mat(a), grid_to_mat(b)};
    const std::vector<double> ts{double(label), double(label)};
    auto eps = net_.forward(xs, ts, {tokens_for(ca), tokens_for(cb)}, plan, store, rec);
    return {mat_to_grid(eps[0], d[1], d[2]), mat_to_grid(eps[1], d[1], d[2])};
}

Grid ToyDenoiser::encode_image(const Grid& image) const {
    Grid z = encode(image, codec_);
    for (int c = 0; c < z.channels; ++c)
        for (int y = 0; y < z.height; ++y)
            for (int x = 0; x < z.width; ++x)
                z.at(c, y, x) = (z.at(c, y, x) - stats_.mean[c]) / stats_.std[c];
    return z;
}

Grid ToyDenoiser::decode_latent(const Grid& latent) const {
    Grid z = latent;
    for (int c = 0; c < z.channels; ++c)
        for (int y = 0; y < z.height; ++y)
            for (int x = 0; x < z.width; ++x)
                z.at(c, y, x) = z.at(c, y, x) * stats_.std[c] + stats_.mean[c];
    return decode(z, codec_);
}

Grid ToyDenoiser::mid_features(const Grid& image) const {
    check(trained_, "perceptual features require a trained denoiser");
    const Grid z = encode_image(image);
    const auto d = latent_dims();
    check(z.channels == d[0] && z.height == d[1] && z.width == d[2],
          "toy denoiser: image incompatible with latent shape");
    nn::Store<float> store;
    std::vector<nn::Mat<float>> xs{grid_to_mat(z)};
    std::vector<nn::Mat<float>> tap;
    net_.forward(xs, {0.0}, {net_.cond_tokens(cfg_.null_token())}, AttentionPlan::none, store,
                 nullptr, &tap);
    nn::Mat<float> f = tap[0];
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        const float mean = f.row(r).mean();
        const float var = (f.row(r).array() - mean).square().mean();
        f.row(r) = ((f.row(r).array() - mean) / std::sqrt(var + 1e-8f)).matrix();
    }
    const int s1 = cfg_.latent_size / 2;
    return mat_to_grid(f, s1, s1);
}

Grid ToyDenoiser::epsilon_grad_begin(const Grid& x, int label,
                                     const std::vector<double>& embedding) {
    check(!grad_armed_, "gradient evaluation already in progress");
    const auto d = latent_dims();
    check(x.channels == d[0] && x.height == d[1] && x.width == d[2],
          "toy denoiser: latent shape mismatch");
    grad_store_.stack.clear();
    grad_x_ = {grid_to_mat(x)};
    grad_label_ = double(label);
    Condition c;
    c.override_embedding = embedding;
    grad_toks_ = {tokens_for(c)};
    auto eps = net_.forward(grad_x_, {grad_label_}, grad_toks_, AttentionPlan::none, grad_store_);
    grad_armed_ = true;
    return mat_to_grid(eps[0], d[1], d[2]);
}

std::vector<double> ToyDenoiser::epsilon_grad_end(const Grid& deps) {
    check(grad_armed_, "no gradient evaluation in progress");
    grad_armed_ = false;
    auto back = net_.backward({grid_to_mat(deps)}, grad_store_);
    check(grad_store_.stack.empty(), "activation store imbalance after backward");
    std::vector<double> demb(size_t(cfg_.cond_dim));
    for (int i = 0; i < cfg_.cond_dim; ++i) demb[i] = double(back.dtok[0](i, 1));
    net_.zero_grads();
    return demb;
}

void ToyDenoiser::set_stats(std::vector<double> mean, std::vector<double> std) {
    check(int(mean.size()) == cfg_.latent_channels && int(std.size()) == cfg_.latent_channels,
          "latent stats must have one entry per channel");
    for (double s : std) check(s > 0.0, "latent stats: std must be positive");
    stats_.mean = std::move(mean);
    stats_.std = std::move(std);
}

void ToyDenoiser::save(const std::string& path) const {
    Checkpoint c;
    c.config = cfg_;
    c.codec_factor = codec_.factor;
    c.trained = trained_;
    auto& net = const_cast<ToyUNet<float>&>(net_);
    net.visit_params([&c](const std::string& name, nn::Mat<float>& p, nn::Mat<float>&) {
        NamedTensor t;
        t.name = name;
        t.shape = {uint32_t(p.rows()), uint32_t(p.cols())};
        t.data.assign(p.data(), p.data() + p.size());
        c.tensors.push_back(std::move(t));
    });
    for (const char* name : {"stats.mean", "stats.std"}) {
        const auto& src = std::string(name) == "stats.mean" ? stats_.mean : stats_.std;
        NamedTensor t;
        t.name = name;
        t.shape = {uint32_t(src.size()), 1};
        t.data.reserve(src.size());
        for (double v : src) t.data.push_back(float(v));
        c.tensors.push_back(std::move(t));
    }
    save_checkpoint(c, path);
}

std::unique_ptr<ToyDenoiser> ToyDenoiser::load(const std::string& path) {
    const Checkpoint c = load_checkpoint(path);
    auto den = std::make_unique<ToyDenoiser>(c.config, c.codec_factor);
    std::unordered_map<std::string, nn::Mat<float>*> params;
    den->net_.visit_params([&params](const std::string& name, nn::Mat<float>& p, nn::Mat<float>&) {
        params[name] = &p;
    });
    std::vector<double> mean, stdv;
    size_t assigned = 0;
    for (const NamedTensor& t : c.tensors) {
        if (t.name == "stats.mean" || t.name == "stats.std") {
            auto& dst = t.name == "stats.mean" ? mean : stdv;
            dst.assign(t.data.begin(), t.data.end());
            continue;
        }
        auto it = params.find(t.name);
        check(it != params.end(), "checkpoint: unknown tensor '" + t.name + "'");
        nn::Mat<float>& p = *it->second;
        check(t.shape.size() == 2 && Eigen::Index(t.shape[0]) == p.rows() &&
                  Eigen::Index(t.shape[1]) == p.cols(),
              "checkpoint: tensor '" + t.name + "' has wrong shape");
        std::copy(t.data.begin(), t.data.end(), p.data());
        ++assigned;
    }
    check(assigned == params.size(), "checkpoint: missing parameter tensors");
    check(!mean.empty() && !stdv.empty(), "checkpoint: missing latent stats");
    den->set_stats(std::move(mean), std::move(stdv));
    den->trained_ = c.trained;
    return den;
}

} // namespace stereodiff
