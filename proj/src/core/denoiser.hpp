#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/codec.hpp"
#include "core/grid.hpp"
#include "core/schedule.hpp"
#include "core/unet.hpp"

namespace stereodiff {

// Conditioning input: a class token id, optionally overridden by an explicit
// embedding vector (the optimizable stand-in for a blank text embedding).
struct Condition {
    int token = 0;
    std::vector<double> override_embedding;    // empty -> use the token's table entry

    static Condition for_token(int t) { return Condition{t, {}}; }
};

// Noise predictor behind the sampler. `label` is the timestep id of the
// parent (training) schedule; callers on a strided ladder pass
// schedule.label(t).
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual std::array<int, 3> latent_dims() const = 0;    // {channels, height, width}
    virtual CodecConfig codec() const = 0;

    virtual Grid epsilon(const Grid& x, int label, const Condition& cond) const = 0;

    // Joint evaluation of a stereo pair. Plans other than `none` rewire
    // self-attention across the two entries and need interception support.
    virtual std::pair<Grid, Grid> epsilon_pair(const Grid& a, const Grid& b, int label,
                                               const Condition& ca, const Condition& cb,
                                               AttentionPlan plan,
                                               AttnRecorder<float>* rec = nullptr) const;

    virtual bool supports_attention_control() const { return false; }

    // The schedule whose labels this denoiser understands; strided sampling
    // ladders are substrides of it.
    virtual NoiseSchedule parent_schedule() const = 0;

    // The condition standing in for "no conditioning" under guidance.
    virtual Condition null_condition() const { return Condition{}; }

    virtual Grid encode_image(const Grid& image) const;
    virtual Grid decode_latent(const Grid& latent) const;
};

// Exact posterior noise predictor under x0 ~ Gaussian(mu, var0 * I): a
// closed-form oracle that makes sampler trajectories analytically checkable.
Grid analytic_epsilon(const Grid& x_t, int t, const NoiseSchedule& s, const Grid& mu,
                      double var0);

class AnalyticGaussianDenoiser : public Denoiser {
public:
    AnalyticGaussianDenoiser(Grid mu, double var0, NoiseSchedule parent);

    std::array<int, 3> latent_dims() const override;
    CodecConfig codec() const override;
    Grid epsilon(const Grid& x, int label, const Condition& cond) const override;
    NoiseSchedule parent_schedule() const override { return parent_; }

    const Grid& mu() const { return mu_; }
    double var0() const { return var0_; }
    const NoiseSchedule& schedule() const { return parent_; }

private:
    Grid mu_;
    double var0_ = 1.0;
    NoiseSchedule parent_;
};

// Per-channel standardization of the latent space the model is trained in.
struct LatentStats {
    std::vector<double> mean, std;
};

// Trainable attention U-Net denoiser over space-to-depth latents.
class ToyDenoiser : public Denoiser {
public:
    explicit ToyDenoiser(const UNetConfig& cfg, int codec_factor = 2);

    std::array<int, 3> latent_dims() const override;
    CodecConfig codec() const override;
    Grid epsilon(const Grid& x, int label, const Condition& cond) const override;
    std::pair<Grid, Grid> epsilon_pair(const Grid& a, const Grid& b, int label,
                                       const Condition& ca, const Condition& cb,
                                       AttentionPlan plan,
                                       AttnRecorder<float>* rec = nullptr) const override;
    bool supports_attention_control() const override { return true; }
    NoiseSchedule parent_schedule() const override;
    Condition null_condition() const override { return Condition::for_token(null_token()); }

    Grid encode_image(const Grid& image) const override;    // encode + standardize
    Grid decode_latent(const Grid& latent) const override;

    // Mid-block feature map at timestep label 0, channel-normalized; the
    // backbone of the perceptual distance metric. Requires a trained model.
    Grid mid_features(const Grid& image) const;

    // Two-phase differentiable evaluation against an explicit condition
    // embedding: begin returns eps and keeps activations; end backpropagates
    // d<deps, eps> and returns the gradient w.r.t. the embedding vector.
    Grid epsilon_grad_begin(const Grid& x, int label, const std::vector<double>& embedding);
    std::vector<double> epsilon_grad_end(const Grid& deps);

    const UNetConfig& config() const { return cfg_; }
    bool is_trained() const { return trained_; }
    void mark_trained() { trained_ = true; }
    const LatentStats& stats() const { return stats_; }
    void set_stats(std::vector<double> mean, std::vector<double> std);
    int null_token() const { return cfg_.null_token(); }
    std::vector<double> null_embedding() const;    // table entry behind the null token

    ToyUNet<float>& net() { return net_; }
    const ToyUNet<float>& net() const { return net_; }

    void save(const std::string& path) const;
    static std::unique_ptr<ToyDenoiser> load(const std::string& path);

private:
    nn::Mat<float> tokens_for(const Condition& c) const;

    UNetConfig cfg_;
    CodecConfig codec_;
    ToyUNet<float> net_;
    LatentStats stats_;
    bool trained_ = false;
    nn::Store<float> grad_store_;
    std::vector<nn::Mat<float>> grad_x_;
    double grad_label_ = 0.0;
    std::vector<nn::Mat<float>> grad_toks_;
    bool grad_armed_ = false;
};

// Grid <-> Eigen float map conversion for the network boundary.
nn::Mat<float> grid_to_mat(const Grid& g);
Grid mat_to_grid(const nn::Mat<float>& m, int h, int w);

} // namespace stereodiff
