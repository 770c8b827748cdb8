#pragma once

#include <cstdint>
#include <string>

#include "core/denoiser.hpp"
#include "core/disparity.hpp"
#include "core/grid.hpp"
#include "core/inversion.hpp"
#include "core/stereo_ops.hpp"
#include "core/unet.hpp"

namespace stereodiff {

enum class RunMode { t2si, d2si, i2si };

const char* run_mode_name(RunMode m);
const char* attention_plan_name(AttentionPlan p);
RunMode parse_run_mode(const std::string& s);
AttentionPlan parse_attention_plan(const std::string& s);

struct StereoRunConfig {
    RunMode mode = RunMode::d2si;
    int steps = 50;
    double shift_step_fraction = 0.2;   // of the way into denoising, from the noise end
    double s = 3.0;                     // max latent-pixel shift
    int sign = +1;
    bool spsmd = true;
    int spsmd_interval = 1;
    bool deblur = false;
    AttentionPlan plan = AttentionPlan::uni;
    bool dual_shift = false;            // shift both streams by ±s/2 (forces bi, disables spsmd)
    uint64_t seed = 0;
    int condition_token = -1;           // -1 -> the denoiser's null condition
    double w = 1.0;                     // guidance scale (i2si: also the inversion scale)
    int null_text_iters = 10;           // i2si with w > 1 only
    double null_text_lr = 0.1;
};

struct StereoInputs {
    DisparityField disparity;   // image- or latent-resolution; empty -> absent
    Grid image;                 // i2si source left image in [0,1]; empty -> absent
};

struct StereoPair {
    Grid left;
    Grid right;
    Grid left_latent;           // final latents before decoding
    Grid right_latent;
    std::string provenance;     // key=value lines: config hash, seed, timings
};

// The full generation loop: seed noise or inversion endpoint, left-only
// denoising down to the shift step, latent duplicate + disparity shift,
// paired denoising with attention rewiring and periodic re-paste of the
// shifted left stream, then decode. Deterministic given the seed. With
// w > 1 in i2si mode the denoiser's transient gradient state is used, so
// such runs must not share a denoiser concurrently.
StereoPair generate_stereo(const StereoRunConfig& cfg, const StereoInputs& inputs,
                           Denoiser& den);

} // namespace stereodiff
