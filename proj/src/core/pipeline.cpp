#include "core/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <utility>

#include "core/attention_control.hpp"
#include "core/codec.hpp"
#include "core/diffusion.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace stereodiff {

const char* run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::t2si: return "t2si";
        case RunMode::d2si: return "d2si";
        case RunMode::i2si: return "i2si";
    }
    return "?";
}

const char* attention_plan_name(AttentionPlan p) {
    switch (p) {
        case AttentionPlan::none: return "none";
        case AttentionPlan::uni: return "uni";
        case AttentionPlan::bi: return "bi";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& s) {
    if (s == "t2si") return RunMode::t2si;
    if (s == "d2si") return RunMode::d2si;
    if (s == "i2si") return RunMode::i2si;
    fail("unknown mode '" + s + "' (expected t2si, d2si or i2si)");
}

AttentionPlan parse_attention_plan(const std::string& s) {
    if (s == "none") return AttentionPlan::none;
    if (s == "uni") return AttentionPlan::uni;
    if (s == "bi") return AttentionPlan::bi;
    fail("unknown attention plan '" + s + "' (expected none, uni or bi)");
}

namespace {

Condition uncond_at(const Denoiser& den, const NullTextState* nulls, int t) {
    Condition c = den.null_condition();
    if (nulls && t >= 0 && size_t(t) < nulls->embeddings.size() &&
        !nulls->embeddings[size_t(t)].empty())
        c.override_embedding = nulls->embeddings[size_t(t)];
    return c;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

StereoPair generate_stereo(const StereoRunConfig& cfg, const StereoInputs& inputs,
                           Denoiser& den) {
    const auto t_start = std::chrono::steady_clock::now();

    check(cfg.steps >= 1, "sampling needs at least one step");
    check(cfg.shift_step_fraction > 0.0 && cfg.shift_step_fraction < 1.0,
          "shift_step_fraction must lie strictly between 0 and 1");
    check(cfg.s >= 0.0, "shift scale must be non-negative");
    check(cfg.sign == 1 || cfg.sign == -1, "shift sign must be +1 or -1");
    check(cfg.spsmd_interval >= 1, "spsmd interval must be at least 1");
    check(!inputs.disparity.values.empty(),
          std::string(run_mode_name(cfg.mode)) + " requires a disparity field");
    if (cfg.mode == RunMode::i2si)
        check(!inputs.image.v.empty(), "i2si requires an input image");

    const auto dims = den.latent_dims();
    const CodecConfig cd = den.codec();
    const int lh = dims[1], lw = dims[2];

    DisparityField D = ensure_normalized(inputs.disparity);
    if (D.height == lh && D.width == lw) {
        D.space = DisparitySpace::latent;
    } else if (D.height == lh * cd.factor && D.width == lw * cd.factor) {
        D = resample_to_latent(D, cd);
    } else {
        fail("disparity resolution matches neither the latent grid nor the image grid");
    }

    const NoiseSchedule sub = substride(den.parent_schedule(), cfg.steps);
    const int shift_in = int(std::lround(cfg.shift_step_fraction * cfg.steps));
    const int t_shift = cfg.steps - shift_in;
    check(t_shift >= 1, "shift step lands after the final denoising step; lower the fraction");

    const Condition cond = cfg.condition_token < 0 ? den.null_condition()
                                                   : Condition::for_token(cfg.condition_token);
    const bool dual = cfg.dual_shift;
    const AttentionPlan plan = dual ? AttentionPlan::bi : cfg.plan;
    const bool spsmd_on = cfg.spsmd && !dual;

    Grid x;
    NullTextState nulls;
    bool have_nulls = false;
    if (cfg.mode == RunMode::i2si) {
        check(inputs.image.height == lh * cd.factor && inputs.image.width == lw * cd.factor &&
                  inputs.image.channels == cd.image_channels,
              "input image resolution is incompatible with the denoiser");
        const Grid z0 = den.encode_image(inputs.image);
        PivotTrajectory pivot = ddim_invert(z0, cond, den, sub);    // pivot at w = 1
        if (cfg.w > 1.0) {
            nulls = null_text_optimize(pivot, den, cfg.w, cfg.null_text_iters, cfg.null_text_lr);
            have_nulls = true;
        }
        x = std::move(pivot.z.back());
    } else {
        Rng rng(cfg.seed);
        x = rng.normal_grid(dims[0], lh, lw);
    }
    const NullTextState* np = have_nulls ? &nulls : nullptr;
    const bool guided = cfg.w != 1.0 || have_nulls;

    auto eps_single = [&](const Grid& z, int t) {
        const int label = sub.label(t);
        Grid ec = den.epsilon(z, label, cond);
        if (!guided) return ec;
        Grid eu = den.epsilon(z, label, uncond_at(den, np, t));
        return cfg_combine(eu, ec, cfg.w);
    };
    auto eps_pair = [&](const Grid& zl, const Grid& zr, int t) {
        const int label = sub.label(t);
        auto [ecl, ecr] = paired_denoise(zl, zr, label, cond, cond, plan, den);
        if (!guided) return std::make_pair(std::move(ecl), std::move(ecr));
        const Condition u = uncond_at(den, np, t);
        auto [eul, eur] = paired_denoise(zl, zr, label, u, u, plan, den);
        return std::make_pair(cfg_combine(eul, ecl, cfg.w), cfg_combine(eur, ecr, cfg.w));
    };

    for (int t = cfg.steps; t > t_shift; --t) x = ddim_step(x, eps_single(x, t), t, sub);

    const ShiftConfig shift_cfg{cfg.s, cfg.sign, 0.0};
    Grid x_left, x_right;
    ShiftResult shifted;
    size_t holes = 0, moved = 0;
    bool width_warning = false;
    if (dual) {
        const ShiftConfig half_r{cfg.s / 2.0, cfg.sign, 0.0};
        const ShiftConfig half_l{cfg.s / 2.0, -cfg.sign, 0.0};
        ShiftResult sr = stereo_pixel_shift(x, D, half_r);
        ShiftResult sl = stereo_pixel_shift(x, D, half_l);
        x_right = std::move(sr.warped);
        x_left = std::move(sl.warped);
        holes = sr.hole_mask.count() + sl.hole_mask.count();
        moved = sr.moved_mask.count() + sl.moved_mask.count();
        width_warning = sr.width_warning || sl.width_warning;
        if (cfg.deblur) {
            x_right = deblur_fill(x_right, sr.hole_mask, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
            x_left = deblur_fill(x_left, sl.hole_mask, cfg.seed ^ 0x9e3779b97f4a7c16ULL);
        }
    } else {
        shifted = stereo_pixel_shift(x, D, shift_cfg);
        x_left = std::move(x);
        x_right = std::move(shifted.warped);
        holes = shifted.hole_mask.count();
        moved = shifted.moved_mask.count();
        width_warning = shifted.width_warning;
        if (cfg.deblur)
            x_right = deblur_fill(x_right, shifted.hole_mask, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    }

    for (int t = t_shift; t >= 1; --t) {
        auto [el, er] = eps_pair(x_left, x_right, t);
        x_left = ddim_step(x_left, el, t, sub);
        x_right = ddim_step(x_right, er, t, sub);
        if (spsmd_on && (t_shift - (t - 1)) % cfg.spsmd_interval == 0)
            x_right = spsmd_paste(x_right, x_left, D, shift_cfg, shifted.moved_mask);
    }

    StereoPair out;
    out.left = clamp01(den.decode_latent(x_left));
    out.right = clamp01(den.decode_latent(x_right));
    out.left_latent = std::move(x_left);
    out.right_latent = std::move(x_right);

    const auto t_end = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();

    std::string body;
    body += std::string("mode=") + run_mode_name(cfg.mode) + "\n";
    body += "steps=" + std::to_string(cfg.steps) + "\n";
    body += "shift_step_fraction=" + fmt_double(cfg.shift_step_fraction) + "\n";
    body += "shift_index=" + std::to_string(cfg.steps - t_shift) + "\n";
    body += "shift_step=" + std::to_string(t_shift) + "\n";
    body += "s=" + fmt_double(cfg.s) + "\n";
    body += "sign=" + std::to_string(cfg.sign) + "\n";
    body += "spsmd=" + std::to_string(spsmd_on ? 1 : 0) + "\n";
    body += "spsmd_interval=" + std::to_string(cfg.spsmd_interval) + "\n";
    body += "deblur=" + std::to_string(cfg.deblur ? 1 : 0) + "\n";
    body += std::string("plan=") + attention_plan_name(plan) + "\n";
    body += "dual_shift=" + std::to_string(dual ? 1 : 0) + "\n";
    body += "seed=" + std::to_string(cfg.seed) + "\n";
    body += "condition=" + std::to_string(cfg.condition_token) + "\n";
    body += "w=" + fmt_double(cfg.w) + "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)fnv1a(body));
    out.provenance = "config_hash=" + std::string(hash) + "\n" + body;
    out.provenance += "holes=" + std::to_string(holes) + "\n";
    out.provenance += "moved=" + std::to_string(moved) + "\n";
    out.provenance += "width_warning=" + std::to_string(width_warning ? 1 : 0) + "\n";
    out.provenance += "duration_ms=" + fmt_double(ms) + "\n";
    return out;
}

} // namespace stereodiff
