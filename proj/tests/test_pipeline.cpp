#include <doctest.h>

#include <cmath>
#include <string>

#include "core/denoiser.hpp"
#include "core/diffusion.hpp"
#include "core/disparity.hpp"
#include "core/pipeline.hpp"
#include "core/rng.hpp"
#include "core/schedule.hpp"
#include "core/stereo_ops.hpp"
#include "core/synthetic.hpp"

using namespace stereodiff;

namespace {

UNetConfig pipe_cfg(uint64_t seed = 3) {
    UNetConfig cfg;
    cfg.latent_channels = 12;
    cfg.latent_size = 16;
    cfg.widths = {16, 32};
    cfg.res_blocks = 1;
    cfg.heads = 2;
    cfg.vocab = 5;
    cfg.temb_dim = 32;
    cfg.cond_dim = 16;
    cfg.groups = 8;
    cfg.param_seed = seed;
    return cfg;
}

ToyDenoiser lively_denoiser(uint64_t seed) {
    ToyDenoiser den(pipe_cfg(seed));
    den.net().init(pipe_cfg(seed), /*zero_tails=*/false);
    return den;
}

SceneRecord scene32(uint64_t seed) {
    SyntheticWorldSpec spec;
    spec.image_size = 32;
    return generate_synthetic_scene(spec, seed);
}

Grid smooth_mu(int c, int n) {
    Grid mu(c, n, n);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                mu.at(ch, y, x) = 0.5 + 0.25 * std::sin(0.7 * x + 0.4 * y + ch);
    return mu;
}

DisparityField ramp_field(int n) {
    DisparityField D(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) D.at(y, x) = double(x) / double(n - 1);
    return D;
}

double parse_kv(const std::string& prov, const std::string& key) {
    const std::string needle = key + "=";
    const size_t pos = prov.find(needle);
    REQUIRE(pos != std::string::npos);
    return std::stod(prov.substr(pos + needle.size()));
}

double masked_mean_sq(const Grid& a, const Grid& b, const Mask& m) {
    double s = 0.0;
    size_t n = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (!m.at(y, x)) continue;
            for (int c = 0; c < a.channels; ++c) {
                const double d = a.at(c, y, x) - b.at(c, y, x);
                s += d * d;
                ++n;
            }
        }
    REQUIRE(n > 0);
    return s / double(n);
}

StereoRunConfig base_cfg() {
    StereoRunConfig cfg;
    cfg.mode = RunMode::d2si;
    cfg.steps = 8;
    cfg.s = 4.0;
    cfg.seed = 77;
    return cfg;
}

} // namespace

TEST_CASE("zero disparity collapses the pair to two identical images") {
    ToyDenoiser den = lively_denoiser(50);
    StereoInputs in;
    in.disparity = DisparityField(32, 32);    // all zeros, all valid
    for (AttentionPlan plan : {AttentionPlan::none, AttentionPlan::uni, AttentionPlan::bi}) {
        StereoRunConfig cfg = base_cfg();
        cfg.plan = plan;
        const StereoPair pair = generate_stereo(cfg, in, den);
        CHECK(max_abs_diff(pair.left, pair.right) == 0.0);
        CHECK(max_abs_diff(pair.left_latent, pair.right_latent) == 0.0);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    ToyDenoiser den = lively_denoiser(51);
    StereoInputs in;
    in.disparity = scene32(300).disparity;
    const StereoRunConfig cfg = base_cfg();
    const StereoPair a = generate_stereo(cfg, in, den);
    const StereoPair b = generate_stereo(cfg, in, den);
    CHECK(max_abs_diff(a.left, b.left) == 0.0);
    CHECK(max_abs_diff(a.right, b.right) == 0.0);

    StereoRunConfig other = cfg;
    other.seed = 78;
    const StereoPair c = generate_stereo(other, in, den);
    CHECK(max_abs_diff(a.right, c.right) > 0.0);
}

TEST_CASE("under uni attention the left image matches a standalone run bitwise") {
    ToyDenoiser den = lively_denoiser(52);
    StereoInputs in;
    in.disparity = scene32(301).disparity;
    StereoRunConfig cfg = base_cfg();
    cfg.plan = AttentionPlan::uni;

    const StereoPair pair = generate_stereo(cfg, in, den);

    const NoiseSchedule sub = substride(den.parent_schedule(), cfg.steps);
    Rng rng(cfg.seed);
    const auto d = den.latent_dims();
    Grid x = rng.normal_grid(d[0], d[1], d[2]);
    const Condition cond = den.null_condition();
    for (int t = cfg.steps; t >= 1; --t)
        x = ddim_step(x, den.epsilon(x, sub.label(t), cond), t, sub);

    CHECK(max_abs_diff(pair.left_latent, x) == 0.0);
    CHECK(max_abs_diff(pair.left, clamp01(den.decode_latent(x))) == 0.0);
}

TEST_CASE("per-step re-paste pins the moved region to the shifted left latent") {
    ToyDenoiser den = lively_denoiser(53);
    const SceneRecord scene = scene32(302);
    StereoInputs in;
    in.disparity = scene.disparity;
    StereoRunConfig cfg = base_cfg();
    cfg.plan = AttentionPlan::uni;
    cfg.spsmd = true;
    cfg.spsmd_interval = 1;

    const StereoPair pair = generate_stereo(cfg, in, den);
    const DisparityField D_lat =
        resample_to_latent(ensure_normalized(scene.disparity), den.codec());
    const ShiftResult shifted =
        stereo_pixel_shift(pair.left_latent, D_lat, ShiftConfig{cfg.s, cfg.sign, 0.0});
    CHECK(shifted.moved_mask.count() > 0);
    CHECK(masked_mean_sq(pair.right_latent, shifted.warped, shifted.moved_mask) == 0.0);
}

TEST_CASE("a larger shift scale opens strictly more holes") {
    ToyDenoiser den = lively_denoiser(54);
    StereoInputs in;
    in.disparity = scene32(303).disparity;
    StereoRunConfig cfg = base_cfg();
    cfg.s = 9.0;
    const double h9 = parse_kv(generate_stereo(cfg, in, den).provenance, "holes");
    cfg.s = 20.0;
    const double h20 = parse_kv(generate_stereo(cfg, in, den).provenance, "holes");
    CHECK(h20 > h9);
}

TEST_CASE("early shifts re-generate content, late shifts preserve the warp but keep scars") {
    const NoiseSchedule parent = make_schedule(ScheduleKind::linear_beta, 1000);
    const Grid mu = smooth_mu(3, 16);
    AnalyticGaussianDenoiser den(mu, 0.25, parent);

    StereoInputs in;
    in.disparity = ramp_field(16);
    StereoRunConfig cfg;
    cfg.mode = RunMode::d2si;
    cfg.steps = 50;
    cfg.s = 4.0;
    cfg.plan = AttentionPlan::none;
    cfg.spsmd = false;
    cfg.seed = 5;

    auto run_at = [&](double frac) {
        StereoRunConfig c = cfg;
        c.shift_step_fraction = frac;
        return generate_stereo(c, in, den);
    };
    const StereoPair early = run_at(0.05);
    const StereoPair late = run_at(0.8);

    const DisparityField D = ensure_normalized(in.disparity);
    const ShiftConfig sc{cfg.s, cfg.sign, 0.0};
    auto moved_dist = [&](const StereoPair& p) {
        const ShiftResult sr = stereo_pixel_shift(p.left_latent, D, sc);
        return masked_mean_sq(p.right_latent, sr.warped, sr.moved_mask);
    };
    auto hole_dist = [&](const StereoPair& p) {
        const ShiftResult sr = stereo_pixel_shift(p.left_latent, D, sc);
        return masked_mean_sq(p.right_latent, p.left_latent, sr.hole_mask);
    };
    CHECK(moved_dist(early) > moved_dist(late));
    CHECK(hole_dist(late) > hole_dist(early));
}

TEST_CASE("i2si reproduces and extends an input image deterministically") {
    ToyDenoiser den = lively_denoiser(55);
    const SceneRecord scene = scene32(304);
    StereoInputs in;
    in.disparity = scene.disparity;
    in.image = scene.left;
    StereoRunConfig cfg = base_cfg();
    cfg.mode = RunMode::i2si;
    cfg.steps = 6;

    const StereoPair a = generate_stereo(cfg, in, den);
    const StereoPair b = generate_stereo(cfg, in, den);
    CHECK(max_abs_diff(a.left, b.left) == 0.0);
    CHECK(max_abs_diff(a.right, b.right) == 0.0);
    CHECK(a.left.channels == 3);
    CHECK(a.left.height == 32);
    CHECK(a.right.width == 32);
    CHECK(all_finite(a.right));
    for (double v : a.right.v) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    SUBCASE("guided runs engage null-text optimization") {
        StereoRunConfig g = cfg;
        g.w = 3.0;
        g.steps = 3;
        g.null_text_iters = 2;
        const StereoPair p = generate_stereo(g, in, den);
        const StereoPair q = generate_stereo(g, in, den);
        CHECK(max_abs_diff(p.right, q.right) == 0.0);
        CHECK(parse_kv(p.provenance, "w") == 3.0);
    }
}

TEST_CASE("the dual-shift variant moves both streams and disables re-paste") {
    ToyDenoiser den = lively_denoiser(56);
    StereoInputs in;
    in.disparity = scene32(305).disparity;
    StereoRunConfig cfg = base_cfg();
    const StereoPair plain = generate_stereo(cfg, in, den);

    cfg.dual_shift = true;
    const StereoPair dual = generate_stereo(cfg, in, den);
    CHECK(dual.provenance.find("plan=bi\n") != std::string::npos);
    CHECK(dual.provenance.find("spsmd=0\n") != std::string::npos);
    CHECK(dual.provenance.find("dual_shift=1\n") != std::string::npos);
    CHECK(max_abs_diff(dual.left, plain.left) > 0.0);
}

TEST_CASE("hole deblurring changes only the right stream") {
    ToyDenoiser den = lively_denoiser(57);
    StereoInputs in;
    in.disparity = scene32(306).disparity;
    StereoRunConfig cfg = base_cfg();
    cfg.s = 6.0;
    cfg.plan = AttentionPlan::uni;
    cfg.spsmd = false;
    const StereoPair off = generate_stereo(cfg, in, den);
    cfg.deblur = true;
    const StereoPair on = generate_stereo(cfg, in, den);
    CHECK(max_abs_diff(on.left, off.left) == 0.0);
    CHECK(max_abs_diff(on.right, off.right) > 0.0);
}

TEST_CASE("generation validates its inputs") {
    ToyDenoiser den = lively_denoiser(58);
    const SceneRecord scene = scene32(307);

    StereoInputs no_disp;
    CHECK_THROWS_WITH_AS((void)generate_stereo(base_cfg(), no_disp, den),
                         doctest::Contains("requires a disparity field"), error);

    StereoInputs no_img;
    no_img.disparity = scene.disparity;
    StereoRunConfig i2si = base_cfg();
    i2si.mode = RunMode::i2si;
    CHECK_THROWS_WITH_AS((void)generate_stereo(i2si, no_img, den),
                         doctest::Contains("requires an input image"), error);

    StereoInputs bad_res;
    bad_res.disparity = DisparityField(13, 13);
    bad_res.disparity.at(0, 0) = 1.0;
    CHECK_THROWS_WITH_AS((void)generate_stereo(base_cfg(), bad_res, den),
                         doctest::Contains("matches neither"), error);

    StereoInputs in;
    in.disparity = scene.disparity;
    StereoRunConfig bad = base_cfg();
    bad.shift_step_fraction = 0.0;
    CHECK_THROWS_AS((void)generate_stereo(bad, in, den), error);
    bad.shift_step_fraction = 1.0;
    CHECK_THROWS_AS((void)generate_stereo(bad, in, den), error);
    bad.shift_step_fraction = 0.999;
    CHECK_THROWS_WITH_AS((void)generate_stereo(bad, in, den),
                         doctest::Contains("lands after the final"), error);

    StereoRunConfig bad_steps = base_cfg();
    bad_steps.steps = 0;
    CHECK_THROWS_AS((void)generate_stereo(bad_steps, in, den), error);
}

TEST_CASE("mode and plan names round-trip through their parsers") {
    for (const char* m : {"t2si", "d2si", "i2si"})
        CHECK(std::string(run_mode_name(parse_run_mode(m))) == m);
    for (const char* p : {"none", "uni", "bi"})
        CHECK(std::string(attention_plan_name(parse_attention_plan(p))) == p);
    CHECK_THROWS_AS((void)parse_run_mode("x2si"), error);
    CHECK_THROWS_AS((void)parse_attention_plan("dual"), error);
}

TEST_CASE("t2si runs from noise with a class condition") {
    ToyDenoiser den = lively_denoiser(59);
    StereoInputs in;
    in.disparity = scene32(308).disparity;
    StereoRunConfig cfg = base_cfg();
    cfg.mode = RunMode::t2si;
    cfg.condition_token = 2;
    const StereoPair p = generate_stereo(cfg, in, den);
    CHECK(p.provenance.find("mode=t2si\n") != std::string::npos);
    CHECK(p.provenance.find("condition=2\n") != std::string::npos);

    cfg.condition_token = 0;
    const StereoPair q = generate_stereo(cfg, in, den);
    CHECK(max_abs_diff(p.right, q.right) > 0.0);    // the condition reaches the output
}
