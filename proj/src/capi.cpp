#include "stereodiff.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core/benchmark.hpp"
#include "core/compose.hpp"
#include "core/denoiser.hpp"
#include "core/errors.hpp"
#include "core/image_io.hpp"
#include "core/inversion.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/schedule.hpp"
#include "core/synthetic.hpp"
#include "core/train.hpp"
#include "core/util.hpp"

using namespace stereodiff;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Desk-scale model: 3x32x32 images behind a factor-2 space-to-depth codec.
UNetConfig desk_config(uint64_t param_seed) {
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
    cfg.param_seed = param_seed;
    return cfg;
}

constexpr int kDeskImageSize = 32;
constexpr double kDeskCorpusScale = 6.0;

sdf_status invalid(const std::string& msg) {
    set_error(msg);
    return SDF_ERR_INVALID_ARGUMENT;
}

// Runs f, classifying any library exception with the given status.
template <class F>
sdf_status guarded(sdf_status on_error, F&& f) {
    try {
        f();
        g_last_error.clear();
        return SDF_OK;
    } catch (const std::filesystem::filesystem_error& e) {
        set_error(e.what());
        return SDF_ERR_IO;
    } catch (const std::exception& e) {
        set_error(e.what());
        return on_error;
    }
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

struct sdf_denoiser {
    std::unique_ptr<ToyDenoiser> model;
};

struct sdf_config {
    StereoRunConfig run;
    Layout layout = Layout::side_by_side;
};

extern "C" {

const char* sdf_version(void) { return "0.1.0"; }

const char* sdf_last_error(void) { return g_last_error.c_str(); }

sdf_status sdf_denoiser_load(const char* checkpoint_path, sdf_denoiser** out) {
    if (!checkpoint_path || !out) return invalid("checkpoint path and output handle are required");
    *out = nullptr;
    return guarded(SDF_ERR_IO, [&] {
        auto h = std::make_unique<sdf_denoiser>();
        h->model = ToyDenoiser::load(checkpoint_path);
        *out = h.release();
    });
}

sdf_status sdf_denoiser_fresh(uint64_t param_seed, sdf_denoiser** out) {
    if (!out) return invalid("output handle is required");
    *out = nullptr;
    return guarded(SDF_ERR_RUNTIME, [&] {
        auto h = std::make_unique<sdf_denoiser>();
        h->model = std::make_unique<ToyDenoiser>(desk_config(param_seed));
        *out = h.release();
    });
}

sdf_status sdf_denoiser_open_default(sdf_denoiser** out) {
    if (!out) return invalid("output handle is required");
    const char* env = std::getenv("STEREODIFF_CHECKPOINT");
    if (env && *env) return sdf_denoiser_load(env, out);
    return sdf_denoiser_fresh(1, out);
}

void sdf_denoiser_free(sdf_denoiser* d) { delete d; }

sdf_status sdf_config_new(sdf_config** out) {
    if (!out) return invalid("output handle is required");
    *out = new sdf_config();
    g_last_error.clear();
    return SDF_OK;
}

sdf_status sdf_config_set(sdf_config* c, const char* key, const char* value) {
    if (!c || !key || !value) return invalid("config handle, key and value are required");
    const std::string k = key, v = value;
    return guarded(SDF_ERR_INVALID_ARGUMENT, [&] {
        auto as_int = [&] { return std::stoi(v); };
        auto as_u64 = [&] { return uint64_t(std::stoull(v)); };
        auto as_double = [&] { return std::stod(v); };
        auto as_flag = [&] {
            if (v == "on" || v == "true" || v == "1") return true;
            if (v == "off" || v == "false" || v == "0") return false;
            fail("flag value must be on or off: " + v);
        };
        if (k == "mode") c->run.mode = parse_run_mode(v);
        else if (k == "steps") c->run.steps = as_int();
        else if (k == "shift_frac") c->run.shift_step_fraction = as_double();
        else if (k == "scale_s") c->run.s = as_double();
        else if (k == "sign") c->run.sign = as_int();
        else if (k == "attention") c->run.plan = parse_attention_plan(v);
        else if (k == "spsmd") c->run.spsmd = as_flag();
        else if (k == "spsmd_interval") c->run.spsmd_interval = as_int();
        else if (k == "deblur") c->run.deblur = as_flag();
        else if (k == "dual_shift") c->run.dual_shift = as_flag();
        else if (k == "seed") c->run.seed = as_u64();
        else if (k == "token") c->run.condition_token = as_int();
        else if (k == "w") c->run.w = as_double();
        else if (k == "null_text_iters") c->run.null_text_iters = as_int();
        else if (k == "null_text_lr") c->run.null_text_lr = as_double();
        else if (k == "layout") {
            if (v == "side_by_side") c->layout = Layout::side_by_side;
            else if (v == "anaglyph") c->layout = Layout::anaglyph;
            else fail("unknown layout: " + v);
        } else {
            fail("unknown config key: " + k);
        }
    });
}

void sdf_config_free(sdf_config* c) { delete c; }

sdf_status sdf_generate(sdf_denoiser* d, const sdf_config* c, const char* disparity_path,
                        const char* image_path, const char* out_prefix) {
    if (!d || !c || !out_prefix) return invalid("denoiser, config and output prefix are required");
    if (!disparity_path) return invalid("a disparity file is required for every mode");
    if (c->run.mode == RunMode::i2si && !image_path)
        return invalid("i2si requires a source image");

    StereoInputs inputs;
    const auto dims = d->model->latent_dims();
    const int working = dims[1] * d->model->codec().factor;
    sdf_status st = guarded(SDF_ERR_IO, [&] {
        inputs.disparity = fit_disparity_to_working(load_disparity(disparity_path), working);
        if (image_path) inputs.image = fit_to_working(load_image(image_path), working);
    });
    if (st != SDF_OK) return st;

    return guarded(SDF_ERR_RUNTIME, [&] {
        const StereoPair pair = generate_stereo(c->run, inputs, *d->model);
        const std::string prefix = out_prefix;
        ensure_parent_dir(prefix + "_left.png");
        save_image(pair.left, prefix + "_left.png");
        save_image(pair.right, prefix + "_right.png");
        const char* lname = c->layout == Layout::anaglyph ? "anaglyph" : "sbs";
        save_image(compose_output(pair.left, pair.right, c->layout),
                   prefix + "_" + lname + ".png");
        std::ofstream prov(prefix + "_provenance.txt");
        check(bool(prov), "cannot write provenance sidecar");
        prov << pair.provenance;
    });
}

sdf_status sdf_invert(sdf_denoiser* d, const char* image_path, double w, int iters, int steps,
                      int token, const char* out_prefix) {
    if (!d || !image_path || !out_prefix)
        return invalid("denoiser, image path and output prefix are required");
    if (steps < 1) return invalid("inversion needs at least one step");
    if (iters < 0) return invalid("iteration count must be non-negative");

    Grid image;
    const auto dims = d->model->latent_dims();
    const int working = dims[1] * d->model->codec().factor;
    sdf_status st = guarded(SDF_ERR_IO, [&] {
        image = fit_to_working(load_image(image_path), working);
    });
    if (st != SDF_OK) return st;

    return guarded(SDF_ERR_RUNTIME, [&] {
        const Condition cond =
            token >= 0 ? Condition::for_token(token) : d->model->null_condition();
        const NoiseSchedule sched = substride(d->model->parent_schedule(), steps);
        const Grid z0 = d->model->encode_image(image);
        const PivotTrajectory pivot = ddim_invert(z0, cond, *d->model, sched);

        NullTextState nulls;
        const bool optimize = w > 1.0 && iters > 0;
        if (optimize) nulls = null_text_optimize(pivot, *d->model, w, iters);
        const Grid recon_latent = ddim_sample(pivot.z.back(), cond, *d->model, sched, w,
                                              optimize ? &nulls : nullptr);
        const Grid recon = clamp01(d->model->decode_latent(recon_latent));

        const std::string prefix = out_prefix;
        ensure_parent_dir(prefix + "_recon.png");
        save_image(recon, prefix + "_recon.png");

        std::ofstream csv(prefix + "_losses.csv");
        check(bool(csv), "cannot write loss table");
        csv << "t,initial,final\n";
        if (optimize)
            for (int t = steps; t >= 1; --t)
                csv << t << ',' << nulls.initial_losses[size_t(t)] << ','
                    << nulls.final_losses[size_t(t)] << '\n';

        std::ofstream rep(prefix + "_report.txt");
        check(bool(rep), "cannot write report");
        rep << "steps=" << steps << "\nw=" << w << "\niters=" << (optimize ? iters : 0)
            << "\ntoken=" << token << "\nrecon_psnr=" << psnr(recon, image) << "\n";
    });
}

sdf_status sdf_warp(const char* image_path, const char* disparity_path, double scale_s,
                    const char* fill, const char* out_path) {
    if (!image_path || !disparity_path || !fill || !out_path)
        return invalid("image, disparity, fill mode and output path are required");
    FillMode mode;
    if (std::string(fill) == "leave_blank") mode = FillMode::leave_blank;
    else if (std::string(fill) == "stretch") mode = FillMode::stretch;
    else return invalid(std::string("unknown fill mode: ") + fill);

    Grid image;
    DisparityField disp;
    sdf_status st = guarded(SDF_ERR_IO, [&] {
        image = load_image(image_path);
        disp = load_disparity(disparity_path);
    });
    if (st != SDF_OK) return st;

    return guarded(SDF_ERR_RUNTIME, [&] {
        if (disp.height != image.height || disp.width != image.width)
            disp = resize_disparity_area(disp, image.height, image.width);
        const Grid warped = baseline_warp(image, disp, scale_s, mode);
        ensure_parent_dir(out_path);
        save_image(warped, out_path);
    });
}

sdf_status sdf_eval(sdf_denoiser* d, const char* corpus_dir, const char* methods,
                    const char* metrics, int steps, int jobs, uint64_t seed,
                    const char* csv_path, char** table_out) {
    if (!d || !corpus_dir) return invalid("denoiser and corpus directory are required");
    if (table_out) *table_out = nullptr;

    Corpus corpus;
    sdf_status st = guarded(SDF_ERR_IO, [&] { corpus = read_manifest(corpus_dir); });
    if (st != SDF_OK) return st;

    return guarded(SDF_ERR_RUNTIME, [&] {
        BenchmarkConfig cfg;
        if (methods && *methods) cfg.methods = split_csv(methods);
        if (metrics && *metrics) cfg.metrics = split_csv(metrics);
        cfg.steps = steps;
        cfg.jobs = jobs;
        cfg.seed = seed;
        const BenchmarkResult result = run_benchmark(corpus, *d->model, cfg);
        if (csv_path) {
            ensure_parent_dir(csv_path);
            std::ofstream out(csv_path);
            check(bool(out), "cannot write benchmark csv");
            out << result.csv();
        }
        if (table_out) {
            std::string text;
            for (const auto& wmsg : result.warnings) text += "warning: " + wmsg + "\n";
            text += result.table();
            char* buf = static_cast<char*>(std::malloc(text.size() + 1));
            check(buf != nullptr, "out of memory");
            std::memcpy(buf, text.c_str(), text.size() + 1);
            *table_out = buf;
        }
    });
}

sdf_status sdf_train_toy(const char* corpus_dir, int steps, uint64_t seed,
                         const char* out_checkpoint, double* final_loss) {
    if (!corpus_dir || !out_checkpoint)
        return invalid("corpus directory and checkpoint path are required");
    if (steps < 1) return invalid("training needs at least one step");

    Corpus corpus;
    std::vector<SceneRecord> scenes;
    sdf_status st = guarded(SDF_ERR_IO, [&] {
        corpus = read_manifest(corpus_dir);
        for (const auto& entry : corpus.entries)
            scenes.push_back(load_scene(corpus, entry, kDeskImageSize));
    });
    if (st != SDF_OK) return st;

    return guarded(SDF_ERR_RUNTIME, [&] {
        ToyDenoiser den(desk_config(seed));
        TrainConfig cfg;
        cfg.steps = steps;
        cfg.seed = seed;
        const TrainResult result = train_toy(den, scenes, cfg);
        ensure_parent_dir(out_checkpoint);
        den.save(out_checkpoint);
        if (final_loss) *final_loss = result.loss_curve.back();
    });
}

sdf_status sdf_make_corpus(const char* dir, int n, uint64_t seed, int image_size) {
    if (!dir) return invalid("output directory is required");
    if (n < 1) return invalid("corpus needs at least one scene");
    return guarded(SDF_ERR_RUNTIME, [&] {
        SyntheticWorldSpec spec;
        spec.image_size = image_size > 0 ? image_size : kDeskImageSize;
        spec.s_image = kDeskCorpusScale;
        std::filesystem::create_directories(dir);
        write_corpus(dir, n, seed, spec);
    });
}

void sdf_string_free(char* s) { std::free(s); }

} // extern "C"
