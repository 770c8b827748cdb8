#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "stereodiff.h"

namespace {

// 0 = success, 1 = usage error, 2 = runtime failure
int status_to_exit(sdf_status st) {
    if (st == SDF_OK) return 0;
    std::fprintf(stderr, "error: %s\n", sdf_last_error());
    return st == SDF_ERR_INVALID_ARGUMENT ? 1 : 2;
}

struct DenoiserHandle {
    sdf_denoiser* d = nullptr;
    ~DenoiserHandle() { sdf_denoiser_free(d); }
};

struct ConfigHandle {
    sdf_config* c = nullptr;
    ~ConfigHandle() { sdf_config_free(c); }
};

int open_model(const std::string& checkpoint, DenoiserHandle& h) {
    const sdf_status st = checkpoint.empty() ? sdf_denoiser_open_default(&h.d)
                                             : sdf_denoiser_load(checkpoint.c_str(), &h.d);
    return status_to_exit(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disparity-guided stereo pair generation with a diffusion sampler"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a stereo pair");
    std::string g_mode = "d2si", g_attention = "uni", g_layout = "side_by_side";
    std::string g_out = "out/stereo", g_checkpoint, g_disparity, g_image;
    int g_steps = 50, g_sign = 1, g_interval = 1, g_token = -1, g_nt_iters = 10;
    double g_frac = 0.2, g_s = 3.0, g_w = 1.0, g_nt_lr = 0.1;
    bool g_spsmd = true, g_deblur = false, g_dual = false;
    uint64_t g_seed = 0;
    gen->add_option("--mode", g_mode, "t2si | d2si | i2si")->capture_default_str();
    gen->add_option("--steps", g_steps, "sampling steps")->capture_default_str();
    gen->add_option("--shift-frac", g_frac, "shift point as fraction of steps")
        ->capture_default_str();
    gen->add_option("--scale-s", g_s, "max latent-pixel shift")->capture_default_str();
    gen->add_option("--sign", g_sign, "shift direction, +1 or -1")->capture_default_str();
    gen->add_option("--attention", g_attention, "none | uni | bi")->capture_default_str();
    gen->add_flag("--spsmd,!--no-spsmd", g_spsmd, "re-paste the shifted left stream (default on)");
    gen->add_option("--spsmd-interval", g_interval, "re-paste cadence")->capture_default_str();
    gen->add_flag("--deblur", g_deblur, "fill shift holes with noise (default off)");
    gen->add_flag("--dual-shift", g_dual, "shift both views by half the scale");
    gen->add_option("--seed", g_seed, "run seed")->capture_default_str();
    gen->add_option("--token", g_token, "class token, -1 = none")->capture_default_str();
    gen->add_option("--w", g_w, "guidance scale")->capture_default_str();
    gen->add_option("--null-text-iters", g_nt_iters, "i2si w>1 inner iterations")
        ->capture_default_str();
    gen->add_option("--null-text-lr", g_nt_lr, "i2si w>1 learning rate")->capture_default_str();
    gen->add_option("--layout", g_layout, "side_by_side | anaglyph")->capture_default_str();
    gen->add_option("--out", g_out, "output prefix")->capture_default_str();
    gen->add_option("--checkpoint", g_checkpoint, "model checkpoint (default $STEREODIFF_CHECKPOINT)");
    gen->add_option("--disparity", g_disparity, "disparity file (PFM or 16-bit PNG)")->required();
    gen->add_option("--image", g_image, "source image (i2si)");

    // invert
    auto* inv = app.add_subcommand("invert", "DDIM-invert an image and reconstruct it");
    std::string i_image, i_out = "out/invert", i_checkpoint;
    double i_w = 1.0;
    int i_iters = 10, i_steps = 50, i_token = -1;
    inv->add_option("--image", i_image, "input image")->required();
    inv->add_option("--w", i_w, "guidance scale for reconstruction")->capture_default_str();
    inv->add_option("--iters", i_iters, "null-embedding iterations per step")
        ->capture_default_str();
    inv->add_option("--steps", i_steps, "inversion steps")->capture_default_str();
    inv->add_option("--token", i_token, "class token, -1 = none")->capture_default_str();
    inv->add_option("--out", i_out, "output prefix")->capture_default_str();
    inv->add_option("--checkpoint", i_checkpoint, "model checkpoint");

    // warp
    auto* warp = app.add_subcommand("warp", "Classic image-space warp baseline");
    std::string w_image, w_disparity, w_fill = "leave_blank", w_out = "out/warped.png";
    double w_s = 6.0;
    warp->add_option("--image", w_image, "input image")->required();
    warp->add_option("--disparity", w_disparity, "disparity file")->required();
    warp->add_option("--scale-s", w_s, "max pixel shift")->capture_default_str();
    warp->add_option("--fill", w_fill, "leave_blank | stretch")->capture_default_str();
    warp->add_option("--out", w_out, "output image")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Benchmark methods over a corpus");
    std::string e_corpus, e_methods = "ours,leave_blank,stretch", e_metrics = "psnr,ssim,pd";
    std::string e_csv, e_checkpoint;
    int e_steps = 50, e_jobs = 1;
    uint64_t e_seed = 0;
    eval->add_option("--corpus", e_corpus, "corpus directory or manifest")->required();
    eval->add_option("--methods", e_methods, "comma-separated method list")
        ->capture_default_str();
    eval->add_option("--metrics", e_metrics, "comma-separated metric list")
        ->capture_default_str();
    eval->add_option("--steps", e_steps, "sampling steps per run")->capture_default_str();
    eval->add_option("--jobs", e_jobs, "worker threads")->capture_default_str();
    eval->add_option("--seed", e_seed, "benchmark seed")->capture_default_str();
    eval->add_option("--csv", e_csv, "write per-scene rows to this file");
    eval->add_option("--checkpoint", e_checkpoint, "model checkpoint");

    // train-toy
    auto* train = app.add_subcommand("train-toy", "Train the desk-scale model on a corpus");
    std::string t_scenes, t_out = "out/toy.ckpt";
    int t_steps = 2000;
    uint64_t t_seed = 0;
    train->add_option("--scenes", t_scenes, "corpus directory or manifest")->required();
    train->add_option("--steps", t_steps, "SGD steps")->capture_default_str();
    train->add_option("--seed", t_seed, "parameter and shuffle seed")->capture_default_str();
    train->add_option("--out", t_out, "checkpoint path")->capture_default_str();

    // make-corpus
    auto* mk = app.add_subcommand("make-corpus", "Render a synthetic stereo corpus");
    std::string m_dir;
    int m_n = 20, m_size = 0;
    uint64_t m_seed = 0;
    mk->add_option("--n", m_n, "number of scenes")->capture_default_str();
    mk->add_option("--seed", m_seed, "world seed")->capture_default_str();
    mk->add_option("--dir", m_dir, "output directory")->required();
    mk->add_option("--size", m_size, "image size, 0 = model working size")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (gen->parsed()) {
        DenoiserHandle den;
        if (int rc = open_model(g_checkpoint, den)) return rc;
        ConfigHandle cfg;
        if (int rc = status_to_exit(sdf_config_new(&cfg.c))) return rc;
        const std::pair<const char*, std::string> kv[] = {
            {"mode", g_mode},
            {"steps", std::to_string(g_steps)},
            {"shift_frac", std::to_string(g_frac)},
            {"scale_s", std::to_string(g_s)},
            {"sign", std::to_string(g_sign)},
            {"attention", g_attention},
            {"spsmd", g_spsmd ? "on" : "off"},
            {"spsmd_interval", std::to_string(g_interval)},
            {"deblur", g_deblur ? "on" : "off"},
            {"dual_shift", g_dual ? "on" : "off"},
            {"seed", std::to_string(g_seed)},
            {"token", std::to_string(g_token)},
            {"w", std::to_string(g_w)},
            {"null_text_iters", std::to_string(g_nt_iters)},
            {"null_text_lr", std::to_string(g_nt_lr)},
            {"layout", g_layout},
        };
        for (const auto& [k, v] : kv)
            if (int rc = status_to_exit(sdf_config_set(cfg.c, k, v.c_str()))) return rc;
        const int rc = status_to_exit(
            sdf_generate(den.d, cfg.c, g_disparity.c_str(),
                         g_image.empty() ? nullptr : g_image.c_str(), g_out.c_str()));
        if (rc == 0)
            std::printf("wrote %s_{left,right,%s}.png and %s_provenance.txt\n", g_out.c_str(),
                        g_layout == "anaglyph" ? "anaglyph" : "sbs", g_out.c_str());
        return rc;
    }

    if (inv->parsed()) {
        DenoiserHandle den;
        if (int rc = open_model(i_checkpoint, den)) return rc;
        const int rc = status_to_exit(
            sdf_invert(den.d, i_image.c_str(), i_w, i_iters, i_steps, i_token, i_out.c_str()));
        if (rc == 0)
            std::printf("wrote %s_recon.png, %s_losses.csv and %s_report.txt\n", i_out.c_str(),
                        i_out.c_str(), i_out.c_str());
        return rc;
    }

    if (warp->parsed()) {
        const int rc = status_to_exit(
            sdf_warp(w_image.c_str(), w_disparity.c_str(), w_s, w_fill.c_str(), w_out.c_str()));
        if (rc == 0) std::printf("wrote %s\n", w_out.c_str());
        return rc;
    }

    if (eval->parsed()) {
        DenoiserHandle den;
        if (int rc = open_model(e_checkpoint, den)) return rc;
        char* table = nullptr;
        const int rc = status_to_exit(sdf_eval(den.d, e_corpus.c_str(), e_methods.c_str(),
                                               e_metrics.c_str(), e_steps, e_jobs, e_seed,
                                               e_csv.empty() ? nullptr : e_csv.c_str(), &table));
        if (table) {
            std::fputs(table, stdout);
            sdf_string_free(table);
        }
        return rc;
    }

    if (train->parsed()) {
        double final_loss = 0.0;
        const int rc = status_to_exit(
            sdf_train_toy(t_scenes.c_str(), t_steps, t_seed, t_out.c_str(), &final_loss));
        if (rc == 0) std::printf("wrote %s (final loss %.6f)\n", t_out.c_str(), final_loss);
        return rc;
    }

    if (mk->parsed()) {
        const int rc = status_to_exit(sdf_make_corpus(m_dir.c_str(), m_n, m_seed, m_size));
        if (rc == 0) std::printf("wrote %d scenes under %s\n", m_n, m_dir.c_str());
        return rc;
    }

    return 1;
}
