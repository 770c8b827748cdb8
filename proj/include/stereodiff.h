#ifndef STEREODIFF_H
#define STEREODIFF_H

/* C interface to the stereo diffusion library. All heavy objects live behind
 * opaque handles; every call returns a status code and leaves a thread-local
 * message readable through sdf_last_error(). Inputs and outputs are files:
 * images as PNG/PNM/PFM, disparity as PFM or 16-bit PNG (raw/256, 0 =
 * invalid), checkpoints in the library's own container format. */

#include <stdint.h>

#if defined(_WIN32)
#define SDF_API __declspec(dllexport)
#else
#define SDF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdf_status {
    SDF_OK = 0,
    SDF_ERR_INVALID_ARGUMENT = 1,
    SDF_ERR_IO = 2,
    SDF_ERR_RUNTIME = 3
} sdf_status;

/* A denoising model (loaded checkpoint or fresh untrained weights). */
typedef struct sdf_denoiser sdf_denoiser;

/* A generation run configuration; keys mirror the CLI flags. */
typedef struct sdf_config sdf_config;

SDF_API const char* sdf_version(void);

/* Message from the last failing call on this thread; empty after success. */
SDF_API const char* sdf_last_error(void);

/* ---- model lifecycle ---------------------------------------------------- */

SDF_API sdf_status sdf_denoiser_load(const char* checkpoint_path, sdf_denoiser** out);

/* Untrained desk-scale model with deterministic parameters. */
SDF_API sdf_status sdf_denoiser_fresh(uint64_t param_seed, sdf_denoiser** out);

/* Checkpoint named by $STEREODIFF_CHECKPOINT, else fresh weights (seed 1). */
SDF_API sdf_status sdf_denoiser_open_default(sdf_denoiser** out);

SDF_API void sdf_denoiser_free(sdf_denoiser* d);

/* ---- run configuration --------------------------------------------------
 * Keys (all values are strings, parsed on set):
 *   mode            t2si | d2si | i2si          (default d2si)
 *   steps           sampling steps              (default 50)
 *   shift_frac      shift point as a fraction of steps from the noise end
 *                                               (default 0.2)
 *   scale_s         max latent-pixel shift      (default 3)
 *   sign            +1 | -1                     (default +1)
 *   attention       none | uni | bi             (default uni)
 *   spsmd           on | off                    (default on)
 *   spsmd_interval  re-paste cadence in steps   (default 1)
 *   deblur          on | off                    (default off)
 *   dual_shift      on | off                    (default off)
 *   seed            unsigned integer            (default 0)
 *   token           class token, -1 = none      (default -1)
 *   w               guidance scale              (default 1)
 *   null_text_iters i2si w>1 inner iterations   (default 10)
 *   null_text_lr    i2si w>1 learning rate      (default 0.1)
 *   layout          side_by_side | anaglyph     (default side_by_side)
 * Unknown keys and unparsable values are rejected. */

SDF_API sdf_status sdf_config_new(sdf_config** out);
SDF_API sdf_status sdf_config_set(sdf_config* c, const char* key, const char* value);
SDF_API void sdf_config_free(sdf_config* c);

/* ---- operations ---------------------------------------------------------
 * Path arguments marked nullable may be NULL. Output prefixes name a family
 * of files: <prefix>_left.png, <prefix>_right.png, <prefix>_<layout>.png and
 * <prefix>_provenance.txt for generation; <prefix>_recon.png,
 * <prefix>_losses.csv and <prefix>_report.txt for inversion. Parent
 * directories are created as needed. File images are fitted to the model's
 * working resolution. */

SDF_API sdf_status sdf_generate(sdf_denoiser* d, const sdf_config* c,
                                const char* disparity_path, /* required, all modes */
                                const char* image_path,     /* i2si source */
                                const char* out_prefix);

/* DDIM inversion of an image; with w > 1 and iters > 0 also per-step
 * null-embedding optimization, then reconstruction at scale w. token < 0
 * inverts under the model's null condition. */
SDF_API sdf_status sdf_invert(sdf_denoiser* d, const char* image_path, double w,
                              int iters, int steps, int token, const char* out_prefix);

/* Classic image-space warp baseline; fill is leave_blank or stretch. */
SDF_API sdf_status sdf_warp(const char* image_path, const char* disparity_path,
                            double scale_s, const char* fill, const char* out_path);

/* Benchmark a corpus directory (see sdf_make_corpus). methods / metrics are
 * comma-separated; csv_path (nullable) receives per-scene rows; table_out
 * (nullable) receives a malloc'd summary table released with
 * sdf_string_free. */
SDF_API sdf_status sdf_eval(sdf_denoiser* d, const char* corpus_dir, const char* methods,
                            const char* metrics, int steps, int jobs, uint64_t seed,
                            const char* csv_path, char** table_out);

/* Train the desk-scale model on a corpus and write a checkpoint;
 * final_loss (nullable) receives the last training loss. */
SDF_API sdf_status sdf_train_toy(const char* corpus_dir, int steps, uint64_t seed,
                                 const char* out_checkpoint, double* final_loss);

/* Render a synthetic stereo corpus with a manifest into dir.
 * image_size <= 0 selects the model working resolution default. */
SDF_API sdf_status sdf_make_corpus(const char* dir, int n, uint64_t seed, int image_size);

SDF_API void sdf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* STEREODIFF_H */
