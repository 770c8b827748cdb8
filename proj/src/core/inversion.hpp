#pragma once

#include <vector>

#include "core/denoiser.hpp"
#include "core/grid.hpp"
#include "core/schedule.hpp"

namespace stereodiff {

// Deterministic inversion trajectory: z[t] is the latent lifted t steps up
// the ladder, z[0] the encoded input. Carries everything needed to replay
// the run.
struct PivotTrajectory {
    std::vector<Grid> z;        // size total_steps + 1
    NoiseSchedule schedule;
    Condition cond;
    double w = 1.0;
};

// Runs the sampler update in reverse from a clean latent: for each t, the
// noise prediction (guided at scale w) is evaluated at the target rung's
// label and fed to the inverse update. w = 1 skips the unconditional pass.
PivotTrajectory ddim_invert(const Grid& z0, const Condition& cond, const Denoiser& den,
                            const NoiseSchedule& s, double w = 1.0);

// Per-timestep optimized stand-ins for the null condition embedding, plus
// the squared-distance-to-pivot losses before and after optimization.
// Index by local timestep t in 1..T; slot 0 is unused.
struct NullTextState {
    std::vector<std::vector<double>> embeddings;
    std::vector<double> initial_losses;
    std::vector<double> final_losses;
    std::vector<std::vector<double>> loss_history;   // accepted loss after each iteration
};

inline constexpr double kNullTextEarlyStop = 1e-5;

// Walks the ladder downward from the pivot endpoint, at each step descending
// the null embedding so the guided update lands on the pivot's next latent.
// The embedding warm-starts from the previous step's optimum; a candidate
// step that raises the loss is retried at half the rate (at most 5 halvings)
// and the subsequent step consumes the optimized latent, not the pivot one.
// Requires a denoiser differentiable in the embedding.
NullTextState null_text_optimize(const PivotTrajectory& pivot, Denoiser& den, double w,
                                 int iters = 10, double lr = 0.1);

// Plain guided sampling from a latent at the top of the ladder. When `nulls`
// is given, its per-step embeddings replace the null condition in the
// unconditional pass.
Grid ddim_sample(const Grid& z_top, const Condition& cond, const Denoiser& den,
                 const NoiseSchedule& s, double w = 1.0,
                 const NullTextState* nulls = nullptr);

} // namespace stereodiff
