#pragma once

#include "core/grid.hpp"
#include "core/schedule.hpp"

namespace stereodiff {

// Deterministic DDIM update (sigma_t = 0): move x_t to timestep t-1 given the
// predicted noise.
Grid ddim_step(const Grid& x_t, const Grid& eps, int t, const NoiseSchedule& s);

// sqrt(abar_t) x0 + sqrt(1-abar_t) eps
Grid forward_noise(const Grid& x0, const Grid& eps, int t, const NoiseSchedule& s);

// eps_uncond + w (eps_cond - eps_uncond)
Grid cfg_combine(const Grid& eps_uncond, const Grid& eps_cond, double w);

// Inverse DDIM move from timestep t to t+1 (t <= T-1). Algebraic inverse of
// ddim_step when the same eps is supplied to both.
Grid ddim_invert_step(const Grid& z_t, const Grid& eps, int t, const NoiseSchedule& s);

} // namespace stereodiff
