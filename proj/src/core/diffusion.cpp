#include "core/diffusion.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace stereodiff {

// x at signal level abar_from -> abar_to along the deterministic trajectory
// defined by a fixed noise estimate:
//   out = sqrt(abar_to) * (x - sqrt(1-abar_from) eps) / sqrt(abar_from)
//       + sqrt(1-abar_to) eps
static Grid move_signal_level(const Grid& x, const Grid& eps, double abar_from, double abar_to,
                              const std::string& ctx) {
    check_same_shape(x, eps, ctx);
    check(abar_from > 0.0, ctx + ": abar is 0 at the source timestep");
    const double a = std::sqrt(abar_to / abar_from);
    const double b = std::sqrt(1.0 - abar_to) - a * std::sqrt(1.0 - abar_from);
    Grid out = x;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a * x.v[i] + b * eps.v[i];
    ensure_finite(out, ctx);
    return out;
}

Grid ddim_step(const Grid& x_t, const Grid& eps, int t, const NoiseSchedule& s) {
    check(t >= 1 && t <= s.total_steps, "ddim_step: t out of range");
    return move_signal_level(x_t, eps, s.abar(t), s.abar(t - 1), "ddim_step");
}

Grid forward_noise(const Grid& x0, const Grid& eps, int t, const NoiseSchedule& s) {
    check_same_shape(x0, eps, "forward_noise");
    check(t >= 0 && t <= s.total_steps, "forward_noise: t out of range");
    const double sa = std::sqrt(s.abar(t));
    const double sb = std::sqrt(1.0 - s.abar(t));
    Grid out = x0;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = sa * x0.v[i] + sb * eps.v[i];
    ensure_finite(out, "forward_noise");
    return out;
}

Grid cfg_combine(const Grid& eps_uncond, const Grid& eps_cond, double w) {
    check_same_shape(eps_uncond, eps_cond, "cfg_combine");
    Grid out = eps_uncond;
    for (size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = eps_uncond.v[i] + w * (eps_cond.v[i] - eps_uncond.v[i]);
    ensure_finite(out, "cfg_combine");
    return out;
}

Grid ddim_invert_step(const Grid& z_t, const Grid& eps, int t, const NoiseSchedule& s) {
    check(t >= 0 && t <= s.total_steps - 1, "ddim_invert_step: t out of range");
    return move_signal_level(z_t, eps, s.abar(t), s.abar(t + 1), "ddim_invert_step");
}

} // namespace stereodiff
