#include "core/inversion.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/diffusion.hpp"
#include "core/errors.hpp"

namespace stereodiff {

namespace {

Condition uncond_for(const Denoiser& den, const NullTextState* nulls, int t) {
    if (nulls && t >= 0 && size_t(t) < nulls->embeddings.size() &&
        !nulls->embeddings[size_t(t)].empty()) {
        Condition c = den.null_condition();
        c.override_embedding = nulls->embeddings[size_t(t)];
        return c;
    }
    return den.null_condition();
}

Grid guided_epsilon(const Grid& x, int label, const Condition& cond, const Denoiser& den,
                    double w, const NullTextState* nulls, int t) {
    Grid eps_c = den.epsilon(x, label, cond);
    if (w == 1.0 && nulls == nullptr) return eps_c;
    Grid eps_u = den.epsilon(x, label, uncond_for(den, nulls, t));
    return cfg_combine(eps_u, eps_c, w);
}

double mean_sq(const Grid& a, const Grid& b) {
    check_same_shape(a, b, "mean_sq");
    double s = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s / double(a.v.size());
}

} // namespace

PivotTrajectory ddim_invert(const Grid& z0, const Condition& cond, const Denoiser& den,
                            const NoiseSchedule& s, double w) {
    check_nonempty(z0, "ddim_invert");
    ensure_finite(z0, "ddim_invert input");
    PivotTrajectory traj;
    traj.schedule = s;
    traj.cond = cond;
    traj.w = w;
    traj.z.resize(size_t(s.total_steps) + 1);
    traj.z[0] = z0;
    for (int t = 0; t < s.total_steps; ++t) {
        const int label = s.label(t + 1);
        Grid eps = guided_epsilon(traj.z[size_t(t)], label, cond, den, w, nullptr, 0);
        traj.z[size_t(t) + 1] = ddim_invert_step(traj.z[size_t(t)], eps, t, s);
    }
    return traj;
}

NullTextState null_text_optimize(const PivotTrajectory& pivot, Denoiser& den, double w,
                                 int iters, double lr) {
    auto* toy = dynamic_cast<ToyDenoiser*>(&den);
    check(toy != nullptr,
          "null-text optimization requires a denoiser differentiable in the embedding");
    check(iters >= 0, "null-text iteration count must be non-negative");
    check(lr > 0.0, "null-text learning rate must be positive");
    const NoiseSchedule& s = pivot.schedule;
    const int T = s.total_steps;
    check(int(pivot.z.size()) == T + 1, "pivot trajectory length does not match its schedule");

    NullTextState st;
    st.embeddings.resize(size_t(T) + 1);
    st.initial_losses.assign(size_t(T) + 1, 0.0);
    st.final_losses.assign(size_t(T) + 1, 0.0);
    st.loss_history.resize(size_t(T) + 1);

    std::vector<double> emb = toy->null_embedding();
    Grid z = pivot.z[size_t(T)];
    const double numel = double(z.v.size());

    for (int t = T; t >= 1; --t) {
        const int label = s.label(t);
        const Grid& target = pivot.z[size_t(t) - 1];
        const Grid eps_c = den.epsilon(z, label, pivot.cond);
        const double ab_prev = s.abar(t - 1);
        const double ab = s.abar(t);
        const double a_t = std::sqrt(ab_prev / ab);
        const double b_t = std::sqrt(1.0 - ab_prev) - a_t * std::sqrt(1.0 - ab);

        auto loss_for = [&](const std::vector<double>& e) {
            Condition u = den.null_condition();
            u.override_embedding = e;
            try {
                Grid eps_u = den.epsilon(z, label, u);
                return mean_sq(ddim_step(z, cfg_combine(eps_u, eps_c, w), t, s), target);
            } catch (const error&) {    // a blown-up candidate counts as infinite loss
                return std::numeric_limits<double>::infinity();
            }
        };

        double cur = loss_for(emb);
        check(std::isfinite(cur),
              "null-text loss is non-finite at step " + std::to_string(t));
        st.initial_losses[size_t(t)] = cur;
        st.loss_history[size_t(t)].push_back(cur);

        double lr_t = lr;
        for (int it = 0; it < iters; ++it) {
            if (cur < kNullTextEarlyStop) break;
            Grid eps_u = toy->epsilon_grad_begin(z, label, emb);
            Grid out = ddim_step(z, cfg_combine(eps_u, eps_c, w), t, s);
            Grid deps = out;
            for (size_t i = 0; i < deps.v.size(); ++i)
                deps.v[i] = (1.0 - w) * b_t * 2.0 * (out.v[i] - target.v[i]) / numel;
            const std::vector<double> demb = toy->epsilon_grad_end(deps);

            bool accepted = false;
            double cand = 0.0;
            std::vector<double> cand_emb(emb.size());
            for (int h = 0; h <= 5; ++h) {
                for (size_t i = 0; i < emb.size(); ++i) cand_emb[i] = emb[i] - lr_t * demb[i];
                cand = loss_for(cand_emb);
                if (cand <= cur) {
                    emb = cand_emb;
                    cur = cand;
                    accepted = true;
                    break;
                }
                lr_t *= 0.5;
            }
            if (!accepted) {
                check(std::isfinite(cand) && cand <= 10.0 * st.initial_losses[size_t(t)],
                      "null-text optimization diverged at step " + std::to_string(t));
                break;
            }
            st.loss_history[size_t(t)].push_back(cur);
        }

        st.final_losses[size_t(t)] = cur;
        st.embeddings[size_t(t)] = emb;

        Condition u = den.null_condition();
        u.override_embedding = emb;
        Grid eps_u = den.epsilon(z, label, u);
        z = ddim_step(z, cfg_combine(eps_u, eps_c, w), t, s);
    }
    return st;
}

Grid ddim_sample(const Grid& z_top, const Condition& cond, const Denoiser& den,
                 const NoiseSchedule& s, double w, const NullTextState* nulls) {
    check_nonempty(z_top, "ddim_sample");
    Grid z = z_top;
    for (int t = s.total_steps; t >= 1; --t) {
        Grid eps = guided_epsilon(z, s.label(t), cond, den, w, nulls, t);
        z = ddim_step(z, eps, t, s);
    }
    return z;
}

} // namespace stereodiff
