#include "core/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace stereodiff {

double NoiseSchedule::abar(int t) const {
    check(t >= 0 && t <= total_steps, "schedule: timestep " + std::to_string(t) + " out of range [0," +
                                          std::to_string(total_steps) + "]");
    return alpha_bar[t];
}

int NoiseSchedule::label(int t) const {
    check(t >= 0 && t <= total_steps, "schedule: timestep " + std::to_string(t) + " out of range");
    return labels[t];
}

void validate_schedule(const NoiseSchedule& s) {
    check(s.total_steps >= 1, "schedule: T < 1");
    check((int)s.alpha_bar.size() == s.total_steps + 1, "schedule: alpha_bar size");
    check(s.alpha_bar[0] == 1.0, "schedule: abar_0 != 1");
    for (int t = 1; t <= s.total_steps; ++t) {
        double ratio = s.alpha_bar[t] / s.alpha_bar[t - 1];
        check(s.alpha_bar[t] > 0.0 && s.alpha_bar[t] <= 1.0, "schedule: abar out of (0,1]");
        check(ratio > 0.0 && ratio < 1.0, "schedule: abar not strictly decreasing");
    }
}

static NoiseSchedule from_betas(ScheduleKind kind, const std::vector<double>& betas) {
    NoiseSchedule s;
    s.kind = kind;
    s.total_steps = (int)betas.size();
    s.parent_total_steps = s.total_steps;
    s.alpha_bar.resize(s.total_steps + 1);
    s.alpha_bar[0] = 1.0;
    double prod = 1.0;
    for (int t = 1; t <= s.total_steps; ++t) {
        prod *= 1.0 - betas[t - 1];
        s.alpha_bar[t] = prod;
    }
    s.labels.resize(s.total_steps + 1);
    s.timesteps.resize(s.total_steps);
    for (int t = 0; t <= s.total_steps; ++t) s.labels[t] = t;
    for (int i = 0; i < s.total_steps; ++i) s.timesteps[i] = s.total_steps - i;
    validate_schedule(s);
    return s;
}

NoiseSchedule make_schedule(ScheduleKind kind, int T) {
    check(T >= 1, "make_schedule: T < 1");
    std::vector<double> betas(T);
    if (kind == ScheduleKind::linear_beta) {
        const double beta_min = 1e-4, beta_max = 0.02;
        for (int t = 0; t < T; ++t) {
            double frac = (T == 1) ? 0.0 : double(t) / double(T - 1);
            betas[t] = beta_min + (beta_max - beta_min) * frac;
        }
    } else {
        // squared-cosine profile, offset 0.008; betas clipped at 0.999 so the
        // final abar stays strictly positive
        const double off = 0.008;
        auto f = [&](double t) {
            double a = std::cos((t / double(T) + off) / (1.0 + off) * std::numbers::pi / 2.0);
            return a * a;
        };
        double f0 = f(0.0);
        double prev = 1.0;
        for (int t = 1; t <= T; ++t) {
            double abar = f(double(t)) / f0;
            double beta = 1.0 - abar / prev;
            if (beta > 0.999) beta = 0.999;
            betas[t - 1] = beta;
            prev *= 1.0 - beta;
        }
    }
    return from_betas(kind, betas);
}

NoiseSchedule substride(const NoiseSchedule& parent, int n) {
    check(n >= 1, "substride: n < 1");
    check(n <= parent.total_steps, "substride: n exceeds parent steps");
    NoiseSchedule s;
    s.kind = parent.kind;
    s.total_steps = n;
    s.parent_total_steps = parent.parent_total_steps;
    s.alpha_bar.resize(n + 1);
    s.labels.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        int lbl = (int)std::lround(double(i) * double(parent.total_steps) / double(n));
        s.labels[i] = parent.labels[lbl];
        s.alpha_bar[i] = parent.alpha_bar[lbl];
    }
    s.timesteps.resize(n);
    for (int i = 0; i < n; ++i) s.timesteps[i] = n - i;
    validate_schedule(s);
    return s;
}

} // namespace stereodiff
