#pragma once

#include <vector>

namespace stereodiff {

enum class ScheduleKind { linear_beta, cosine };

// Cumulative signal coefficients abar_0..abar_T plus the sampling ladder.
// A schedule may be a strided sub-schedule of a longer parent; `labels` maps
// each local index to the parent timestep (identity for native schedules) so
// a denoiser trained on the parent ladder sees the timestep ids it was
// trained with.
struct NoiseSchedule {
    int total_steps = 0;            // T
    std::vector<double> alpha_bar;  // size T+1, alpha_bar[0] == 1
    std::vector<int> timesteps;     // descending local ladder T..1
    std::vector<int> labels;        // size T+1, local index -> parent label
    int parent_total_steps = 0;
    ScheduleKind kind = ScheduleKind::linear_beta;

    double abar(int t) const;   // bounds-checked
    int label(int t) const;
};

NoiseSchedule make_schedule(ScheduleKind kind, int T);

// Evenly strided n-step sub-schedule of `parent` (1 <= n <= parent.total_steps).
NoiseSchedule substride(const NoiseSchedule& parent, int n);

void validate_schedule(const NoiseSchedule& s);

} // namespace stereodiff
