#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/denoiser.hpp"
#include "core/grid.hpp"
#include "core/synthetic.hpp"
#include "core/unet.hpp"

namespace stereodiff {

// Perceptual stand-in: mean squared distance between the denoiser's
// channel-normalized mid-layer feature maps of the two images.
double feature_pd(const Grid& a, const Grid& b, const ToyDenoiser& den);

struct BenchmarkConfig {
    std::vector<std::string> methods = {"ours", "leave_blank", "stretch"};
    std::vector<std::string> metrics = {"psnr", "ssim", "pd"};
    int steps = 50;
    int jobs = 1;
    int working_size = 0;        // 0 -> the denoiser's native image size
    uint64_t seed = 0;
    bool spsmd = true;
    int spsmd_interval = 1;
    AttentionPlan plan = AttentionPlan::uni;
};

struct BenchmarkRow {
    std::string scene, method, metric;
    double value = 0.0;
};

struct MethodMetricSummary {
    std::string method, metric;
    double mean = 0.0, best = 0.0, worst = 0.0;
    int count = 0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;            // ordered by scene id, method, metric
    std::vector<MethodMetricSummary> summary;
    std::vector<std::string> warnings;         // skipped scenes

    std::string csv() const;                   // scene,method,metric,value
    std::string table() const;                 // aligned console summary
};

// Known methods: ours, ours_no_spsmd, ours_no_attn, leave_blank, stretch,
// copy_gt. Each produces a right image judged against the ground truth.
// Malformed scenes are skipped with a warning; an all-skipped corpus is an
// error. Workers share the denoiser through its const inference paths only.
BenchmarkResult run_benchmark(const Corpus& corpus, ToyDenoiser& den,
                              const BenchmarkConfig& cfg);

} // namespace stereodiff
