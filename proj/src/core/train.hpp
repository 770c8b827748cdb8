#pragma once

#include <cstdint>
#include <vector>

#include "core/denoiser.hpp"
#include "core/synthetic.hpp"

namespace stereodiff {

struct TrainConfig {
    int steps = 2000;
    int batch = 4;
    double lr = 1e-3;
    double momentum = 0.9;
    double null_drop = 0.1;    // chance of swapping the class token for the null token
    uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> loss_curve;    // mean squared noise error per step
};

// Noise-prediction training on standardized scene latents (both views of
// every scene are independent samples). Computes and installs the latent
// standardization stats, then runs SGD with momentum. Deterministic in seed.
TrainResult train_toy(ToyDenoiser& den, const std::vector<SceneRecord>& scenes,
                      const TrainConfig& cfg);

} // namespace stereodiff
