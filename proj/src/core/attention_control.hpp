#pragma once

#include <utility>

#include "core/denoiser.hpp"
#include "core/grid.hpp"
#include "core/nn.hpp"
#include "core/unet.hpp"

namespace stereodiff {

// Scaled dot-product attention with rows as tokens: softmax(Q K^T / sqrt(d)) V.
// Q is nq x d, K and V are nk x d; the result is nq x d.
nn::Mat<double> attention(const nn::Mat<double>& Q, const nn::Mat<double>& K,
                          const nn::Mat<double>& V);

// One joint noise prediction for a stereo pair. Plans other than `none`
// rewire self-attention between the two streams: `uni` makes the right
// stream read the left stream's keys/values (the left stream is untouched),
// `bi` lets each stream attend over the concatenation of both. The denoiser
// must expose attention interception for those plans.
std::pair<Grid, Grid> paired_denoise(const Grid& left, const Grid& right, int label,
                                     const Condition& cond_left, const Condition& cond_right,
                                     AttentionPlan plan, const Denoiser& den,
                                     AttnRecorder<float>* rec = nullptr);

} // namespace stereodiff
