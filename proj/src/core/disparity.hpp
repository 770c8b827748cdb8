#pragma once

#include <cstdint>
#include <vector>

#include "core/codec.hpp"

namespace stereodiff {

enum class DisparitySpace { image, latent };

// Per-pixel horizontal disparity with validity flags. Invalid sites carry
// value 0 (they contribute zero shift downstream).
struct DisparityField {
    int height = 0;
    int width = 0;
    std::vector<double> values;
    std::vector<uint8_t> valid;
    DisparitySpace space = DisparitySpace::image;

    DisparityField() = default;
    DisparityField(int h, int w, DisparitySpace sp = DisparitySpace::image)
        : height(h), width(w), values(size_t(h) * w, 0.0), valid(size_t(h) * w, 1), space(sp) {}

    double& at(int y, int x) { return values[size_t(y) * width + x]; }
    double at(int y, int x) const { return values[size_t(y) * width + x]; }
    bool is_valid(int y, int x) const { return valid[size_t(y) * width + x] != 0; }
    void set_valid(int y, int x, bool b) { valid[size_t(y) * width + x] = b ? 1 : 0; }
};

// D = f*B / Z elementwise; sites with Z <= 0 or non-finite become invalid.
DisparityField depth_to_disparity(const std::vector<double>& Z, int height, int width, double focal,
                                  double baseline);

// Affine map of valid values so min -> 0, max -> 1; constant fields map to
// all-zeros.
DisparityField normalize(const DisparityField& D);

// Fields whose valid values already lie in [0,1] pass through verbatim;
// anything else (e.g. raw pixel disparities) gets normalized.
DisparityField ensure_normalized(const DisparityField& D);

// Gaussian blur with sigma = radius/2 over valid sites; invalid sites are
// excluded from the kernel sum and weights renormalized. radius 0 is identity.
DisparityField smooth(const DisparityField& D, int radius);

// Each latent site takes the mean of its f x f block's valid disparities;
// fully invalid blocks stay invalid.
DisparityField resample_to_latent(const DisparityField& D, const CodecConfig& codec);

} // namespace stereodiff
