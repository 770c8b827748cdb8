#pragma once

#include "core/grid.hpp"

namespace stereodiff {

// Lossless space-to-depth image<->latent mapping: each f x f pixel block
// becomes f*f*channels latent channels at one latent site, so latent site
// (y,x) corresponds exactly to image block (f*y..f*y+f-1, f*x..f*x+f-1).
struct CodecConfig {
    int factor = 2;
    int image_channels = 3;

    int latent_channels() const { return image_channels * factor * factor; }
};

Grid encode(const Grid& image, const CodecConfig& cfg);

// Inverse rearrangement. Clamping to [0,1] is a separate, explicit step at
// image emission (clamp01), never applied inside the sampling loop.
Grid decode(const Grid& latent, const CodecConfig& cfg);

Grid clamp01(const Grid& image);

} // namespace stereodiff
