#pragma once

#include <cstdint>
#include <vector>

namespace stereodiff {

// PFM: "Pf" (1 channel) / "PF" (3 channels), dimensions, scale line whose sign
// encodes endianness, then raw 32-bit float rows stored bottom-to-top.
// Parsed data is returned top-to-bottom, channel-interleaved per pixel, with
// |scale| applied as a value multiplier.
struct PfmImage {
    int channels = 1;
    int height = 0;
    int width = 0;
    std::vector<float> data;  // top-to-bottom rows, interleaved channels

    float at(int y, int x, int c = 0) const {
        return data[(size_t(y) * width + x) * channels + c];
    }
    float& at(int y, int x, int c = 0) {
        return data[(size_t(y) * width + x) * channels + c];
    }
};

PfmImage parse_pfm(const std::vector<uint8_t>& bytes);

// Emits scale -1 (little-endian) with the values written verbatim.
std::vector<uint8_t> write_pfm(const PfmImage& img);

} // namespace stereodiff
