#pragma once

#include <cstdint>
#include <vector>

namespace stereodiff {

// Minimal PNG support: grayscale or RGB, 8 or 16 bit, non-interlaced.
// Samples are returned/accepted row-major, channel-interleaved; 8-bit files
// carry values 0..255, 16-bit files 0..65535.
struct PngImage {
    int width = 0;
    int height = 0;
    int channels = 1;   // 1 (gray) or 3 (rgb)
    int bit_depth = 8;  // 8 or 16
    std::vector<uint16_t> data;

    uint16_t at(int y, int x, int c = 0) const {
        return data[(size_t(y) * width + x) * channels + c];
    }
};

PngImage decode_png(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_png(const PngImage& img);

} // namespace stereodiff
