#pragma once

#include <cstdint>
#include <vector>

namespace stereodiff {

// P6 (rgb) / P5 (gray), 8-bit, maxval 255.
struct PnmImage {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<uint8_t> data;  // row-major, interleaved
};

PnmImage parse_pnm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> write_pnm(const PnmImage& img);

} // namespace stereodiff
