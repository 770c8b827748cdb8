#pragma once

#include <cstdint>
#include <vector>

#include "core/disparity.hpp"
#include "core/grid.hpp"
#include "core/rng.hpp"

namespace stereodiff {

struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> m;

    Mask() = default;
    Mask(int h, int w, bool fill = false) : height(h), width(w), m(size_t(h) * w, fill ? 1 : 0) {}

    bool at(int y, int x) const { return m[size_t(y) * width + x] != 0; }
    void set(int y, int x, bool b) { m[size_t(y) * width + x] = b ? 1 : 0; }
    size_t count() const {
        size_t n = 0;
        for (auto b : m) n += b != 0;
        return n;
    }
};

struct ShiftConfig {
    double s = 3.0;             // shift scale in grid-pixel units
    int sign = +1;              // +1 shifts content rightward
    double hole_sentinel = 0.0;
};

struct ShiftResult {
    Grid warped;
    Mask moved_mask;            // received content displaced by >= 1 site
    Mask hole_mask;             // received nothing
    std::vector<int> displacement;  // per-source offset, height x width
    bool width_warning = false;     // s * max(D) exceeded 10% of grid width
};

// Forward scatter: each source column u in each row sends all channels to
// u + sign*round(s*D(u,y)); collisions keep the larger disparity (z-buffer,
// first source wins ties); out-of-bounds targets are dropped. Invalid
// disparity sites contribute zero shift.
ShiftResult stereo_pixel_shift(const Grid& x, const DisparityField& D, const ShiftConfig& cfg);

// X' = shift(left_prev).warped on moved_mask, right elsewhere.
Grid spsmd_paste(const Grid& right, const Grid& left_prev, const DisparityField& D,
                 const ShiftConfig& cfg, const Mask& moved_mask);

// Replace hole sites (all channels) with iid standard normal draws.
Grid deblur_fill(const Grid& x, const Mask& hole_mask, uint64_t noise_seed);

} // namespace stereodiff
