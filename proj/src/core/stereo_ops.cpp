#include "core/stereo_ops.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace stereodiff {

static void check_disparity_for_shift(const Grid& x, const DisparityField& D) {
    check(D.height == x.height && D.width == x.width, "stereo_pixel_shift: resolution mismatch");
    for (int y = 0; y < D.height; ++y)
        for (int xx = 0; xx < D.width; ++xx)
            if (D.is_valid(y, xx))
                check(D.at(y, xx) >= 0.0 && D.at(y, xx) <= 1.0,
                      "stereo_pixel_shift: disparity not normalized to [0,1]");
}

ShiftResult stereo_pixel_shift(const Grid& x, const DisparityField& D, const ShiftConfig& cfg) {
    check(cfg.s >= 0.0, "stereo_pixel_shift: negative scale");
    check(cfg.sign == 1 || cfg.sign == -1, "stereo_pixel_shift: sign must be +1 or -1");
    check_disparity_for_shift(x, D);

    ShiftResult r;
    r.warped = Grid(x.channels, x.height, x.width, cfg.hole_sentinel);
    r.moved_mask = Mask(x.height, x.width);
    r.hole_mask = Mask(x.height, x.width);
    r.displacement.assign(size_t(x.height) * x.width, 0);

    double max_d = 0.0;
    std::vector<double> best_disp(x.width);
    std::vector<uint8_t> occupied(x.width);
    std::vector<uint8_t> moved(x.width);
    for (int y = 0; y < x.height; ++y) {
        std::fill(best_disp.begin(), best_disp.end(), -std::numeric_limits<double>::infinity());
        std::fill(occupied.begin(), occupied.end(), 0);
        std::fill(moved.begin(), moved.end(), 0);
        for (int u = 0; u < x.width; ++u) {
            double d = D.is_valid(y, u) ? D.at(y, u) : 0.0;
            max_d = std::max(max_d, d);
            int delta = D.is_valid(y, u) ? cfg.sign * (int)std::lround(cfg.s * d) : 0;
            r.displacement[size_t(y) * x.width + u] = delta;
            int t = u + delta;
            if (t < 0 || t >= x.width) continue;
            if (occupied[t] && d <= best_disp[t]) continue;
            occupied[t] = 1;
            best_disp[t] = d;
            moved[t] = delta != 0;
            for (int c = 0; c < x.channels; ++c) r.warped.at(c, y, t) = x.at(c, y, u);
        }
        for (int t = 0; t < x.width; ++t) {
            if (!occupied[t])
                r.hole_mask.set(y, t, true);
            else if (moved[t])
                r.moved_mask.set(y, t, true);
        }
    }
    r.width_warning = cfg.s * max_d > 0.1 * double(x.width);
    return r;
}

Grid spsmd_paste(const Grid& right, const Grid& left_prev, const DisparityField& D,
                 const ShiftConfig& cfg, const Mask& moved_mask) {
    check_same_shape(right, left_prev, "spsmd_paste");
    check(moved_mask.height == right.height && moved_mask.width == right.width,
          "spsmd_paste: mask resolution mismatch");
    ShiftResult shifted = stereo_pixel_shift(left_prev, D, cfg);
    Grid out = right;
    for (int y = 0; y < right.height; ++y)
        for (int x = 0; x < right.width; ++x)
            if (moved_mask.at(y, x))
                for (int c = 0; c < right.channels; ++c) out.at(c, y, x) = shifted.warped.at(c, y, x);
    return out;
}

Grid deblur_fill(const Grid& x, const Mask& hole_mask, uint64_t noise_seed) {
    check(hole_mask.height == x.height && hole_mask.width == x.width,
          "deblur_fill: mask resolution mismatch");
    Rng rng(noise_seed);
    Grid out = x;
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx)
            if (hole_mask.at(y, xx))
                for (int c = 0; c < x.channels; ++c) out.at(c, y, xx) = rng.normal();
    return out;
}

} // namespace stereodiff
