#pragma once

#include "core/disparity.hpp"
#include "core/grid.hpp"

namespace stereodiff {

inline constexpr double kPsnrCap = 99.0;

// 10*log10(max_val^2 / MSE), capped at 99 dB (identical images hit the cap).
double psnr(const Grid& a, const Grid& b, double max_val = 1.0);

// Mean local SSIM, Gaussian window 11 sigma 1.5, K1=0.01 K2=0.03, range 1.
// Windows are fully interior (valid convolution); channels averaged.
double ssim(const Grid& a, const Grid& b);

enum class FillMode { leave_blank, stretch };

// Image-space scatter warp with the classic hole fills: leave_blank keeps
// holes at 0; stretch copies the nearest non-hole pixel to the left in the
// same row, falling back rightward at row starts.
Grid baseline_warp(const Grid& image, const DisparityField& D, double s, FillMode fill,
                   int sign = 1);

} // namespace stereodiff
