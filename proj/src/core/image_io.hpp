#pragma once

#include <string>

#include "core/disparity.hpp"
#include "core/grid.hpp"

namespace stereodiff {

// Images move through files as 8-bit PNG/PNM or float PFM; in memory they are
// [0,1] grids. Disparity files are PFM (values verbatim) or 16-bit PNG with
// the raw/256 convention where raw 0 marks invalid.
Grid load_image(const std::string& path);
void save_image(const Grid& image, const std::string& path);  // dispatch: .png/.ppm/.pgm/.pfm

// 16-bit grayscale PNG, disparity = raw/256, raw 0 = invalid. Values are in
// pixels, i.e. unnormalized.
DisparityField parse_kitti_disparity(const std::vector<uint8_t>& bytes);

DisparityField load_disparity(const std::string& path);
void save_disparity_pfm(const DisparityField& D, const std::string& path);

// Exact-area box resampling (downscale only).
Grid area_downsample(const Grid& img, int out_h, int out_w);
Grid center_crop(const Grid& img, int out_h, int out_w);

// Aspect-preserving area downscale so the short side equals `size`, then
// center crop to size x size.
Grid fit_to_working(const Grid& img, int size);

// Valid-weighted area resampling; values are rescaled by out_w/in_w since a
// disparity is a horizontal length.
DisparityField resize_disparity_area(const DisparityField& D, int out_h, int out_w);
DisparityField fit_disparity_to_working(const DisparityField& D, int size);

} // namespace stereodiff
