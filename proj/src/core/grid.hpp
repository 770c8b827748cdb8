#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stereodiff {

// channels x height x width grid of doubles; the latent x_t, and also images
// (channels 1 or 3, values in [0,1] by convention).
struct Grid {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w), v(size_t(c) * h * w, fill) {}

    size_t numel() const { return v.size(); }

    double& at(int c, int y, int x) {
        return v[(size_t(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return v[(size_t(c) * height + y) * width + x];
    }

    bool same_shape(const Grid& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

void check_same_shape(const Grid& a, const Grid& b, const std::string& ctx);
void check_nonempty(const Grid& g, const std::string& ctx);

bool all_finite(const Grid& g);
void ensure_finite(const Grid& g, const std::string& ctx);

double max_abs_diff(const Grid& a, const Grid& b);
double mean_sq_diff(const Grid& a, const Grid& b);

} // namespace stereodiff
