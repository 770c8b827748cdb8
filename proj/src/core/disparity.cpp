#include "core/disparity.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace stereodiff {

DisparityField depth_to_disparity(const std::vector<double>& Z, int height, int width, double focal,
                                  double baseline) {
    check(focal > 0.0, "depth_to_disparity: focal length must be positive");
    check(baseline > 0.0, "depth_to_disparity: baseline must be positive");
    check((int)Z.size() == height * width, "depth_to_disparity: depth size mismatch");
    DisparityField D(height, width, DisparitySpace::image);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double z = Z[size_t(y) * width + x];
            if (!std::isfinite(z) || z <= 0.0) {
                D.at(y, x) = 0.0;
                D.set_valid(y, x, false);
            } else {
                D.at(y, x) = focal * baseline / z;
            }
        }
    return D;
}

DisparityField normalize(const DisparityField& D) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int y = 0; y < D.height; ++y)
        for (int x = 0; x < D.width; ++x)
            if (D.is_valid(y, x)) {
                any = true;
                lo = std::min(lo, D.at(y, x));
                hi = std::max(hi, D.at(y, x));
            }
    check(any, "normalize: no valid sites");
    DisparityField out = D;
    double span = hi - lo;
    for (int y = 0; y < D.height; ++y)
        for (int x = 0; x < D.width; ++x) {
            if (!D.is_valid(y, x)) {
                out.at(y, x) = 0.0;
                continue;
            }
            out.at(y, x) = span > 0.0 ? (D.at(y, x) - lo) / span : 0.0;
        }
    return out;
}

DisparityField ensure_normalized(const DisparityField& D) {
    bool any = false;
    bool in_unit = true;
    for (int y = 0; y < D.height && in_unit; ++y)
        for (int x = 0; x < D.width; ++x) {
            if (!D.is_valid(y, x)) continue;
            any = true;
            double v = D.at(y, x);
            if (v < 0.0 || v > 1.0) {
                in_unit = false;
                break;
            }
        }
    check(any, "ensure_normalized: no valid sites");
    return in_unit ? D : normalize(D);
}

DisparityField smooth(const DisparityField& D, int radius) {
    check(radius >= 0, "smooth: negative radius");
    if (radius == 0) return D;
    const double sigma = double(radius) / 2.0;
    const int k = 2 * radius + 1;
    std::vector<double> kernel(size_t(k) * k);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            kernel[size_t(dy + radius) * k + (dx + radius)] =
                std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
    DisparityField out = D;
    for (int y = 0; y < D.height; ++y)
        for (int x = 0; x < D.width; ++x) {
            if (!D.is_valid(y, x)) {
                out.at(y, x) = 0.0;
                continue;
            }
            double acc = 0.0, wsum = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= D.height || xx < 0 || xx >= D.width) continue;
                    if (!D.is_valid(yy, xx)) continue;
                    double w = kernel[size_t(dy + radius) * k + (dx + radius)];
                    acc += w * D.at(yy, xx);
                    wsum += w;
                }
            out.at(y, x) = acc / wsum;  // center is valid, so wsum > 0
        }
    return out;
}

DisparityField resample_to_latent(const DisparityField& D, const CodecConfig& codec) {
    const int f = codec.factor;
    check(D.space == DisparitySpace::image, "resample_to_latent: field already in latent space");
    check(D.height % f == 0 && D.width % f == 0, "resample_to_latent: resolution mismatch with codec");
    DisparityField out(D.height / f, D.width / f, DisparitySpace::latent);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double acc = 0.0;
            int n = 0;
            for (int dy = 0; dy < f; ++dy)
                for (int dx = 0; dx < f; ++dx)
                    if (D.is_valid(y * f + dy, x * f + dx)) {
                        acc += D.at(y * f + dy, x * f + dx);
                        ++n;
                    }
            if (n == 0) {
                out.at(y, x) = 0.0;
                out.set_valid(y, x, false);
            } else {
                out.at(y, x) = acc / n;
            }
        }
    return out;
}

} // namespace stereodiff
