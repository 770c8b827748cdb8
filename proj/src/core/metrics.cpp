#include "core/metrics.hpp"

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/stereo_ops.hpp"

namespace stereodiff {

double psnr(const Grid& a, const Grid& b, double max_val) {
    check_nonempty(a, "psnr");
    check_same_shape(a, b, "psnr");
    check(max_val > 0.0, "psnr: max_val must be positive");
    const double mse = mean_sq_diff(a, b);
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(max_val * max_val / mse));
}

double ssim(const Grid& a, const Grid& b) {
    check_nonempty(a, "ssim");
    check_same_shape(a, b, "ssim");
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    check(a.height >= kWindow && a.width >= kWindow, "ssim: image smaller than window");

    double w[kWindow][kWindow];
    double wsum = 0.0;
    for (int i = 0; i < kWindow; ++i)
        for (int j = 0; j < kWindow; ++j) {
            const double dy = i - (kWindow - 1) / 2.0;
            const double dx = j - (kWindow - 1) / 2.0;
            w[i][j] = std::exp(-(dy * dy + dx * dx) / (2.0 * kSigma * kSigma));
            wsum += w[i][j];
        }
    for (int i = 0; i < kWindow; ++i)
        for (int j = 0; j < kWindow; ++j) w[i][j] /= wsum;

    double total = 0.0;
    long count = 0;
    for (int c = 0; c < a.channels; ++c)
        for (int y = 0; y + kWindow <= a.height; ++y)
            for (int x = 0; x + kWindow <= a.width; ++x) {
                double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
                for (int i = 0; i < kWindow; ++i)
                    for (int j = 0; j < kWindow; ++j) {
                        const double va = a.at(c, y + i, x + j);
                        const double vb = b.at(c, y + i, x + j);
                        mu_a += w[i][j] * va;
                        mu_b += w[i][j] * vb;
                        aa += w[i][j] * va * va;
                        bb += w[i][j] * vb * vb;
                        ab += w[i][j] * va * vb;
                    }
                const double var_a = aa - mu_a * mu_a;
                const double var_b = bb - mu_b * mu_b;
                const double cov = ab - mu_a * mu_b;
                total += ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) /
                         ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
                ++count;
            }
    return total / double(count);
}

Grid baseline_warp(const Grid& image, const DisparityField& D, double s, FillMode fill,
                   int sign) {
    ShiftConfig cfg;
    cfg.s = s;
    cfg.sign = sign;
    cfg.hole_sentinel = 0.0;
    ShiftResult res = stereo_pixel_shift(image, D, cfg);
    if (fill == FillMode::leave_blank) return res.warped;

    Grid out = res.warped;
    for (int y = 0; y < image.height; ++y) {
        std::vector<int> fallback(image.width, -1);
        int next = -1;
        for (int x = image.width - 1; x >= 0; --x) {
            if (!res.hole_mask.at(y, x)) next = x;
            fallback[x] = next;
        }
        int prev = -1;
        for (int x = 0; x < image.width; ++x) {
            if (!res.hole_mask.at(y, x)) {
                prev = x;
                continue;
            }
            const int src = prev >= 0 ? prev : fallback[x];
            if (src < 0) continue;  // a fully holed row stays at the sentinel
            for (int c = 0; c < image.channels; ++c) out.at(c, y, x) = out.at(c, y, src);
        }
    }
    return out;
}

} // namespace stereodiff
