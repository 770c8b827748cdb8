#include "core/codec.hpp"

#include "core/errors.hpp"

namespace stereodiff {

Grid encode(const Grid& image, const CodecConfig& cfg) {
    const int f = cfg.factor;
    check(f >= 1, "encode: factor < 1");
    check(image.channels == cfg.image_channels, "encode: channel count mismatch");
    check(image.height % f == 0 && image.width % f == 0, "encode: dimensions not divisible by factor");
    Grid lat(image.channels * f * f, image.height / f, image.width / f);
    for (int c = 0; c < image.channels; ++c)
        for (int dy = 0; dy < f; ++dy)
            for (int dx = 0; dx < f; ++dx) {
                int lc = (c * f + dy) * f + dx;
                for (int y = 0; y < lat.height; ++y)
                    for (int x = 0; x < lat.width; ++x)
                        lat.at(lc, y, x) = image.at(c, y * f + dy, x * f + dx);
            }
    return lat;
}

Grid decode(const Grid& latent, const CodecConfig& cfg) {
    const int f = cfg.factor;
    check(f >= 1, "decode: factor < 1");
    check(latent.channels == cfg.image_channels * f * f, "decode: channel count mismatch");
    Grid img(cfg.image_channels, latent.height * f, latent.width * f);
    for (int c = 0; c < img.channels; ++c)
        for (int dy = 0; dy < f; ++dy)
            for (int dx = 0; dx < f; ++dx) {
                int lc = (c * f + dy) * f + dx;
                for (int y = 0; y < latent.height; ++y)
                    for (int x = 0; x < latent.width; ++x)
                        img.at(c, y * f + dy, x * f + dx) = latent.at(lc, y, x);
            }
    return img;
}

Grid clamp01(const Grid& image) {
    Grid out = image;
    for (auto& x : out.v) x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    return out;
}

} // namespace stereodiff
