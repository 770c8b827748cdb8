#include "core/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "core/errors.hpp"
#include "core/pfm.hpp"
#include "core/png_codec.hpp"
#include "core/ppm.hpp"
#include "core/util.hpp"

namespace stereodiff {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    check(dot != std::string::npos && dot + 1 < path.size(),
          "path has no file extension: " + path);
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

uint8_t to_byte(double v) { return static_cast<uint8_t>(std::lround(clamp01(v) * 255.0)); }

Grid from_png(const PngImage& png) {
    Grid g(png.channels, png.height, png.width);
    const double denom = png.bit_depth == 16 ? 65535.0 : 255.0;
    for (int y = 0; y < png.height; ++y)
        for (int x = 0; x < png.width; ++x)
            for (int c = 0; c < png.channels; ++c) g.at(c, y, x) = png.at(y, x, c) / denom;
    return g;
}

Grid from_pnm(const PnmImage& pnm) {
    Grid g(pnm.channels, pnm.height, pnm.width);
    for (int y = 0; y < pnm.height; ++y)
        for (int x = 0; x < pnm.width; ++x)
            for (int c = 0; c < pnm.channels; ++c)
                g.at(c, y, x) =
                    pnm.data[(size_t(y) * pnm.width + x) * pnm.channels + c] / 255.0;
    return g;
}

Grid from_pfm(const PfmImage& pfm) {
    Grid g(pfm.channels, pfm.height, pfm.width);
    for (int y = 0; y < pfm.height; ++y)
        for (int x = 0; x < pfm.width; ++x)
            for (int c = 0; c < pfm.channels; ++c) g.at(c, y, x) = clamp01(pfm.at(y, x, c));
    return g;
}

} // namespace

Grid load_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return from_png(decode_png(read_file(path)));
    if (ext == "ppm" || ext == "pgm" || ext == "pnm") return from_pnm(parse_pnm(read_file(path)));
    if (ext == "pfm") return from_pfm(parse_pfm(read_file(path)));
    fail("unsupported image extension: ." + ext);
}

void save_image(const Grid& image, const std::string& path) {
    check_nonempty(image, "save_image");
    check(image.channels == 1 || image.channels == 3, "save_image expects 1 or 3 channels");
    const std::string ext = lower_ext(path);
    if (ext == "pfm") {
        PfmImage pfm;
        pfm.channels = image.channels;
        pfm.height = image.height;
        pfm.width = image.width;
        pfm.data.resize(image.v.size());
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                for (int c = 0; c < image.channels; ++c)
                    pfm.at(y, x, c) = static_cast<float>(image.at(c, y, x));
        const auto bytes = write_pfm(pfm);
        write_file(path, bytes.data(), bytes.size());
        return;
    }
    if (ext == "png") {
        PngImage png;
        png.width = image.width;
        png.height = image.height;
        png.channels = image.channels;
        png.bit_depth = 8;
        png.data.resize(image.v.size());
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                for (int c = 0; c < image.channels; ++c)
                    png.data[(size_t(y) * image.width + x) * image.channels + c] =
                        to_byte(image.at(c, y, x));
        const auto bytes = encode_png(png);
        write_file(path, bytes.data(), bytes.size());
        return;
    }
    if (ext == "ppm" || ext == "pgm" || ext == "pnm") {
        check((ext == "pgm") == (image.channels == 1), "channel count does not match ." + ext);
        PnmImage pnm;
        pnm.width = image.width;
        pnm.height = image.height;
        pnm.channels = image.channels;
        pnm.data.resize(image.v.size());
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                for (int c = 0; c < image.channels; ++c)
                    pnm.data[(size_t(y) * image.width + x) * image.channels + c] =
                        to_byte(image.at(c, y, x));
        const auto bytes = write_pnm(pnm);
        write_file(path, bytes.data(), bytes.size());
        return;
    }
    fail("unsupported image extension: ." + ext);
}

DisparityField parse_kitti_disparity(const std::vector<uint8_t>& bytes) {
    PngImage png = decode_png(bytes);
    check(png.channels == 1 && png.bit_depth == 16, "disparity PNG must be 16-bit grayscale");
    DisparityField D(png.height, png.width, DisparitySpace::image);
    for (int y = 0; y < png.height; ++y)
        for (int x = 0; x < png.width; ++x) {
            const uint16_t raw = png.at(y, x, 0);
            if (raw > 0) {
                D.at(y, x) = raw / 256.0;
            } else {
                D.at(y, x) = 0.0;
                D.set_valid(y, x, false);
            }
        }
    return D;
}

DisparityField load_disparity(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "pfm") {
        PfmImage pfm = parse_pfm(read_file(path));
        check(pfm.channels == 1, "disparity PFM must be grayscale");
        DisparityField D(pfm.height, pfm.width, DisparitySpace::image);
        for (int y = 0; y < pfm.height; ++y)
            for (int x = 0; x < pfm.width; ++x) {
                const float v = pfm.at(y, x, 0);
                if (std::isfinite(v)) {
                    D.at(y, x) = v;
                } else {
                    D.at(y, x) = 0.0;
                    D.set_valid(y, x, false);
                }
            }
        return D;
    }
    if (ext == "png") return parse_kitti_disparity(read_file(path));
    fail("unsupported disparity extension: ." + ext);
}

void save_disparity_pfm(const DisparityField& D, const std::string& path) {
    PfmImage pfm;
    pfm.channels = 1;
    pfm.height = D.height;
    pfm.width = D.width;
    pfm.data.resize(size_t(D.height) * D.width);
    for (int y = 0; y < D.height; ++y)
        for (int x = 0; x < D.width; ++x)
            pfm.at(y, x, 0) = D.is_valid(y, x) ? static_cast<float>(D.at(y, x))
                                               : std::numeric_limits<float>::infinity();
    const auto bytes = write_pfm(pfm);
    write_file(path, bytes.data(), bytes.size());
}

Grid area_downsample(const Grid& img, int out_h, int out_w) {
    check_nonempty(img, "area_downsample");
    check(out_h >= 1 && out_w >= 1, "area_downsample target must be positive");
    check(out_h <= img.height && out_w <= img.width, "area_downsample cannot upscale");
    if (out_h == img.height && out_w == img.width) return img;
    const double ry = static_cast<double>(img.height) / out_h;
    const double rx = static_cast<double>(img.width) / out_w;
    Grid out(img.channels, out_h, out_w);
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * ry, y1 = (oy + 1) * ry;
        const int sy0 = static_cast<int>(std::floor(y0));
        const int sy1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * rx, x1 = (ox + 1) * rx;
            const int sx0 = static_cast<int>(std::floor(x0));
            const int sx1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int sy = sy0; sy < sy1; ++sy) {
                    const double wy = std::min<double>(y1, sy + 1) - std::max<double>(y0, sy);
                    if (wy <= 0.0) continue;
                    for (int sx = sx0; sx < sx1; ++sx) {
                        const double wx = std::min<double>(x1, sx + 1) - std::max<double>(x0, sx);
                        if (wx <= 0.0) continue;
                        acc += wy * wx * img.at(c, sy, sx);
                    }
                }
                out.at(c, oy, ox) = acc / (ry * rx);
            }
        }
    }
    return out;
}

Grid center_crop(const Grid& img, int out_h, int out_w) {
    check_nonempty(img, "center_crop");
    check(out_h >= 1 && out_w >= 1 && out_h <= img.height && out_w <= img.width,
          "center_crop target exceeds image");
    const int y0 = (img.height - out_h) / 2;
    const int x0 = (img.width - out_w) / 2;
    Grid out(img.channels, out_h, out_w);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
    return out;
}

Grid fit_to_working(const Grid& img, int size) {
    check(size >= 1, "working size must be positive");
    const int short_side = std::min(img.height, img.width);
    check(short_side >= size, "image is below the working resolution");
    int out_h, out_w;
    if (img.height <= img.width) {
        out_h = size;
        out_w = std::max(
            size, static_cast<int>(std::lround(img.width * double(size) / img.height)));
    } else {
        out_w = size;
        out_h = std::max(
            size, static_cast<int>(std::lround(img.height * double(size) / img.width)));
    }
    return center_crop(area_downsample(img, out_h, out_w), size, size);
}

DisparityField resize_disparity_area(const DisparityField& D, int out_h, int out_w) {
    check(out_h >= 1 && out_w >= 1, "resize target must be positive");
    check(out_h <= D.height && out_w <= D.width, "disparity resampling cannot upscale");
    const double ry = static_cast<double>(D.height) / out_h;
    const double rx = static_cast<double>(D.width) / out_w;
    const double value_scale = static_cast<double>(out_w) / D.width;
    DisparityField out(out_h, out_w, D.space);
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * ry, y1 = (oy + 1) * ry;
        const int sy0 = static_cast<int>(std::floor(y0));
        const int sy1 = std::min(D.height, static_cast<int>(std::ceil(y1)));
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * rx, x1 = (ox + 1) * rx;
            const int sx0 = static_cast<int>(std::floor(x0));
            const int sx1 = std::min(D.width, static_cast<int>(std::ceil(x1)));
            double acc = 0.0, wsum = 0.0;
            for (int sy = sy0; sy < sy1; ++sy) {
                const double wy = std::min<double>(y1, sy + 1) - std::max<double>(y0, sy);
                if (wy <= 0.0) continue;
                for (int sx = sx0; sx < sx1; ++sx) {
                    if (!D.is_valid(sy, sx)) continue;
                    const double wx = std::min<double>(x1, sx + 1) - std::max<double>(x0, sx);
                    if (wx <= 0.0) continue;
                    acc += wy * wx * D.at(sy, sx);
                    wsum += wy * wx;
                }
            }
            if (wsum > 0.0) {
                out.at(oy, ox) = (acc / wsum) * value_scale;
            } else {
                out.at(oy, ox) = 0.0;
                out.set_valid(oy, ox, false);
            }
        }
    }
    return out;
}

DisparityField fit_disparity_to_working(const DisparityField& D, int size) {
    check(size >= 1, "working size must be positive");
    const int short_side = std::min(D.height, D.width);
    check(short_side >= size, "disparity is below the working resolution");
    int out_h, out_w;
    if (D.height <= D.width) {
        out_h = size;
        out_w = std::max(size,
                         static_cast<int>(std::lround(D.width * double(size) / D.height)));
    } else {
        out_w = size;
        out_h = std::max(size,
                         static_cast<int>(std::lround(D.height * double(size) / D.width)));
    }
    DisparityField scaled = resize_disparity_area(D, out_h, out_w);
    const int y0 = (out_h - size) / 2;
    const int x0 = (out_w - size) / 2;
    DisparityField out(size, size, D.space);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            out.at(y, x) = scaled.at(y0 + y, x0 + x);
            out.set_valid(y, x, scaled.is_valid(y0 + y, x0 + x));
        }
    return out;
}

} // namespace stereodiff
