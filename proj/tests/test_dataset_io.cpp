#include <doctest.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "core/compose.hpp"
#include "core/errors.hpp"
#include "core/image_io.hpp"
#include "core/pfm.hpp"
#include "core/png_codec.hpp"
#include "core/ppm.hpp"
#include "core/rng.hpp"
#include "core/stereo_ops.hpp"
#include "core/synthetic.hpp"
#include "core/util.hpp"

using namespace stereodiff;

namespace {

std::string tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "sdf_dataset_io";
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::vector<uint8_t> pfm_bytes(const std::string& header, const std::vector<float>& payload,
                               bool byte_swap = false) {
    std::vector<uint8_t> out(header.begin(), header.end());
    for (float f : payload) {
        uint32_t raw;
        std::memcpy(&raw, &f, 4);
        if (byte_swap)
            raw = (raw >> 24) | ((raw >> 8) & 0xff00u) | ((raw << 8) & 0xff0000u) | (raw << 24);
        for (int i = 0; i < 4; ++i) out.push_back(uint8_t(raw >> (8 * i)));
    }
    return out;
}

void be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

void png_chunk(std::vector<uint8_t>& out, const char type[5], const std::vector<uint8_t>& payload) {
    be32(out, uint32_t(payload.size()));
    std::vector<uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    be32(out, uint32_t(crc32(0, body.data(), uInt(body.size()))));
}

// hand-assembled grayscale 8-bit PNG from pre-filtered scanlines
std::vector<uint8_t> png_from_scanlines(int w, int h, const std::vector<uint8_t>& scanlines) {
    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<uint8_t> ihdr;
    be32(ihdr, uint32_t(w));
    be32(ihdr, uint32_t(h));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(0);   // grayscale
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    png_chunk(out, "IHDR", ihdr);
    uLongf cap = compressBound(uLong(scanlines.size()));
    std::vector<uint8_t> z(cap);
    REQUIRE(compress2(z.data(), &cap, scanlines.data(), uLong(scanlines.size()), 6) == Z_OK);
    z.resize(cap);
    png_chunk(out, "IDAT", z);
    png_chunk(out, "IEND", {});
    return out;
}

} // namespace

TEST_CASE("parse_pfm reads the documented little-endian layout bottom-to-top") {
    std::vector<float> payload = {1, 2, 3, 4, 5, 6};  // bottom row first
    PfmImage img = parse_pfm(pfm_bytes("Pf\n3 2\n-1.0\n", payload));
    CHECK(img.channels == 1);
    CHECK(img.height == 2);
    CHECK(img.width == 3);
    CHECK(img.at(0, 0) == 4.0f);
    CHECK(img.at(0, 1) == 5.0f);
    CHECK(img.at(0, 2) == 6.0f);
    CHECK(img.at(1, 0) == 1.0f);
    CHECK(img.at(1, 1) == 2.0f);
    CHECK(img.at(1, 2) == 3.0f);
}

TEST_CASE("parse_pfm applies |scale| as a multiplier") {
    std::vector<float> payload = {1, 2, 3, 4, 5, 6};
    PfmImage full = parse_pfm(pfm_bytes("Pf\n3 2\n-1.0\n", payload));
    PfmImage half = parse_pfm(pfm_bytes("Pf\n3 2\n-0.5\n", payload));
    for (size_t i = 0; i < full.data.size(); ++i) CHECK(half.data[i] == 0.5f * full.data[i]);
}

TEST_CASE("parse_pfm handles big-endian payloads via a positive scale") {
    std::vector<float> payload = {1.5f, -2.25f, 3.75f, 0.125f, -8.0f, 64.0f};
    PfmImage le = parse_pfm(pfm_bytes("Pf\n3 2\n-1.0\n", payload));
    PfmImage be = parse_pfm(pfm_bytes("Pf\n3 2\n1.0\n", payload, true));
    CHECK(le.data == be.data);
}

TEST_CASE("write_pfm then parse_pfm is bit-exact") {
    Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        PfmImage img;
        img.channels = i % 2 == 0 ? 1 : 3;
        img.height = 2 + i % 3;
        img.width = 3 + i % 4;
        img.data.resize(size_t(img.height) * img.width * img.channels);
        for (float& f : img.data) f = float(rng.normal() * 100.0);
        PfmImage back = parse_pfm(write_pfm(img));
        CHECK(back.channels == img.channels);
        CHECK(back.height == img.height);
        CHECK(back.width == img.width);
        CHECK(std::memcmp(back.data.data(), img.data.data(), img.data.size() * 4) == 0);
    }
}

TEST_CASE("parse_pfm rejects malformed input") {
    std::vector<float> payload = {1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS((void)parse_pfm(pfm_bytes("Qf\n3 2\n-1.0\n", payload)), error);
    CHECK_THROWS_AS((void)parse_pfm(pfm_bytes("Pf\n0 2\n-1.0\n", payload)), error);
    CHECK_THROWS_AS((void)parse_pfm(pfm_bytes("Pf\n3 2\n0\n", payload)), error);
    auto truncated = pfm_bytes("Pf\n3 2\n-1.0\n", payload);
    truncated.resize(truncated.size() - 4);
    CHECK_THROWS_AS((void)parse_pfm(truncated), error);
    auto trailing = pfm_bytes("Pf\n3 2\n-1.0\n", payload);
    trailing.push_back(0);
    CHECK_THROWS_AS((void)parse_pfm(trailing), error);
}

TEST_CASE("decode_png reconstructs sub/up/average/paeth filtered rows") {
    // scanlines carry filter ids 1..4; expected values worked out by hand
    std::vector<uint8_t> scanlines = {
        1, 10, 5, 5, 5,    // sub
        2, 1,  2, 3, 4,    // up
        3, 4,  6, 8, 10,   // average
        4, 7,  3, 2, 1,    // paeth
    };
    PngImage img = decode_png(png_from_scanlines(4, 4, scanlines));
    const uint16_t expected[4][4] = {
        {10, 15, 20, 25}, {11, 17, 23, 29}, {9, 19, 29, 39}, {16, 22, 31, 40}};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(img.at(y, x) == expected[y][x]);
}

TEST_CASE("encode_png then decode_png round-trips 8-bit rgb and 16-bit gray") {
    Rng rng(7);
    PngImage rgb;
    rgb.width = 9;
    rgb.height = 5;
    rgb.channels = 3;
    rgb.bit_depth = 8;
    rgb.data.resize(size_t(9) * 5 * 3);
    for (auto& v : rgb.data) v = uint16_t(rng.raw() % 256);
    PngImage rgb_back = decode_png(encode_png(rgb));
    CHECK(rgb_back.bit_depth == 8);
    CHECK(rgb_back.data == rgb.data);

    PngImage gray;
    gray.width = 6;
    gray.height = 4;
    gray.channels = 1;
    gray.bit_depth = 16;
    gray.data.resize(24);
    for (auto& v : gray.data) v = uint16_t(rng.raw() % 65536);
    PngImage gray_back = decode_png(encode_png(gray));
    CHECK(gray_back.bit_depth == 16);
    CHECK(gray_back.data == gray.data);
}

TEST_CASE("decode_png rejects corrupted and truncated streams") {
    std::vector<uint8_t> scanlines(5 * 4, 0);
    auto good = png_from_scanlines(4, 4, scanlines);
    CHECK_NOTHROW((void)decode_png(good));

    auto bad_crc = good;
    bad_crc[30] ^= 0x40;  // inside the IHDR chunk, past the length field
    CHECK_THROWS_AS((void)decode_png(bad_crc), error);

    auto truncated = good;
    truncated.resize(truncated.size() - 8);
    CHECK_THROWS_AS((void)decode_png(truncated), error);

    auto bad_sig = good;
    bad_sig[0] = 0x88;
    CHECK_THROWS_AS((void)decode_png(bad_sig), error);
}

TEST_CASE("parse_kitti_disparity divides by 256 and flags raw zero invalid") {
    PngImage png;
    png.width = 3;
    png.height = 2;
    png.channels = 1;
    png.bit_depth = 16;
    png.data = {0, 512, 256, 1, 65535, 128};
    DisparityField D = parse_kitti_disparity(encode_png(png));
    CHECK(!D.is_valid(0, 0));
    CHECK(D.at(0, 1) == 2.0);
    CHECK(D.at(0, 2) == 1.0);
    CHECK(D.at(1, 0) == doctest::Approx(1.0 / 256.0));
    CHECK(D.at(1, 1) == doctest::Approx(65535.0 / 256.0));
    CHECK(D.at(1, 2) == 0.5);

    // valid fraction cross-checked against the raw samples
    size_t raw_valid = 0;
    for (uint16_t v : png.data) raw_valid += v > 0;
    size_t field_valid = 0;
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) field_valid += D.is_valid(y, x);
    CHECK(raw_valid == field_valid);
    CHECK(field_valid == 5);

    PngImage eight = png;
    eight.bit_depth = 8;
    for (auto& v : eight.data) v %= 256;
    CHECK_THROWS_AS((void)parse_kitti_disparity(encode_png(eight)), error);
}

TEST_CASE("parse_pnm handles comments and rejects truncation") {
    std::string header = "P6 # c\n2 1\n# another\n255\n";
    std::vector<uint8_t> bytes(header.begin(), header.end());
    for (uint8_t v : {10, 20, 30, 40, 50, 60}) bytes.push_back(v);
    PnmImage img = parse_pnm(bytes);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.channels == 3);
    CHECK(img.data == std::vector<uint8_t>({10, 20, 30, 40, 50, 60}));

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS((void)parse_pnm(truncated), error);
    std::string bad = "P6\n2 1\n999\nxxxxxx";
    CHECK_THROWS_AS((void)parse_pnm(std::vector<uint8_t>(bad.begin(), bad.end())), error);
}

TEST_CASE("save_image/load_image round-trip within quantization error") {
    const std::string dir = tmp_dir();
    Rng rng(11);
    Grid img(3, 6, 7);
    for (auto& v : img.v) v = rng.uniform();
    for (const char* name : {"rt.png", "rt.ppm"}) {
        const std::string path = dir + "/" + name;
        save_image(img, path);
        Grid back = load_image(path);
        CHECK(back.channels == 3);
        CHECK(back.height == 6);
        CHECK(back.width == 7);
        CHECK(max_abs_diff(back, img) <= 0.5 / 255.0 + 1e-12);
    }
    Grid gray(1, 4, 4);
    for (auto& v : gray.v) v = rng.uniform();
    save_image(gray, dir + "/rt.pgm");
    CHECK(max_abs_diff(load_image(dir + "/rt.pgm"), gray) <= 0.5 / 255.0 + 1e-12);
    save_image(gray, dir + "/rt.pfm");
    CHECK(max_abs_diff(load_image(dir + "/rt.pfm"), gray) <= 1e-6);
    CHECK_THROWS_AS(save_image(img, dir + "/rt.bmp"), error);
    CHECK_THROWS_AS((void)load_image(dir + "/missing.png"), error);
}

TEST_CASE("disparity pfm round-trip keeps values and validity") {
    const std::string dir = tmp_dir();
    DisparityField D(3, 4, DisparitySpace::image);
    Rng rng(5);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) D.at(y, x) = rng.uniform();
    D.set_valid(1, 2, false);
    D.at(1, 2) = 0.0;
    save_disparity_pfm(D, dir + "/d.pfm");
    DisparityField back = load_disparity(dir + "/d.pfm");
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            CHECK(back.is_valid(y, x) == D.is_valid(y, x));
            if (D.is_valid(y, x)) CHECK(back.at(y, x) == doctest::Approx(D.at(y, x)).epsilon(1e-6));
        }
}

TEST_CASE("area_downsample averages exact boxes") {
    Grid img(1, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(0, y, x) = y * 4 + x;
    Grid half = area_downsample(img, 2, 2);
    CHECK(half.at(0, 0, 0) == doctest::Approx(2.5));
    CHECK(half.at(0, 0, 1) == doctest::Approx(4.5));
    CHECK(half.at(0, 1, 0) == doctest::Approx(10.5));
    CHECK(half.at(0, 1, 1) == doctest::Approx(12.5));

    // fractional boxes: 3 columns into 2, weights 1+0.5 and 0.5+1
    Grid row(1, 1, 3);
    row.at(0, 0, 0) = 0;
    row.at(0, 0, 1) = 3;
    row.at(0, 0, 2) = 6;
    Grid two = area_downsample(row, 1, 2);
    CHECK(two.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two.at(0, 0, 1) == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)area_downsample(row, 1, 4), error);
}

TEST_CASE("center_crop takes the middle window") {
    Grid img(1, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(0, y, x) = y * 4 + x;
    Grid mid = center_crop(img, 2, 2);
    CHECK(mid.at(0, 0, 0) == 5);
    CHECK(mid.at(0, 0, 1) == 6);
    CHECK(mid.at(0, 1, 0) == 9);
    CHECK(mid.at(0, 1, 1) == 10);
    CHECK_THROWS_AS((void)center_crop(img, 5, 2), error);
}

TEST_CASE("fit_to_working scales the short side and center-crops") {
    Grid wide(1, 8, 16);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) wide.at(0, y, x) = x;
    Grid out = fit_to_working(wide, 8);
    CHECK(out.height == 8);
    CHECK(out.width == 8);
    for (int x = 0; x < 8; ++x) CHECK(out.at(0, 0, x) == x + 4);

    Grid odd(3, 9, 13);
    Rng rng(3);
    for (auto& v : odd.v) v = rng.uniform();
    Grid fitted = fit_to_working(odd, 8);
    CHECK(fitted.height == 8);
    CHECK(fitted.width == 8);
    for (double v : fitted.v) CHECK((v >= 0.0 && v <= 1.0));

    CHECK_THROWS_AS((void)fit_to_working(odd, 10), error);
}

TEST_CASE("resize_disparity_area rescales values by the width ratio") {
    DisparityField D(2, 4, DisparitySpace::image);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 4; ++x) D.at(y, x) = 4.0;
    DisparityField half = resize_disparity_area(D, 1, 2);
    CHECK(half.at(0, 0) == doctest::Approx(2.0));
    CHECK(half.at(0, 1) == doctest::Approx(2.0));

    DisparityField sparse(2, 2, DisparitySpace::image);
    sparse.at(0, 0) = 2.0;
    sparse.at(1, 0) = 2.0;
    sparse.at(0, 1) = 999.0;
    sparse.at(1, 1) = 999.0;
    sparse.set_valid(0, 1, false);
    sparse.set_valid(1, 1, false);
    DisparityField one = resize_disparity_area(sparse, 1, 1);
    CHECK(one.is_valid(0, 0));
    CHECK(one.at(0, 0) == doctest::Approx(1.0));  // valid mean 2.0 times ratio 1/2

    DisparityField none(2, 2, DisparitySpace::image);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) none.set_valid(y, x, false);
    DisparityField empty = resize_disparity_area(none, 1, 1);
    CHECK(!empty.is_valid(0, 0));
    CHECK(empty.at(0, 0) == 0.0);
}

TEST_CASE("ensure_normalized keeps unit-range fields verbatim") {
    DisparityField unit(1, 3, DisparitySpace::image);
    unit.at(0, 0) = 0.2;
    unit.at(0, 1) = 0.8;
    unit.at(0, 2) = 1.0;
    DisparityField same = ensure_normalized(unit);
    CHECK(same.values == unit.values);

    DisparityField px(1, 3, DisparitySpace::image);
    px.at(0, 0) = 0.0;
    px.at(0, 1) = 1.0;
    px.at(0, 2) = 2.0;
    DisparityField norm = ensure_normalized(px);
    CHECK(norm.at(0, 0) == 0.0);
    CHECK(norm.at(0, 1) == 0.5);
    CHECK(norm.at(0, 2) == 1.0);

    DisparityField neg(1, 2, DisparitySpace::image);
    neg.at(0, 0) = -0.5;
    neg.at(0, 1) = 0.5;
    DisparityField stretched = ensure_normalized(neg);
    CHECK(stretched.at(0, 0) == 0.0);
    CHECK(stretched.at(0, 1) == 1.0);
}

TEST_CASE("zero-shape scenes are background-only with zero disparity") {
    SyntheticWorldSpec spec;
    spec.min_shapes = 0;
    spec.max_shapes = 0;
    SceneRecord rec = generate_synthetic_scene(spec, 42);
    CHECK(rec.class_token == 0);
    CHECK(rec.id == "scene_c0");
    CHECK(rec.left.v == rec.right.v);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            CHECK(rec.disparity.at(y, x) == 0.0);
            CHECK(rec.disparity.is_valid(y, x));
        }
    for (double v : rec.left.v) CHECK((v >= 0.05 && v <= 0.95));
}

TEST_CASE("same seed reproduces the identical scene") {
    SyntheticWorldSpec spec;
    SceneRecord a = generate_synthetic_scene(spec, 1234);
    SceneRecord b = generate_synthetic_scene(spec, 1234);
    CHECK(a.id == b.id);
    CHECK(a.left.v == b.left.v);
    CHECK(a.right.v == b.right.v);
    CHECK(a.disparity.values == b.disparity.values);
    SceneRecord c = generate_synthetic_scene(spec, 1235);
    CHECK(a.left.v != c.left.v);
}

TEST_CASE("right view equals the scatter warp of the left view off-hole") {
    SyntheticWorldSpec spec;
    size_t total_holes = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        SceneRecord rec = generate_synthetic_scene(spec, seed);
        ShiftConfig cfg;
        cfg.s = rec.s_image;
        cfg.hole_sentinel = -1.0;
        ShiftResult res = stereo_pixel_shift(rec.left, rec.disparity, cfg);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                if (res.hole_mask.at(y, x)) continue;
                for (int c = 0; c < 3; ++c)
                    CHECK(res.warped.at(c, y, x) == rec.right.at(c, y, x));
            }
        total_holes += res.hole_mask.count();
        if (rec.class_token > 0) CHECK(res.moved_mask.count() > 0);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                CHECK((rec.disparity.at(y, x) >= 0.0 && rec.disparity.at(y, x) <= 1.0));
    }
    CHECK(total_holes > 0);
}

TEST_CASE("disoccluded strips show the true background") {
    // same seed with zero shapes reproduces the bare background plate
    SyntheticWorldSpec one_shape;
    one_shape.min_shapes = 1;
    one_shape.max_shapes = 1;
    SyntheticWorldSpec no_shape = one_shape;
    no_shape.min_shapes = 0;
    no_shape.max_shapes = 0;
    int checked = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SceneRecord scene = generate_synthetic_scene(one_shape, seed);
        SceneRecord plate = generate_synthetic_scene(no_shape, seed);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (scene.disparity.at(y, x) == 0.0)
                    for (int c = 0; c < 3; ++c)
                        CHECK(scene.left.at(c, y, x) == plate.left.at(c, y, x));
        ShiftConfig cfg;
        cfg.s = scene.s_image;
        cfg.hole_sentinel = -1.0;
        ShiftResult res = stereo_pixel_shift(scene.left, scene.disparity, cfg);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (res.hole_mask.at(y, x)) {
                    ++checked;
                    for (int c = 0; c < 3; ++c)
                        CHECK(scene.right.at(c, y, x) == plate.left.at(c, y, x));
                }
    }
    CHECK(checked > 0);
}

TEST_CASE("a 3 px shape renders as a pure translation plus a revealed strip") {
    SyntheticWorldSpec spec;
    spec.min_shapes = 1;
    spec.max_shapes = 1;
    bool found = false;
    for (uint64_t seed = 1; seed <= 50 && !found; ++seed) {
        SceneRecord rec = generate_synthetic_scene(spec, seed);
        double dmax = 0.0;
        for (double v : rec.disparity.values) dmax = std::max(dmax, v);
        const int delta = int(std::lround(rec.s_image * dmax));
        if (delta != 3) continue;
        found = true;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (rec.disparity.at(y, x) > 0.0)
                    for (int c = 0; c < 3; ++c)
                        CHECK(rec.right.at(c, y, x + 3) == rec.left.at(c, y, x));
    }
    CHECK(found);
}

TEST_CASE("corpus write/read round-trips scenes and metadata") {
    const std::string dir = tmp_dir() + "/corpus_rt";
    std::filesystem::remove_all(dir);
    SyntheticWorldSpec spec;
    write_corpus(dir, 4, 77, spec);
    Corpus corpus = read_manifest(dir);
    CHECK(corpus.entries.size() == 4);
    CHECK(corpus.meta.image_size == 64);
    CHECK(corpus.meta.s_image == 6.0);
    CHECK(corpus.meta.channels == 3);
    CHECK(corpus.meta.seed == 77);
    for (size_t i = 0; i < corpus.entries.size(); ++i) {
        char prefix[16];
        std::snprintf(prefix, sizeof(prefix), "scene%03d", int(i));
        SceneRecord orig = generate_synthetic_scene(spec, 77 + i, prefix);
        CHECK(corpus.entries[i].id == orig.id);
        SceneRecord loaded = load_scene(corpus, corpus.entries[i]);
        CHECK(loaded.class_token == orig.class_token);
        CHECK(loaded.s_image == 6.0);
        CHECK(max_abs_diff(loaded.left, orig.left) <= 0.5 / 255.0 + 1e-12);
        CHECK(max_abs_diff(loaded.right, orig.right) <= 0.5 / 255.0 + 1e-12);
        double dmax = 0.0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                CHECK(loaded.disparity.is_valid(y, x));
                CHECK(loaded.disparity.at(y, x) ==
                      doctest::Approx(orig.disparity.at(y, x)).epsilon(1e-6));
                dmax = std::max(dmax, loaded.disparity.at(y, x));
            }
        CHECK(dmax <= 1.0);
    }

    SceneRecord small = load_scene(corpus, corpus.entries[0], 32);
    CHECK(small.left.height == 32);
    CHECK(small.left.width == 32);
    CHECK(small.right.height == 32);
    CHECK(small.disparity.height == 32);
}

TEST_CASE("read_manifest rejects malformed lines and empty corpora") {
    const std::string dir = tmp_dir() + "/corpus_bad";
    std::filesystem::create_directories(dir);
    const std::string bad = "# image_size=64\nid,left.png\n";
    write_file(dir + "/corpus.txt", bad.data(), bad.size());
    CHECK_THROWS_AS((void)read_manifest(dir), error);
    const std::string empty = "# image_size=64\n\n";
    write_file(dir + "/corpus.txt", empty.data(), empty.size());
    CHECK_THROWS_AS((void)read_manifest(dir), error);
}

TEST_CASE("class tokens parse from the id suffix") {
    CHECK(class_token_from_id("scene003_c2") == 2);
    CHECK(class_token_from_id("x_c15") == 15);
    CHECK(class_token_from_id("noclass") == 0);
    CHECK(class_token_from_id("a_cx") == 0);
    CHECK(class_token_from_id("trailing_c") == 0);
}

TEST_CASE("side_by_side concatenates and anaglyph merges to gray on identical pairs") {
    Grid left(3, 2, 2), right(3, 2, 2);
    Rng rng(9);
    for (auto& v : left.v) v = rng.uniform();
    for (auto& v : right.v) v = rng.uniform();
    Grid sbs = side_by_side(left, right);
    CHECK(sbs.width == 4);
    CHECK(sbs.height == 2);
    CHECK(sbs.at(1, 1, 1) == left.at(1, 1, 1));
    CHECK(sbs.at(2, 0, 3) == right.at(2, 0, 1));

    Grid ana = anaglyph(left, left);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            CHECK(ana.at(0, y, x) == ana.at(1, y, x));
            CHECK(ana.at(1, y, x) == ana.at(2, y, x));
        }

    Grid tall(3, 3, 2);
    CHECK_THROWS_AS((void)side_by_side(left, tall), error);
    CHECK_THROWS_AS((void)compose_output(left, tall, Layout::anaglyph), error);
}

TEST_CASE("composed fixtures match frozen golden bytes") {
    Grid left(3, 1, 2), right(3, 1, 2);
    // left: pure red, pure green; right: pure blue, white
    left.at(0, 0, 0) = 1.0;
    left.at(1, 0, 1) = 1.0;
    right.at(2, 0, 0) = 1.0;
    for (int c = 0; c < 3; ++c) right.at(c, 0, 1) = 1.0;

    const std::string dir = tmp_dir();
    save_image(compose_output(left, right, Layout::side_by_side), dir + "/sbs.ppm");
    const std::string sbs_expect = "P6\n4 1\n255\n";
    std::vector<uint8_t> sbs_golden(sbs_expect.begin(), sbs_expect.end());
    for (uint8_t v : {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255}) sbs_golden.push_back(v);
    CHECK(read_file(dir + "/sbs.ppm") == sbs_golden);

    save_image(compose_output(left, right, Layout::anaglyph), dir + "/ana.ppm");
    const std::string ana_expect = "P6\n2 1\n255\n";
    std::vector<uint8_t> ana_golden(ana_expect.begin(), ana_expect.end());
    for (uint8_t v : {76, 29, 29, 150, 255, 255}) ana_golden.push_back(v);
    CHECK(read_file(dir + "/ana.ppm") == ana_golden);
}
