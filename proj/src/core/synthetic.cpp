#include "core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "core/errors.hpp"
#include "core/image_io.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace stereodiff {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMargin = 2;
constexpr int kPlacementAttempts = 60;

constexpr double kPalette[8][3] = {
    {0.85, 0.20, 0.20}, {0.20, 0.70, 0.25}, {0.20, 0.35, 0.85}, {0.90, 0.75, 0.20},
    {0.70, 0.25, 0.80}, {0.15, 0.75, 0.75}, {0.90, 0.50, 0.15}, {0.35, 0.20, 0.60},
};

enum class ShapeType { rect, circle, triangle };

struct Shape {
    ShapeType type = ShapeType::rect;
    double color[3] = {0, 0, 0};
    double d_norm = 0.0;
    int delta = 0;
    // inclusive bbox in the left view
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool member(int x, int y) const {
        if (x < x0 || x > x1 || y < y0 || y > y1) return false;
        switch (type) {
            case ShapeType::rect:
                return true;
            case ShapeType::circle: {
                const int r = (x1 - x0) / 2;
                const int cx = x0 + r, cy = y0 + r;
                return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
            }
            case ShapeType::triangle: {
                // apex centered on the top row, full base on the bottom row
                const int w = x1 - x0 + 1, h = y1 - y0 + 1;
                return std::abs(2 * (x - x0) - (w - 1)) * (h - 1) <= 2 * (y - y0) * (w - 1);
            }
        }
        return false;
    }
};

bool boxes_clear(const Shape& a, const Shape& b, int gap) {
    return a.x1 + gap < b.x0 || b.x1 + gap < a.x0 || a.y1 + gap < b.y0 || b.y1 + gap < a.y0;
}

int rand_int(Rng& rng, int lo, int hi) {  // inclusive range
    int v = lo + int(rng.uniform() * double(hi - lo + 1));
    return std::min(v, hi);
}

struct Background {
    double base[3];
    double amp_x, amp_y, amp_xy;
    int fx, fy, fx2, fy2;
    double phase_x[3], phase_y[3], phase_xy[3];

    double value(int c, int y, int x, int size) const {
        const double s = double(size);
        double v = base[c] + amp_x * std::sin(2.0 * kPi * (fx * x / s + phase_x[c])) +
                   amp_y * std::sin(2.0 * kPi * (fy * y / s + phase_y[c])) +
                   amp_xy * std::sin(2.0 * kPi * ((fx2 * x + fy2 * y) / s + phase_xy[c]));
        return std::min(0.95, std::max(0.05, v));
    }
};

Background draw_background(Rng& rng) {
    Background bg;
    for (int c = 0; c < 3; ++c) bg.base[c] = 0.35 + 0.3 * rng.uniform();
    bg.amp_x = 0.12 + 0.08 * rng.uniform();
    bg.amp_y = 0.04 + 0.04 * rng.uniform();
    bg.amp_xy = 0.04 + 0.04 * rng.uniform();
    bg.fx = rand_int(rng, 2, 4);
    bg.fy = rand_int(rng, 1, 2);
    bg.fx2 = rand_int(rng, 1, 3);
    bg.fy2 = rand_int(rng, 1, 3);
    for (int c = 0; c < 3; ++c) bg.phase_x[c] = rng.uniform();
    for (int c = 0; c < 3; ++c) bg.phase_y[c] = rng.uniform();
    for (int c = 0; c < 3; ++c) bg.phase_xy[c] = rng.uniform();
    return bg;
}

} // namespace

SceneRecord generate_synthetic_scene(const SyntheticWorldSpec& spec, uint64_t seed,
                                     const std::string& id_prefix) {
    const int S = spec.image_size;
    check(S >= 16, "scene size too small");
    check(spec.channels == 3, "synthetic scenes are RGB");
    check(spec.min_shapes >= 0 && spec.max_shapes >= spec.min_shapes, "bad shape count range");
    check(spec.s_image >= 0.0, "negative disparity scale");
    check(spec.z_near > 0.0 && spec.z_far > spec.z_near, "bad depth range");

    Rng rng(seed);
    const Background bg = draw_background(rng);
    const int n_wanted = rand_int(rng, spec.min_shapes, spec.max_shapes);

    // One normalized-inverse-depth slot per shape between z_far (0) and z_near
    // (1), jittered within the slot, ascending = far to near. Slots never
    // touch 0, so every shape sits strictly in front of the background.
    std::vector<double> slots(n_wanted);
    for (int k = 0; k < n_wanted; ++k)
        slots[k] = (k + 0.3 + 0.65 * rng.uniform()) / std::max(1, n_wanted);

    std::vector<Shape> shapes;
    for (int k = 0; k < n_wanted; ++k) {
        Shape sh;
        sh.d_norm = slots[k];
        sh.delta = int(std::lround(spec.s_image * sh.d_norm));
        sh.type = static_cast<ShapeType>(rand_int(rng, 0, 2));
        const int pal = rand_int(rng, 0, 7);
        for (int c = 0; c < 3; ++c) {
            const double jitter = 0.04 * (2.0 * rng.uniform() - 1.0);
            sh.color[c] = std::min(0.95, std::max(0.05, kPalette[pal][c] + jitter));
        }
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            int bw, bh;
            switch (sh.type) {
                case ShapeType::rect:
                    bw = rand_int(rng, 10, 20);
                    bh = rand_int(rng, 10, 20);
                    break;
                case ShapeType::circle: {
                    const int r = rand_int(rng, 5, 9);
                    bw = bh = 2 * r + 1;
                    break;
                }
                case ShapeType::triangle:
                    bw = rand_int(rng, 11, 21);
                    bh = rand_int(rng, 9, 15);
                    break;
            }
            const int x_max = S - 1 - kMargin - sh.delta - (bw - 1);
            const int y_max = S - 1 - kMargin - (bh - 1);
            if (x_max < kMargin || y_max < kMargin) continue;
            sh.x0 = rand_int(rng, kMargin, x_max);
            sh.y0 = rand_int(rng, kMargin, y_max);
            sh.x1 = sh.x0 + bw - 1;
            sh.y1 = sh.y0 + bh - 1;
            placed = true;
            for (const Shape& other : shapes)
                if (!boxes_clear(sh, other, 2)) {
                    placed = false;
                    break;
                }
        }
        if (placed) shapes.push_back(sh);
    }

    SceneRecord rec;
    rec.class_token = int(shapes.size());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_c%d", id_prefix.c_str(), rec.class_token);
    rec.id = buf;
    rec.s_image = spec.s_image;
    rec.left = Grid(spec.channels, S, S);
    rec.right = Grid(spec.channels, S, S);
    rec.disparity = DisparityField(S, S, DisparitySpace::image);

    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = bg.value(c, y, x, S);
                rec.left.at(c, y, x) = v;
                rec.right.at(c, y, x) = v;
            }

    // painter's order: shapes are already sorted far to near
    for (const Shape& sh : shapes)
        for (int y = sh.y0; y <= sh.y1; ++y)
            for (int x = sh.x0; x <= sh.x1; ++x) {
                if (!sh.member(x, y)) continue;
                for (int c = 0; c < 3; ++c) {
                    rec.left.at(c, y, x) = sh.color[c];
                    rec.right.at(c, y, x + sh.delta) = sh.color[c];
                }
                rec.disparity.at(y, x) = sh.d_norm;
            }
    return rec;
}

void write_corpus(const std::string& dir, int n_scenes, uint64_t seed,
                  const SyntheticWorldSpec& spec) {
    check(n_scenes >= 1, "corpus needs at least one scene");
    std::filesystem::create_directories(dir);
    std::string manifest;
    char line[256];
    std::snprintf(line, sizeof(line), "# image_size=%d s_image=%g channels=%d seed=%llu\n",
                  spec.image_size, spec.s_image, spec.channels,
                  static_cast<unsigned long long>(seed));
    manifest += line;
    for (int i = 0; i < n_scenes; ++i) {
        char prefix[32];
        std::snprintf(prefix, sizeof(prefix), "scene%03d", i);
        SceneRecord rec = generate_synthetic_scene(spec, seed + uint64_t(i), prefix);
        const std::string left = rec.id + "_left.png";
        const std::string right = rec.id + "_right.png";
        const std::string disp = rec.id + "_disp.pfm";
        save_image(rec.left, dir + "/" + left);
        save_image(rec.right, dir + "/" + right);
        save_disparity_pfm(rec.disparity, dir + "/" + disp);
        manifest += rec.id + "," + left + "," + right + "," + disp + "\n";
    }
    write_file(dir + "/corpus.txt", manifest.data(), manifest.size());
}

Corpus read_manifest(const std::string& path) {
    std::string manifest_path = path;
    if (std::filesystem::is_directory(path)) manifest_path = path + "/corpus.txt";
    const auto bytes = read_file(manifest_path);
    Corpus corpus;
    corpus.dir = std::filesystem::path(manifest_path).parent_path().string();
    if (corpus.dir.empty()) corpus.dir = ".";
    const std::string text(bytes.begin(), bytes.end());
    for (const std::string& raw : split(text, '\n')) {
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s[0] == '#') {
            for (const std::string& tok : split(s.substr(1), ' ')) {
                const auto kv = split(trim(tok), '=');
                if (kv.size() != 2) continue;
                if (kv[0] == "image_size") corpus.meta.image_size = std::stoi(kv[1]);
                if (kv[0] == "s_image") corpus.meta.s_image = std::stod(kv[1]);
                if (kv[0] == "channels") corpus.meta.channels = std::stoi(kv[1]);
                if (kv[0] == "seed") corpus.meta.seed = std::stoull(kv[1]);
            }
            continue;
        }
        const auto fields = split(s, ',');
        check(fields.size() == 4, "malformed manifest line: " + s);
        CorpusEntry e;
        e.id = trim(fields[0]);
        e.left = trim(fields[1]);
        e.right = trim(fields[2]);
        e.disp = trim(fields[3]);
        check(!e.id.empty() && !e.left.empty() && !e.disp.empty(),
              "manifest line missing required fields: " + s);
        corpus.entries.push_back(e);
    }
    check(!corpus.entries.empty(), "manifest has no scenes: " + manifest_path);
    return corpus;
}

int class_token_from_id(const std::string& id) {
    const auto pos = id.rfind("_c");
    if (pos == std::string::npos || pos + 2 >= id.size()) return 0;
    int v = 0;
    for (size_t i = pos + 2; i < id.size(); ++i) {
        if (id[i] < '0' || id[i] > '9') return 0;
        v = v * 10 + (id[i] - '0');
    }
    return v;
}

SceneRecord load_scene(const Corpus& corpus, const CorpusEntry& entry, int working_size) {
    SceneRecord rec;
    rec.id = entry.id;
    rec.class_token = class_token_from_id(entry.id);
    rec.s_image = corpus.meta.s_image;
    rec.left = load_image(corpus.dir + "/" + entry.left);
    if (!entry.right.empty() && entry.right != "-")
        rec.right = load_image(corpus.dir + "/" + entry.right);
    rec.disparity = load_disparity(corpus.dir + "/" + entry.disp);
    check(rec.disparity.height == rec.left.height && rec.disparity.width == rec.left.width,
          "disparity resolution does not match the left image: " + entry.id);
    if (working_size > 0 &&
        (rec.left.height != working_size || rec.left.width != working_size)) {
        rec.left = fit_to_working(rec.left, working_size);
        if (!rec.right.v.empty()) rec.right = fit_to_working(rec.right, working_size);
        rec.disparity = fit_disparity_to_working(rec.disparity, working_size);
    }
    rec.disparity = ensure_normalized(rec.disparity);
    return rec;
}

} // namespace stereodiff
