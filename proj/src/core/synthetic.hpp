#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/disparity.hpp"
#include "core/grid.hpp"

namespace stereodiff {

// Layered world: a low-frequency textured background at zero disparity plus a
// few flat-colored shapes at distinct normalized inverse depths. The right
// view is re-rendered (not warped), so disoccluded background is real content
// that the left image never shows.
struct SyntheticWorldSpec {
    int image_size = 64;
    int channels = 3;
    int min_shapes = 1;
    int max_shapes = 3;
    double z_near = 2.0;   // nearest allowed shape depth
    double z_far = 10.0;   // background depth; disparity normalizes against it
    double s_image = 6.0;  // disparity-to-pixel scale used for the right view
};

struct SceneRecord {
    std::string id;
    Grid left;
    Grid right;
    DisparityField disparity;  // image-space, normalized, dense valid
    int class_token = 0;       // number of shapes actually placed
    double s_image = 0.0;
};

SceneRecord generate_synthetic_scene(const SyntheticWorldSpec& spec, uint64_t seed,
                                     const std::string& id_prefix = "scene");

struct CorpusEntry {
    std::string id;
    std::string left;
    std::string right;
    std::string disp;
};

struct CorpusMeta {
    int image_size = 0;
    double s_image = 0.0;
    int channels = 0;
    uint64_t seed = 0;
};

struct Corpus {
    std::string dir;
    CorpusMeta meta;
    std::vector<CorpusEntry> entries;
};

// Writes <id>_left.png / <id>_right.png / <id>_disp.pfm per scene plus a
// manifest `corpus.txt` whose comment header carries the corpus metadata and
// whose data lines are `id,left,right,disp`.
void write_corpus(const std::string& dir, int n_scenes, uint64_t seed,
                  const SyntheticWorldSpec& spec);

// Accepts the manifest path or its directory.
Corpus read_manifest(const std::string& path);

// Trailing "_c<k>" of a scene id; 0 when absent.
int class_token_from_id(const std::string& id);

// Loads one corpus entry, normalizing disparity if needed and downscaling to
// working_size when positive.
SceneRecord load_scene(const Corpus& corpus, const CorpusEntry& entry,
                       int working_size = 0);

} // namespace stereodiff
