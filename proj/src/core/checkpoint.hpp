#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/unet.hpp"

namespace stereodiff {

// Tensor payloads are little-endian 32-bit floats in Eigen's column-major
// order.
struct NamedTensor {
    std::string name;
    std::vector<uint32_t> shape;
    std::vector<float> data;
};

// Flat binary container: 8-byte magic "SDFCKPT1", u32 version, the network
// config block, a shape table, then the concatenated float payloads in table
// order. Save/load roundtrips bit-exactly.
struct Checkpoint {
    UNetConfig config;
    int codec_factor = 2;
    bool trained = false;
    std::vector<NamedTensor> tensors;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace stereodiff
