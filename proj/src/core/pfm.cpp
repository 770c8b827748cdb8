#include "core/pfm.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "core/errors.hpp"

static_assert(std::endian::native == std::endian::little, "pfm writer assumes a little-endian host");

namespace stereodiff {

namespace {

bool is_space(uint8_t c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// reads one whitespace-delimited token, leaving pos at the single whitespace
// byte that terminated it
std::string next_token(const std::vector<uint8_t>& b, size_t& pos) {
    while (pos < b.size() && is_space(b[pos])) ++pos;
    check(pos < b.size(), "pfm: truncated header");
    size_t start = pos;
    while (pos < b.size() && !is_space(b[pos])) ++pos;
    return std::string(b.begin() + start, b.begin() + pos);
}

uint32_t swap32(uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

} // namespace

PfmImage parse_pfm(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    PfmImage img;
    if (magic == "Pf")
        img.channels = 1;
    else if (magic == "PF")
        img.channels = 3;
    else
        fail("pfm: bad magic '" + magic + "'");

    int w = 0, h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(next_token(bytes, pos));
        h = std::stoi(next_token(bytes, pos));
        scale = std::stod(next_token(bytes, pos));
    } catch (const std::exception&) {
        fail("pfm: malformed header numbers");
    }
    check(w > 0 && h > 0, "pfm: non-positive dimensions");
    check(scale != 0.0, "pfm: zero scale");
    check(pos < bytes.size() && is_space(bytes[pos]), "pfm: missing separator after scale");
    ++pos;  // exactly one whitespace byte before the payload

    img.width = w;
    img.height = h;
    const size_t count = size_t(w) * h * img.channels;
    check(bytes.size() - pos == count * 4, bytes.size() - pos < count * 4
                                               ? "pfm: truncated payload"
                                               : "pfm: trailing bytes after payload");

    const bool file_little = scale < 0.0;
    const float multiplier = float(std::fabs(scale));
    img.data.resize(count);
    // rows are stored bottom-to-top
    for (int y = 0; y < h; ++y) {
        const uint8_t* src = bytes.data() + pos + size_t(h - 1 - y) * w * img.channels * 4;
        float* dst = img.data.data() + size_t(y) * w * img.channels;
        for (size_t i = 0; i < size_t(w) * img.channels; ++i) {
            uint32_t raw;
            std::memcpy(&raw, src + i * 4, 4);
            if (!file_little) raw = swap32(raw);
            float v;
            std::memcpy(&v, &raw, 4);
            dst[i] = multiplier == 1.0f ? v : v * multiplier;
        }
    }
    return img;
}

std::vector<uint8_t> write_pfm(const PfmImage& img) {
    check(img.channels == 1 || img.channels == 3, "pfm: channels must be 1 or 3");
    check(img.width > 0 && img.height > 0, "pfm: empty image");
    check(img.data.size() == size_t(img.width) * img.height * img.channels, "pfm: data size mismatch");
    std::string header = std::string(img.channels == 1 ? "Pf" : "PF") + "\n" +
                         std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    size_t payload_at = out.size();
    out.resize(out.size() + img.data.size() * 4);
    for (int y = 0; y < img.height; ++y) {
        const float* src = img.data.data() + size_t(img.height - 1 - y) * img.width * img.channels;
        uint8_t* dst = out.data() + payload_at + size_t(y) * img.width * img.channels * 4;
        std::memcpy(dst, src, size_t(img.width) * img.channels * 4);
    }
    return out;
}

} // namespace stereodiff
