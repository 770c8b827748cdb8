#include "core/png_codec.hpp"

#include <zlib.h>

#include <cstring>
#include <string>

#include "core/errors.hpp"

namespace stereodiff {

namespace {

const uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

std::vector<uint8_t> zlib_inflate(const std::vector<uint8_t>& in, size_t expected) {
    std::vector<uint8_t> out(expected);
    uLongf dst_len = uLongf(expected);
    int rc = uncompress(out.data(), &dst_len, in.data(), uLong(in.size()));
    check(rc == Z_OK && dst_len == expected, "png: bad compressed stream");
    return out;
}

std::vector<uint8_t> zlib_deflate(const std::vector<uint8_t>& in) {
    uLongf dst_len = compressBound(uLong(in.size()));
    std::vector<uint8_t> out(dst_len);
    int rc = compress2(out.data(), &dst_len, in.data(), uLong(in.size()), 6);
    check(rc == Z_OK, "png: deflate failed");
    out.resize(dst_len);
    return out;
}

void append_chunk(std::vector<uint8_t>& out, const char* type, const std::vector<uint8_t>& payload) {
    put_be32(out, uint32_t(payload.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uLong crc = crc32(0, out.data() + crc_start, uInt(out.size() - crc_start));
    put_be32(out, uint32_t(crc));
}

} // namespace

PngImage decode_png(const std::vector<uint8_t>& bytes) {
    check(bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0, "png: bad signature");

    PngImage img;
    std::vector<uint8_t> idat;
    bool have_ihdr = false, have_iend = false;
    size_t pos = 8;
    while (pos < bytes.size()) {
        check(bytes.size() - pos >= 12, "png: truncated chunk");
        uint32_t len = be32(&bytes[pos]);
        check(bytes.size() - pos >= 12 + size_t(len), "png: truncated chunk payload");
        const uint8_t* type = &bytes[pos + 4];
        const uint8_t* payload = &bytes[pos + 8];
        uLong crc = crc32(0, type, uInt(4 + len));
        check(uint32_t(crc) == be32(payload + len), "png: chunk crc mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            check(len == 13, "png: bad IHDR length");
            img.width = int(be32(payload));
            img.height = int(be32(payload + 4));
            img.bit_depth = payload[8];
            int color_type = payload[9];
            check(img.width > 0 && img.height > 0, "png: zero dimensions");
            check(img.bit_depth == 8 || img.bit_depth == 16, "png: unsupported bit depth");
            check(color_type == 0 || color_type == 2, "png: unsupported color type");
            img.channels = color_type == 0 ? 1 : 3;
            check(payload[10] == 0 && payload[11] == 0, "png: unsupported compression/filter method");
            check(payload[12] == 0, "png: interlaced images unsupported");
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            check(have_ihdr, "png: IDAT before IHDR");
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            have_iend = true;
            break;
        }
        // ancillary chunks are skipped
        pos += 12 + len;
    }
    check(have_ihdr && have_iend && !idat.empty(), "png: missing required chunks");

    const int bytes_per_sample = img.bit_depth / 8;
    const size_t bpp = size_t(img.channels) * bytes_per_sample;
    const size_t stride = size_t(img.width) * bpp;
    std::vector<uint8_t> raw = zlib_inflate(idat, (stride + 1) * img.height);

    std::vector<uint8_t> cur(stride), prev(stride, 0);
    img.data.resize(size_t(img.width) * img.height * img.channels);
    for (int y = 0; y < img.height; ++y) {
        const uint8_t* line = raw.data() + size_t(y) * (stride + 1);
        uint8_t filter = line[0];
        const uint8_t* src = line + 1;
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= bpp ? cur[i - bpp] : 0;
            int b = prev[i];
            int c = i >= bpp ? prev[i - bpp] : 0;
            int x = src[i];
            switch (filter) {
                case 0: cur[i] = uint8_t(x); break;
                case 1: cur[i] = uint8_t(x + a); break;
                case 2: cur[i] = uint8_t(x + b); break;
                case 3: cur[i] = uint8_t(x + (a + b) / 2); break;
                case 4: cur[i] = uint8_t(x + paeth(a, b, c)); break;
                default: fail("png: unknown filter type " + std::to_string(filter));
            }
        }
        uint16_t* dst = img.data.data() + size_t(y) * img.width * img.channels;
        if (img.bit_depth == 8) {
            for (size_t i = 0; i < stride; ++i) dst[i] = cur[i];
        } else {
            for (size_t i = 0; i < stride / 2; ++i)
                dst[i] = uint16_t((uint16_t(cur[2 * i]) << 8) | cur[2 * i + 1]);
        }
        std::swap(cur, prev);
    }
    return img;
}

std::vector<uint8_t> encode_png(const PngImage& img) {
    check(img.width > 0 && img.height > 0, "png: empty image");
    check(img.channels == 1 || img.channels == 3, "png: channels must be 1 or 3");
    check(img.bit_depth == 8 || img.bit_depth == 16, "png: bit depth must be 8 or 16");
    check(img.data.size() == size_t(img.width) * img.height * img.channels, "png: data size mismatch");

    const int bytes_per_sample = img.bit_depth / 8;
    const size_t stride = size_t(img.width) * img.channels * bytes_per_sample;
    std::vector<uint8_t> raw((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        uint8_t* line = raw.data() + size_t(y) * (stride + 1);
        line[0] = 0;  // filter none
        const uint16_t* src = img.data.data() + size_t(y) * img.width * img.channels;
        if (img.bit_depth == 8) {
            for (size_t i = 0; i < stride; ++i) line[1 + i] = uint8_t(src[i]);
        } else {
            for (size_t i = 0; i < stride / 2; ++i) {
                line[1 + 2 * i] = uint8_t(src[i] >> 8);
                line[2 + 2 * i] = uint8_t(src[i]);
            }
        }
    }

    std::vector<uint8_t> out(kSig, kSig + 8);
    std::vector<uint8_t> ihdr;
    put_be32(ihdr, uint32_t(img.width));
    put_be32(ihdr, uint32_t(img.height));
    ihdr.push_back(uint8_t(img.bit_depth));
    ihdr.push_back(img.channels == 1 ? 0 : 2);
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_deflate(raw));
    append_chunk(out, "IEND", {});
    return out;
}

} // namespace stereodiff
