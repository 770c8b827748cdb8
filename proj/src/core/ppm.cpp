#include "core/ppm.hpp"

#include <string>

#include "core/errors.hpp"

namespace stereodiff {

namespace {

bool is_space(uint8_t c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string next_token(const std::vector<uint8_t>& b, size_t& pos) {
    while (pos < b.size()) {
        if (is_space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    check(pos < b.size(), "pnm: truncated header");
    size_t start = pos;
    while (pos < b.size() && !is_space(b[pos])) ++pos;
    return std::string(b.begin() + start, b.begin() + pos);
}

} // namespace

PnmImage parse_pnm(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    PnmImage img;
    if (magic == "P6")
        img.channels = 3;
    else if (magic == "P5")
        img.channels = 1;
    else
        fail("pnm: bad magic '" + magic + "'");
    try {
        img.width = std::stoi(next_token(bytes, pos));
        img.height = std::stoi(next_token(bytes, pos));
        int maxval = std::stoi(next_token(bytes, pos));
        check(maxval == 255, "pnm: only maxval 255 supported");
    } catch (const error&) {
        throw;
    } catch (const std::exception&) {
        fail("pnm: malformed header numbers");
    }
    check(img.width > 0 && img.height > 0, "pnm: non-positive dimensions");
    check(pos < bytes.size() && is_space(bytes[pos]), "pnm: missing separator");
    ++pos;
    size_t count = size_t(img.width) * img.height * img.channels;
    check(bytes.size() - pos >= count, "pnm: truncated payload");
    img.data.assign(bytes.begin() + pos, bytes.begin() + pos + count);
    return img;
}

std::vector<uint8_t> write_pnm(const PnmImage& img) {
    check(img.channels == 1 || img.channels == 3, "pnm: channels must be 1 or 3");
    check(img.data.size() == size_t(img.width) * img.height * img.channels, "pnm: data size mismatch");
    std::string header = std::string(img.channels == 3 ? "P6" : "P5") + "\n" +
                         std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

} // namespace stereodiff
