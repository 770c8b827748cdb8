#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "core/errors.hpp"
#include "core/util.hpp"

namespace stereodiff {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'D', 'F', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    out.insert(out.end(), p, p + 4);
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    out.insert(out.end(), p, p + 8);
}

struct Cursor {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        check(pos + n <= buf.size(), "checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v;
        std::memcpy(&v, buf.data() + pos, 4);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

int as_int(uint32_t v, const char* what) {
    check(v <= uint32_t(1) << 30, std::string("checkpoint: implausible ") + what);
    return int(v);
}

} // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    check(c.config.widths.size() == 2, "checkpoint: config must carry two level widths");
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, kVersion);
    put_u32(out, uint32_t(c.config.latent_channels));
    put_u32(out, uint32_t(c.config.latent_size));
    put_u32(out, uint32_t(c.config.widths[0]));
    put_u32(out, uint32_t(c.config.widths[1]));
    put_u32(out, uint32_t(c.config.res_blocks));
    put_u32(out, uint32_t(c.config.heads));
    put_u32(out, uint32_t(c.config.vocab));
    put_u32(out, uint32_t(c.config.temb_dim));
    put_u32(out, uint32_t(c.config.cond_dim));
    put_u32(out, uint32_t(c.config.groups));
    put_u64(out, c.config.param_seed);
    put_u32(out, uint32_t(c.codec_factor));
    out.push_back(c.trained ? 1 : 0);
    put_u32(out, uint32_t(c.tensors.size()));
    for (const NamedTensor& t : c.tensors) {
        put_u32(out, uint32_t(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        put_u32(out, uint32_t(t.shape.size()));
        size_t numel = 1;
        for (uint32_t d : t.shape) {
            put_u32(out, d);
            numel *= d;
        }
        check(numel == t.data.size(), "checkpoint: tensor '" + t.name + "' shape/data mismatch");
    }
    for (const NamedTensor& t : c.tensors) {
        const auto* p = reinterpret_cast<const uint8_t*>(t.data.data());
        out.insert(out.end(), p, p + 4 * t.data.size());
    }
    write_file(path, out.data(), out.size());
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::vector<uint8_t> buf = read_file(path);
    Cursor cur{buf};
    check(cur.str(8) == std::string(kMagic, 8), "checkpoint: bad magic");
    check(cur.u32() == kVersion, "checkpoint: unsupported version");
    Checkpoint c;
    c.config.latent_channels = as_int(cur.u32(), "latent_channels");
    c.config.latent_size = as_int(cur.u32(), "latent_size");
    c.config.widths = {as_int(cur.u32(), "width"), as_int(cur.u32(), "width")};
    c.config.res_blocks = as_int(cur.u32(), "res_blocks");
    c.config.heads = as_int(cur.u32(), "heads");
    c.config.vocab = as_int(cur.u32(), "vocab");
    c.config.temb_dim = as_int(cur.u32(), "temb_dim");
    c.config.cond_dim = as_int(cur.u32(), "cond_dim");
    c.config.groups = as_int(cur.u32(), "groups");
    c.config.param_seed = cur.u64();
    c.codec_factor = as_int(cur.u32(), "codec_factor");
    c.trained = cur.u8() != 0;
    const uint32_t count = cur.u32();
    check(count <= 1u << 20, "checkpoint: implausible tensor count");
    c.tensors.resize(count);
    for (NamedTensor& t : c.tensors) {
        t.name = cur.str(as_int(cur.u32(), "name length"));
        const int ndim = as_int(cur.u32(), "rank");
        check(ndim >= 1 && ndim <= 4, "checkpoint: unsupported tensor rank");
        size_t numel = 1;
        t.shape.resize(ndim);
        for (uint32_t& d : t.shape) {
            d = cur.u32();
            numel *= as_int(d, "dimension");
        }
        check(numel <= 1u << 28, "checkpoint: implausible tensor size");
        t.data.resize(numel);
    }
    for (NamedTensor& t : c.tensors) {
        cur.need(4 * t.data.size());
        std::memcpy(t.data.data(), buf.data() + cur.pos, 4 * t.data.size());
        cur.pos += 4 * t.data.size();
    }
    check(cur.pos == buf.size(), "checkpoint: trailing bytes");
    return c;
}

} // namespace stereodiff
