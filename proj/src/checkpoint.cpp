#include "seqprobe/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "seqprobe/errors.hpp"

namespace seqprobe {

namespace {

constexpr char kMagic[5] = {'S', 'P', 'R', 'B', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw FormatError("truncated checkpoint file: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}

float get_f32(std::istream& is, const std::string& path) {
    uint32_t u = get_u32(is, path);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const Param*>& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint file for writing: " + path);
    os.write(kMagic, 5);
    put_u32(os, static_cast<uint32_t>(params.size()));
    for (const Param* p : params) {
        put_u32(os, static_cast<uint32_t>(p->name.size()));
        os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put_u32(os, static_cast<uint32_t>(p->tensor.shape.size()));
        for (int d : p->tensor.shape) put_u32(os, static_cast<uint32_t>(d));
        for (float v : p->tensor.data) put_f32(os, v);
    }
    if (!os) throw IoError("write failure on checkpoint file: " + path);
}

std::vector<Param> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint file: " + path);
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
        throw FormatError("not a SPRB1 checkpoint: " + path);
    const uint32_t count = get_u32(is, path);
    std::vector<Param> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = get_u32(is, path);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw FormatError("truncated checkpoint file: " + path);
        const uint32_t rank = get_u32(is, path);
        Shape shape(rank);
        for (uint32_t r = 0; r < rank; ++r) shape[r] = static_cast<int>(get_u32(is, path));
        Param p(name, shape);
        for (auto& v : p.tensor.data) v = get_f32(is, path);
        out.push_back(std::move(p));
    }
    return out;
}

void load_checkpoint_into(const std::string& path, const std::vector<Param*>& params) {
    auto loaded = load_checkpoint(path);
    std::map<std::string, Param*> by_name;
    for (auto& p : loaded) by_name[p.name] = &p;
    for (Param* dst : params) {
        auto it = by_name.find(dst->name);
        if (it == by_name.end())
            throw CompatibilityError("checkpoint " + path + " is missing parameter '" +
                                     dst->name + "'");
        const Param& src = *it->second;
        if (src.tensor.shape != dst->tensor.shape)
            throw CompatibilityError("checkpoint parameter '" + dst->name + "' has shape " +
                                     shape_str(src.tensor.shape) + ", expected " +
                                     shape_str(dst->tensor.shape));
        dst->tensor.data = src.tensor.data;
        dst->tensor.clear_grad();
    }
}

}  // namespace seqprobe
