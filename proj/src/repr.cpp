#include "seqprobe/repr.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace seqprobe {

ReprScheme parse_repr_scheme(const std::string& name) {
    if (name == "concat_last") return ReprScheme::concat_last;
    if (name == "maxpool") return ReprScheme::maxpool;
    throw ValidationError("unknown representation scheme '" + name +
                          "' (expected concat_last or maxpool)");
}

std::string repr_scheme_name(ReprScheme s) {
    return s == ReprScheme::concat_last ? "concat_last" : "maxpool";
}

Combiner parse_combiner(const std::string& name) {
    if (name == "concat") return Combiner::concat;
    if (name == "infersent") return Combiner::infersent;
    throw ValidationError("unknown combiner '" + name + "' (expected concat or infersent)");
}

std::string combiner_name(Combiner c) {
    return c == Combiner::concat ? "concat" : "infersent";
}

namespace {

constexpr char kMagic[5] = {'S', 'P', 'R', 'R', '1'};

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
        throw FormatError("truncated representation dump: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void save_rep_dump(const std::string& path, const RepDump& dump) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open representation dump for writing: " + path);
    os.write(kMagic, 5);
    const unsigned char tag = dump.scheme == ReprScheme::concat_last ? 0 : 1;
    os.write(reinterpret_cast<const char*>(&tag), 1);
    put_u32(os, static_cast<uint32_t>(dump.dim));
    put_u32(os, static_cast<uint32_t>(dump.rows.size()));
    for (const auto& row : dump.rows) {
        if (static_cast<int>(row.size()) != dump.dim)
            throw ShapeError("representation row has dim " + std::to_string(row.size()) +
                             ", dump header says " + std::to_string(dump.dim));
        for (float v : row) {
            uint32_t u;
            std::memcpy(&u, &v, 4);
            put_u32(os, u);
        }
    }
    if (!os) throw IoError("write failure on representation dump: " + path);
}

RepDump load_rep_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open representation dump: " + path);
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
        throw FormatError("not a SPRR1 representation dump: " + path);
    unsigned char tag;
    if (!is.read(reinterpret_cast<char*>(&tag), 1))
        throw FormatError("truncated representation dump: " + path);
    if (tag > 1) throw FormatError("unknown scheme tag in representation dump: " + path);
    RepDump dump;
    dump.scheme = tag == 0 ? ReprScheme::concat_last : ReprScheme::maxpool;
    dump.dim = static_cast<int>(get_u32(is, path));
    const uint32_t count = get_u32(is, path);
    dump.rows.resize(count);
    for (uint32_t i = 0; i < count; ++i) {
        auto& row = dump.rows[i];
        row.resize(dump.dim);
        for (int j = 0; j < dump.dim; ++j) {
            uint32_t u = get_u32(is, path);
            std::memcpy(&row[j], &u, 4);
        }
    }
    return dump;
}

void save_rep_index(const std::string& path, const std::vector<int64_t>& row_ids) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open index file for writing: " + path);
    for (int64_t id : row_ids) os << id << "\n";
    if (!os) throw IoError("write failure on index file: " + path);
}

std::vector<int64_t> load_rep_index(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open index file: " + path);
    std::vector<int64_t> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(std::stoll(line));
        } catch (const std::exception&) {
            throw FormatError("index file " + path + " line " + std::to_string(lineno) +
                              ": not an integer: '" + line + "'");
        }
    }
    return out;
}

}  // namespace seqprobe
