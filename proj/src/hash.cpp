#include "seqprobe/hash.hpp"

#include <fstream>
#include <vector>

#include "seqprobe/errors.hpp"

namespace seqprobe {

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

uint64_t hash_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open file for hashing: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(buf.data(), static_cast<size_t>(is.gcount()), h);
    }
    return h;
}

}  // namespace seqprobe
