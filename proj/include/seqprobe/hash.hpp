#pragma once

#include <cstdint>
#include <string>

namespace seqprobe {

// FNV-1a 64-bit. Content hashes key every cache; timestamps are never used.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), h);
}

std::string hex64(uint64_t v);

// Hash of a file's bytes; throws IoError when unreadable.
uint64_t hash_file(const std::string& path);

}  // namespace seqprobe
