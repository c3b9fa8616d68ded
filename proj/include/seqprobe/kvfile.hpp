#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace seqprobe {

// Line-oriented key=value store with [section] headers. Insertion order is
// preserved so emitted files are byte-stable. Used for run configs, sidecar
// records and manifests.
class KvFile {
public:
    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    int64_t get_int(const std::string& section, const std::string& key) const;
    double get_real(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;

    // keys of one section, in file order
    std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;

    std::string serialize() const;
    static KvFile parse_text(const std::string& text, const std::string& origin = "<string>");
    static KvFile load(const std::string& path);
    void save(const std::string& path) const;

private:
    struct Entry {
        std::string section, key, value;
    };
    std::vector<Entry> entries_;

    const Entry* find(const std::string& section, const std::string& key) const;
};

}  // namespace seqprobe
