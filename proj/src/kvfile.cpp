#include "seqprobe/kvfile.hpp"

#include <fstream>
#include <sstream>

#include "seqprobe/errors.hpp"

namespace seqprobe {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void KvFile::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& e : entries_)
        if (e.section == section && e.key == key) {
            e.value = value;
            return;
        }
    entries_.push_back({section, key, value});
}

const KvFile::Entry* KvFile::find(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

bool KvFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const std::string& KvFile::get(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ValidationError("missing config key [" + section + "] " + key);
    return e->value;
}

std::string KvFile::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

int64_t KvFile::get_int(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        size_t used = 0;
        int64_t out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ValidationError("config key [" + section + "] " + key + " = '" + v +
                              "' is not an integer");
    }
}

double KvFile::get_real(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ValidationError("config key [" + section + "] " + key + " = '" + v +
                              "' is not a number");
    }
}

bool KvFile::get_bool(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key [" + section + "] " + key + " = '" + v +
                          "' is not a boolean");
}

std::vector<std::pair<std::string, std::string>> KvFile::section(const std::string& name) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : entries_)
        if (e.section == name) out.emplace_back(e.key, e.value);
    return out;
}

std::string KvFile::serialize() const {
    std::ostringstream os;
    std::string current = "\x01";  // force the first section header
    for (const auto& e : entries_) {
        if (e.section != current) {
            if (current != "\x01") os << "\n";
            if (!e.section.empty()) os << "[" << e.section << "]\n";
            current = e.section;
        }
        os << e.key << " = " << e.value << "\n";
    }
    return os.str();
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
    KvFile kv;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw FormatError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw FormatError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv.entries_.push_back({section, key, value});
    }
    return kv;
}

KvFile KvFile::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_text(buf.str(), path);
}

void KvFile::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open file for writing: " + path);
    os << serialize();
    if (!os) throw IoError("write failure on file: " + path);
}

}  // namespace seqprobe
