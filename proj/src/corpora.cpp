#include "seqprobe/corpora.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace seqprobe {

namespace {

const std::vector<std::string> kTwoWayLabels = {"entailed", "not_entailed"};
const std::vector<std::string> kThreeWayLabels = {"entailment", "neutral", "contradiction"};
const char* kReserved[kNumReserved] = {"<pad>", "<unk>", "<s>", "</s>"};

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<std::string> split_whitespace(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

Vocabulary::Vocabulary() {
    for (const char* t : kReserved) add(t);
}

const std::string& Vocabulary::token_of(int id) const {
    if (id < 0 || id >= size())
        throw LabelError("vocabulary index " + std::to_string(id) + " out of range [0," +
                         std::to_string(size()) + ")");
    return token_of_[id];
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = id_of_.find(token);
    return it == id_of_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return id_of_.find(token) != id_of_.end();
}

void Vocabulary::add(const std::string& token) {
    if (id_of_.count(token)) return;
    id_of_[token] = static_cast<int>(token_of_.size());
    token_of_.push_back(token);
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens,
                                    bool add_boundaries) const {
    std::vector<int> out;
    out.reserve(tokens.size() + (add_boundaries ? 2 : 0));
    if (add_boundaries) out.push_back(kBos);
    for (const auto& t : tokens) out.push_back(id_of(t));
    if (add_boundaries) out.push_back(kEos);
    return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(token_of(id));
    return out;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open vocabulary file for writing: " + path);
    for (const auto& t : token_of_) os << t << "\n";
    if (!os) throw IoError("write failure on vocabulary file: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.size() < kNumReserved)
        throw FormatError("vocabulary file too short: " + path);
    for (int i = 0; i < kNumReserved; ++i)
        if (lines[i] != kReserved[i])
            throw FormatError("vocabulary file " + path + " lacks reserved token '" +
                              kReserved[i] + "' at line " + std::to_string(i + 1));
    Vocabulary v;
    for (size_t i = kNumReserved; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        v.add(lines[i]);
    }
    v.max_size = std::max(v.max_size, v.size());
    return v;
}

const std::vector<std::string>& LabelScheme::labels() const {
    return kind == SchemeKind::two_way ? kTwoWayLabels : kThreeWayLabels;
}

int LabelScheme::index_of(const std::string& label) const {
    const auto& ls = labels();
    for (size_t i = 0; i < ls.size(); ++i)
        if (ls[i] == label) return static_cast<int>(i);
    return -1;
}

LabelScheme LabelScheme::parse(const std::string& name) {
    if (name == "two_way") return {SchemeKind::two_way};
    if (name == "three_way") return {SchemeKind::three_way};
    throw ValidationError("unknown label scheme '" + name + "' (expected two_way or three_way)");
}

std::string LabelScheme::name() const {
    return kind == SchemeKind::two_way ? "two_way" : "three_way";
}

std::pair<std::vector<ParallelExample>, DatasetStats> load_parallel(
    const std::string& source_path, const std::string& target_path, std::optional<int> max_len) {
    auto src_lines = read_lines(source_path);
    auto tgt_lines = read_lines(target_path);
    if (src_lines.size() != tgt_lines.size())
        throw AlignmentError("parallel corpus line count mismatch: " + source_path + " has " +
                             std::to_string(src_lines.size()) + " lines, " + target_path +
                             " has " + std::to_string(tgt_lines.size()));
    std::vector<ParallelExample> out;
    DatasetStats stats;
    auto& split = stats.splits["parallel"];
    for (size_t i = 0; i < src_lines.size(); ++i) {
        ParallelExample ex;
        ex.source_tokens = split_whitespace(src_lines[i]);
        ex.target_tokens = split_whitespace(tgt_lines[i]);
        if (ex.source_tokens.empty())
            throw FormatError("empty source line " + std::to_string(i + 1) + " in " + source_path);
        if (ex.target_tokens.empty())
            throw FormatError("empty target line " + std::to_string(i + 1) + " in " + target_path);
        if (max_len && (static_cast<int>(ex.source_tokens.size()) > *max_len ||
                        static_cast<int>(ex.target_tokens.size()) > *max_len)) {
            stats.dropped_long += 1;
            continue;
        }
        out.push_back(std::move(ex));
    }
    split.count = static_cast<int64_t>(out.size());
    return {std::move(out), std::move(stats)};
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, int max_size) {
    if (max_size < kNumReserved + 1)
        throw ValidationError("vocabulary max_size must be at least " +
                              std::to_string(kNumReserved + 1));
    std::unordered_map<std::string, int64_t> freq;
    for (const auto& sent : sentences)
        for (const auto& tok : sent) freq[tok] += 1;
    std::vector<std::pair<std::string, int64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    v.max_size = max_size;
    for (const auto& [tok, n] : ranked) {
        if (v.size() >= max_size) break;
        v.add(tok);
    }
    return v;
}

std::pair<std::vector<NLIExample>, SplitStats> load_nli(const std::string& path,
                                                        const LabelScheme& scheme) {
    auto lines = read_lines(path);
    if (lines.empty()) throw FormatError("NLI file has no header row: " + path);

    auto header = split_tabs(lines[0]);
    std::map<std::string, int> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
    for (const char* mandatory : {"context", "hypothesis", "label"})
        if (!col.count(mandatory))
            throw FormatError("NLI file " + path + " is missing mandatory column '" + mandatory +
                              "'");

    const int ctx_col = col["context"], hyp_col = col["hypothesis"], lab_col = col["label"];
    const int attr_col = col.count("attribute") ? col["attribute"] : -1;
    const int tag_col = col.count("tag_match") ? col["tag_match"] : -1;
    const int genre_col = col.count("genre") ? col["genre"] : -1;

    std::vector<NLIExample> out;
    SplitStats stats;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_tabs(lines[i]);
        if (fields.size() < header.size())
            throw FormatError("NLI file " + path + " row " + std::to_string(i + 1) + " has " +
                              std::to_string(fields.size()) + " columns, header declares " +
                              std::to_string(header.size()));
        NLIExample ex;
        ex.context = split_whitespace(fields[ctx_col]);
        ex.hypothesis = split_whitespace(fields[hyp_col]);
        if (ex.context.empty() || ex.hypothesis.empty())
            throw FormatError("NLI file " + path + " row " + std::to_string(i + 1) +
                              " has an empty sentence");
        const std::string& label = fields[lab_col];
        ex.label = scheme.index_of(label);
        if (ex.label < 0)
            throw LabelError("NLI file " + path + " row " + std::to_string(i + 1) + ": label '" +
                             label + "' is not in the " + scheme.name() + " scheme");
        if (attr_col >= 0 && !fields[attr_col].empty()) ex.attribute = fields[attr_col];
        if (tag_col >= 0 && !fields[tag_col].empty()) {
            if (fields[tag_col] == "same") ex.tag_match = TagMatch::same;
            else if (fields[tag_col] == "different") ex.tag_match = TagMatch::different;
            else
                throw FormatError("NLI file " + path + " row " + std::to_string(i + 1) +
                                  ": tag_match must be 'same' or 'different', got '" +
                                  fields[tag_col] + "'");
        }
        if (genre_col >= 0 && !fields[genre_col].empty()) ex.genre = fields[genre_col];
        stats.count += 1;
        stats.label_histogram[label] += 1;
        out.push_back(std::move(ex));
    }
    return {std::move(out), std::move(stats)};
}

NLIDataset load_nli_dataset(const std::string& dir, const LabelScheme& scheme) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("NLI dataset directory not found: " + dir);
    NLIDataset ds;
    ds.id = fs::path(dir).filename().string();
    if (ds.id.empty()) ds.id = fs::path(dir).parent_path().filename().string();
    ds.scheme = scheme;

    auto load_split = [&](const std::string& file, const std::string& split_name,
                          std::vector<NLIExample>& into) {
        auto [rows, stats] = load_nli(file, scheme);
        for (auto& r : rows) r.split = split_name;
        into = std::move(rows);
        ds.stats.splits[split_name] = std::move(stats);
    };

    const std::string train_file = dir + "/train.tsv";
    const std::string dev_file = dir + "/dev.tsv";
    if (fs::exists(train_file)) load_split(train_file, "train", ds.train);
    if (fs::exists(dev_file)) load_split(dev_file, "dev", ds.dev);

    std::vector<std::string> test_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("test", 0) == 0 && name.size() >= 4 &&
            name.substr(name.size() - 4) == ".tsv")
            test_files.push_back(name);
    }
    std::sort(test_files.begin(), test_files.end());
    for (const auto& name : test_files) {
        std::string split_name = name.substr(0, name.size() - 4);
        std::vector<NLIExample> rows;
        load_split(dir + "/" + name, split_name, rows);
        ds.tests.emplace_back(split_name, std::move(rows));
    }
    if (ds.train.empty() && ds.tests.empty())
        throw InputError("NLI dataset directory " + dir +
                         " contains neither train.tsv nor any test*.tsv");
    return ds;
}

}  // namespace seqprobe
