#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqprobe/errors.hpp"

namespace seqprobe {

// Reserved indices shared by every vocabulary.
constexpr int kPad = 0;
constexpr int kUnk = 1;
constexpr int kBos = 2;
constexpr int kEos = 3;
constexpr int kNumReserved = 4;

class Vocabulary {
public:
    Vocabulary();

    int max_size = 75000;

    int size() const { return static_cast<int>(token_of_.size()); }
    const std::string& token_of(int id) const;
    int id_of(const std::string& token) const;  // UNK for unseen tokens
    bool contains(const std::string& token) const;

    void add(const std::string& token);  // appends; caller enforces max_size

    std::vector<int> encode(const std::vector<std::string>& tokens, bool add_boundaries) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::vector<std::string> token_of_;
    std::unordered_map<std::string, int> id_of_;
};

struct ParallelExample {
    std::vector<std::string> source_tokens;
    std::vector<std::string> target_tokens;
};

enum class SchemeKind { two_way, three_way };

// Closed label schemes; an example's label must be a member.
struct LabelScheme {
    SchemeKind kind = SchemeKind::two_way;

    const std::vector<std::string>& labels() const;
    int num_labels() const { return static_cast<int>(labels().size()); }
    int index_of(const std::string& label) const;  // -1 when not a member
    static LabelScheme parse(const std::string& name);
    std::string name() const;

    bool operator==(const LabelScheme& o) const { return kind == o.kind; }
};

enum class TagMatch { same, different };

struct NLIExample {
    std::vector<std::string> context;
    std::vector<std::string> hypothesis;
    int label = -1;  // index into the scheme's labels
    std::optional<std::string> attribute;
    std::optional<TagMatch> tag_match;
    std::optional<std::string> genre;
    std::string split;
};

struct SplitStats {
    int64_t count = 0;
    std::map<std::string, int64_t> label_histogram;
};

struct DatasetStats {
    std::map<std::string, SplitStats> splits;
    int64_t dropped_long = 0;  // pairs removed by the length filter
};

// Two aligned one-sentence-per-line files. With max_len set (training mode)
// drops pairs where either side exceeds max_len tokens; with nullopt keeps
// everything.
std::pair<std::vector<ParallelExample>, DatasetStats> load_parallel(
    const std::string& source_path, const std::string& target_path,
    std::optional<int> max_len);

// Frequency-ranked vocabulary over both convenience overloads; ties break by
// lexicographic token order. Reserves 4 slots for PAD/UNK/BOS/EOS.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, int max_size);

// Headered TSV: context, hypothesis, label, then optional attribute,
// tag_match, genre columns in any subset/order after the mandatory three.
std::pair<std::vector<NLIExample>, SplitStats> load_nli(const std::string& path,
                                                        const LabelScheme& scheme);

// A dataset directory: train.tsv / dev.tsv (optional) and test*.tsv test
// sets, all under one declared label scheme.
struct NLIDataset {
    std::string id;
    LabelScheme scheme;
    std::vector<NLIExample> train;
    std::vector<NLIExample> dev;
    std::vector<std::pair<std::string, std::vector<NLIExample>>> tests;  // split name -> rows
    DatasetStats stats;

    bool has_train() const { return !train.empty(); }
};

NLIDataset load_nli_dataset(const std::string& dir, const LabelScheme& scheme);

std::vector<std::string> split_whitespace(const std::string& line);

}  // namespace seqprobe
