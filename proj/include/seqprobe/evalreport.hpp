#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqprobe/corpora.hpp"

namespace seqprobe {

// Accuracies are kept as exact integer pairs; reals are derived views.
struct EvalResult {
    std::string dataset_id;
    int64_t n = 0;
    int64_t correct = 0;
    int64_t majority_count = 0;
    std::string majority_label;

    double accuracy() const { return n ? static_cast<double>(correct) / n : 0.0; }
    double majority_baseline() const {
        return n ? static_cast<double>(majority_count) / n : 0.0;
    }
    bool defined() const { return n > 0; }

    bool operator==(const EvalResult&) const = default;
};

struct Majority {
    int64_t count = 0;
    int64_t total = 0;
    std::string label;

    double fraction() const { return total ? static_cast<double>(count) / total : 0.0; }
    bool operator==(const Majority&) const = default;
};

int64_t count_correct(const std::vector<int>& preds, const std::vector<int>& golds);
double accuracy(const std::vector<int>& preds, const std::vector<int>& golds);

// Highest count / total; ties break to the lexicographically smallest label.
Majority majority_baseline(const std::map<std::string, int64_t>& histogram);

// EvalResult over one prediction set; majority fields describe the gold
// histogram of exactly this set.
EvalResult make_eval(const std::string& dataset_id, const std::vector<int>& preds,
                     const std::vector<int>& golds, const LabelScheme& scheme);

// ---- cross train/test matrix ----

struct MatrixDatasetSpec {
    std::string id;
    LabelScheme scheme;
    bool has_train = false;
    std::vector<std::string> test_splits;
};

struct MatrixCell {
    std::string train_dataset;
    std::string test_id;  // dataset/split
    std::string encoder_id;
    bool filled = false;
    std::string skip_reason;
    EvalResult result;

    bool operator==(const MatrixCell&) const = default;
};

struct MatrixReport {
    std::vector<std::string> encoder_ids;
    std::vector<std::string> train_datasets;
    std::vector<std::string> test_ids;
    std::vector<MatrixCell> cells;

    bool operator==(const MatrixReport&) const = default;
};

// Runs (encoder, train dataset, test set) jobs through the supplied runner
// for every scheme-compatible pair; incompatible pairs are marked skipped
// with reason "scheme mismatch". Rows are the datasets that have a train
// split; columns are every declared test set.
using MatrixCellRunner = std::function<EvalResult(
    const std::string& encoder_id, const MatrixDatasetSpec& train,
    const MatrixDatasetSpec& test_dataset, const std::string& test_split)>;

MatrixReport run_matrix(const std::vector<std::string>& encoder_ids,
                        const std::vector<MatrixDatasetSpec>& datasets,
                        const MatrixCellRunner& runner);

// ---- per-attribute breakdown ----

struct BreakdownRow {
    std::string attribute;
    Majority majority;  // over the attribute's gold subset
    std::vector<EvalResult> per_encoder;
    bool all_beat_baseline = false;

    bool operator==(const BreakdownRow&) const = default;
};

struct BreakdownReport {
    std::vector<std::string> encoder_ids;
    std::vector<BreakdownRow> rows;

    bool operator==(const BreakdownReport&) const = default;
};

// Single-encoder breakdown; every example must carry an attribute.
BreakdownReport breakdown_by_attribute(const std::string& encoder_id,
                                       const std::vector<int>& preds,
                                       const std::vector<int>& golds,
                                       const std::vector<std::optional<std::string>>& attributes,
                                       const LabelScheme& scheme);

// Adds another encoder's columns; subsets must agree exactly.
BreakdownReport merge_breakdowns(const BreakdownReport& a, const BreakdownReport& b);

// ---- tag-match partition ----

struct PartitionReport {
    std::vector<std::string> encoder_ids;
    std::vector<EvalResult> same;       // per encoder
    std::vector<EvalResult> different;  // per encoder

    bool operator==(const PartitionReport&) const = default;
};

PartitionReport partition_eval(const std::string& encoder_id, const std::vector<int>& preds,
                               const std::vector<int>& golds,
                               const std::vector<std::optional<TagMatch>>& flags,
                               const LabelScheme& scheme);

PartitionReport merge_partitions(const PartitionReport& a, const PartitionReport& b);

// ---- context-length buckets ----

struct BucketRow {
    int lo = 0;
    int hi = 0;           // exclusive; ignored for the overflow row
    bool overflow = false;
    int64_t count = 0;
    std::vector<EvalResult> per_encoder;

    bool operator==(const BucketRow&) const = default;
};

struct BucketTable {
    int bucket_width = 10;
    int max_edge = 80;
    std::vector<std::string> encoder_ids;
    std::vector<BucketRow> rows;

    bool operator==(const BucketTable&) const = default;
};

// Buckets [0,w), [w,2w), ..., [max_edge-w, max_edge) plus an overflow bucket
// for lengths >= max_edge. Lower edge inclusive, upper exclusive.
BucketTable length_buckets(const std::string& encoder_id, const std::vector<int>& preds,
                           const std::vector<int>& golds, const std::vector<int>& lengths,
                           const LabelScheme& scheme, int bucket_width = 10, int max_edge = 80);

BucketTable merge_buckets(const BucketTable& a, const BucketTable& b);

// ---- report document ----

enum class ReportFormat { structured, table_text };

struct ReportDoc {
    int schema_version = 1;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::pair<std::string, SplitStats>> stats;
    std::vector<EvalResult> evals;
    std::optional<MatrixReport> matrix;
    std::optional<BreakdownReport> breakdown;
    std::optional<PartitionReport> partitions;
    std::optional<BucketTable> buckets;
    // prior-work numbers are user-supplied, never fabricated
    std::vector<std::pair<std::string, std::string>> external_baselines;

    bool operator==(const ReportDoc&) const = default;
};

std::string report_to_json(const ReportDoc& doc);
ReportDoc report_from_json(const std::string& text);
std::string report_to_table_text(const ReportDoc& doc);

void emit_report(const ReportDoc& doc, ReportFormat format, const std::string& path);

// "72.1" style one-decimal percentage from an exact integer pair.
std::string percent_str(int64_t correct, int64_t total);

bool operator==(const SplitStats& a, const SplitStats& b);

}  // namespace seqprobe
