#include "seqprobe/evalreport.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace seqprobe {

using ojson = nlohmann::ordered_json;

int64_t count_correct(const std::vector<int>& preds, const std::vector<int>& golds) {
    if (preds.size() != golds.size())
        throw InputError("accuracy: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(golds.size()) + " golds");
    int64_t correct = 0;
    for (size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == golds[i]) correct += 1;
    return correct;
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& golds) {
    if (preds.empty()) throw InputError("accuracy over an empty prediction set");
    return static_cast<double>(count_correct(preds, golds)) / static_cast<double>(preds.size());
}

Majority majority_baseline(const std::map<std::string, int64_t>& histogram) {
    if (histogram.empty()) throw InputError("majority_baseline over an empty histogram");
    Majority out;
    for (const auto& [label, count] : histogram) {
        out.total += count;
        // std::map iterates keys in order, so > keeps the smallest label on ties
        if (count > out.count) {
            out.count = count;
            out.label = label;
        }
    }
    return out;
}

EvalResult make_eval(const std::string& dataset_id, const std::vector<int>& preds,
                     const std::vector<int>& golds, const LabelScheme& scheme) {
    EvalResult r;
    r.dataset_id = dataset_id;
    r.n = static_cast<int64_t>(golds.size());
    r.correct = count_correct(preds, golds);
    if (r.n > 0) {
        std::map<std::string, int64_t> hist;
        for (int g : golds) hist[scheme.labels()[g]] += 1;
        Majority m = majority_baseline(hist);
        r.majority_count = m.count;
        r.majority_label = m.label;
    }
    return r;
}

MatrixReport run_matrix(const std::vector<std::string>& encoder_ids,
                        const std::vector<MatrixDatasetSpec>& datasets,
                        const MatrixCellRunner& runner) {
    if (encoder_ids.empty()) throw InputError("run_matrix: no encoders");
    if (datasets.empty()) throw InputError("run_matrix: no datasets");

    MatrixReport report;
    report.encoder_ids = encoder_ids;
    for (const auto& ds : datasets) {
        if (ds.has_train) report.train_datasets.push_back(ds.id);
        for (const auto& split : ds.test_splits)
            report.test_ids.push_back(ds.id + "/" + split);
    }
    if (report.train_datasets.empty())
        throw InputError("run_matrix: no dataset declares a train split");
    if (report.test_ids.empty()) throw InputError("run_matrix: no dataset declares a test set");

    for (const auto& train : datasets) {
        if (!train.has_train) continue;
        for (const auto& test : datasets) {
            for (const auto& split : test.test_splits) {
                for (const auto& enc : encoder_ids) {
                    MatrixCell cell;
                    cell.train_dataset = train.id;
                    cell.test_id = test.id + "/" + split;
                    cell.encoder_id = enc;
                    if (train.scheme == test.scheme) {
                        cell.filled = true;
                        cell.result = runner(enc, train, test, split);
                    } else {
                        cell.filled = false;
                        cell.skip_reason = "scheme mismatch";
                    }
                    report.cells.push_back(std::move(cell));
                }
            }
        }
    }
    return report;
}

namespace {

bool beats_baseline(const EvalResult& r, const Majority& m) {
    // same subset, so n == m.total and comparing counts is exact
    return r.correct > m.count;
}

void recompute_daggers(BreakdownReport& report) {
    for (auto& row : report.rows) {
        bool all = !row.per_encoder.empty();
        for (const auto& r : row.per_encoder)
            if (!beats_baseline(r, row.majority)) all = false;
        row.all_beat_baseline = all;
    }
}

}  // namespace

BreakdownReport breakdown_by_attribute(const std::string& encoder_id,
                                       const std::vector<int>& preds,
                                       const std::vector<int>& golds,
                                       const std::vector<std::optional<std::string>>& attributes,
                                       const LabelScheme& scheme) {
    if (preds.size() != golds.size() || preds.size() != attributes.size())
        throw InputError("breakdown_by_attribute: input length mismatch");
    for (size_t i = 0; i < attributes.size(); ++i)
        if (!attributes[i])
            throw InputError("breakdown_by_attribute: example at row " + std::to_string(i) +
                             " has no attribute");

    std::map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < attributes.size(); ++i) groups[*attributes[i]].push_back(i);

    BreakdownReport report;
    report.encoder_ids = {encoder_id};
    for (const auto& [attr, rows] : groups) {
        std::vector<int> p, g;
        for (size_t i : rows) {
            p.push_back(preds[i]);
            g.push_back(golds[i]);
        }
        BreakdownRow row;
        row.attribute = attr;
        std::map<std::string, int64_t> hist;
        for (int gi : g) hist[scheme.labels()[gi]] += 1;
        row.majority = majority_baseline(hist);
        row.per_encoder.push_back(make_eval(attr, p, g, scheme));
        report.rows.push_back(std::move(row));
    }
    recompute_daggers(report);
    return report;
}

BreakdownReport merge_breakdowns(const BreakdownReport& a, const BreakdownReport& b) {
    if (a.rows.size() != b.rows.size())
        throw InputError("merge_breakdowns: attribute sets differ");
    BreakdownReport out = a;
    out.encoder_ids.insert(out.encoder_ids.end(), b.encoder_ids.begin(), b.encoder_ids.end());
    for (size_t i = 0; i < out.rows.size(); ++i) {
        if (out.rows[i].attribute != b.rows[i].attribute ||
            !(out.rows[i].majority == b.rows[i].majority))
            throw InputError("merge_breakdowns: attribute subsets differ at '" +
                             out.rows[i].attribute + "'");
        out.rows[i].per_encoder.insert(out.rows[i].per_encoder.end(),
                                       b.rows[i].per_encoder.begin(),
                                       b.rows[i].per_encoder.end());
    }
    recompute_daggers(out);
    return out;
}

PartitionReport partition_eval(const std::string& encoder_id, const std::vector<int>& preds,
                               const std::vector<int>& golds,
                               const std::vector<std::optional<TagMatch>>& flags,
                               const LabelScheme& scheme) {
    if (preds.size() != golds.size() || preds.size() != flags.size())
        throw InputError("partition_eval: input length mismatch");
    std::vector<int> ps, gs, pd, gd;
    for (size_t i = 0; i < flags.size(); ++i) {
        if (!flags[i])
            throw InputError("partition_eval: example at row " + std::to_string(i) +
                             " has no tag_match flag");
        if (*flags[i] == TagMatch::same) {
            ps.push_back(preds[i]);
            gs.push_back(golds[i]);
        } else {
            pd.push_back(preds[i]);
            gd.push_back(golds[i]);
        }
    }
    PartitionReport report;
    report.encoder_ids = {encoder_id};
    report.same.push_back(make_eval("same", ps, gs, scheme));
    report.different.push_back(make_eval("different", pd, gd, scheme));
    return report;
}

PartitionReport merge_partitions(const PartitionReport& a, const PartitionReport& b) {
    PartitionReport out = a;
    out.encoder_ids.insert(out.encoder_ids.end(), b.encoder_ids.begin(), b.encoder_ids.end());
    out.same.insert(out.same.end(), b.same.begin(), b.same.end());
    out.different.insert(out.different.end(), b.different.begin(), b.different.end());
    return out;
}

BucketTable length_buckets(const std::string& encoder_id, const std::vector<int>& preds,
                           const std::vector<int>& golds, const std::vector<int>& lengths,
                           const LabelScheme& scheme, int bucket_width, int max_edge) {
    if (preds.size() != golds.size() || preds.size() != lengths.size())
        throw InputError("length_buckets: input length mismatch");
    if (bucket_width < 1 || max_edge < bucket_width || max_edge % bucket_width != 0)
        throw ValidationError("length_buckets: max_edge must be a positive multiple of width");
    for (size_t i = 0; i < lengths.size(); ++i)
        if (lengths[i] < 1)
            throw InputError("length_buckets: non-positive length at row " + std::to_string(i));

    const int nb = max_edge / bucket_width;
    std::vector<std::vector<int>> bp(nb + 1), bg(nb + 1);
    for (size_t i = 0; i < lengths.size(); ++i) {
        const int b = lengths[i] < max_edge ? lengths[i] / bucket_width : nb;
        bp[b].push_back(preds[i]);
        bg[b].push_back(golds[i]);
    }

    BucketTable table;
    table.bucket_width = bucket_width;
    table.max_edge = max_edge;
    table.encoder_ids = {encoder_id};
    for (int b = 0; b <= nb; ++b) {
        BucketRow row;
        row.overflow = b == nb;
        row.lo = row.overflow ? max_edge : b * bucket_width;
        row.hi = row.overflow ? 0 : (b + 1) * bucket_width;
        row.count = static_cast<int64_t>(bg[b].size());
        std::string id = row.overflow
                             ? std::to_string(max_edge) + "+"
                             : std::to_string(row.lo) + "-" + std::to_string(row.hi);
        row.per_encoder.push_back(make_eval(id, bp[b], bg[b], scheme));
        table.rows.push_back(std::move(row));
    }
    return table;
}

BucketTable merge_buckets(const BucketTable& a, const BucketTable& b) {
    if (a.bucket_width != b.bucket_width || a.max_edge != b.max_edge ||
        a.rows.size() != b.rows.size())
        throw InputError("merge_buckets: bucket layouts differ");
    BucketTable out = a;
    out.encoder_ids.insert(out.encoder_ids.end(), b.encoder_ids.begin(), b.encoder_ids.end());
    for (size_t i = 0; i < out.rows.size(); ++i) {
        if (out.rows[i].count != b.rows[i].count)
            throw InputError("merge_buckets: bucket counts differ");
        out.rows[i].per_encoder.insert(out.rows[i].per_encoder.end(),
                                       b.rows[i].per_encoder.begin(),
                                       b.rows[i].per_encoder.end());
    }
    return out;
}

// ---- JSON serialization ----

namespace {

ojson eval_to_json(const EvalResult& r) {
    ojson j;
    j["dataset_id"] = r.dataset_id;
    j["n"] = r.n;
    j["correct"] = r.correct;
    j["majority_count"] = r.majority_count;
    j["majority_label"] = r.majority_label;
    return j;
}

EvalResult eval_from_json(const ojson& j) {
    EvalResult r;
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.n = j.at("n").get<int64_t>();
    r.correct = j.at("correct").get<int64_t>();
    r.majority_count = j.at("majority_count").get<int64_t>();
    r.majority_label = j.at("majority_label").get<std::string>();
    return r;
}

ojson majority_to_json(const Majority& m) {
    ojson j;
    j["count"] = m.count;
    j["total"] = m.total;
    j["label"] = m.label;
    return j;
}

Majority majority_from_json(const ojson& j) {
    Majority m;
    m.count = j.at("count").get<int64_t>();
    m.total = j.at("total").get<int64_t>();
    m.label = j.at("label").get<std::string>();
    return m;
}

}  // namespace

std::string report_to_json(const ReportDoc& doc) {
    ojson j;
    j["schema_version"] = doc.schema_version;
    ojson meta = ojson::object();
    for (const auto& [k, v] : doc.meta) meta[k] = v;
    j["meta"] = meta;
    if (!doc.stats.empty()) {
        ojson stats = ojson::object();
        for (const auto& [split, s] : doc.stats) {
            ojson sj;
            sj["count"] = s.count;
            ojson hist = ojson::object();
            for (const auto& [label, n] : s.label_histogram) hist[label] = n;
            sj["labels"] = hist;
            stats[split] = sj;
        }
        j["stats"] = stats;
    }
    if (!doc.evals.empty()) {
        ojson evals = ojson::array();
        for (const auto& e : doc.evals) evals.push_back(eval_to_json(e));
        j["evals"] = evals;
    }
    if (doc.matrix) {
        const auto& m = *doc.matrix;
        ojson mj;
        mj["encoders"] = m.encoder_ids;
        mj["trains"] = m.train_datasets;
        mj["tests"] = m.test_ids;
        ojson cells = ojson::array();
        for (const auto& c : m.cells) {
            ojson cj;
            cj["train"] = c.train_dataset;
            cj["test"] = c.test_id;
            cj["encoder"] = c.encoder_id;
            cj["filled"] = c.filled;
            if (c.filled) cj["result"] = eval_to_json(c.result);
            else cj["skip_reason"] = c.skip_reason;
            cells.push_back(cj);
        }
        mj["cells"] = cells;
        j["matrix"] = mj;
    }
    if (doc.breakdown) {
        const auto& b = *doc.breakdown;
        ojson bj;
        bj["encoders"] = b.encoder_ids;
        ojson rows = ojson::array();
        for (const auto& row : b.rows) {
            ojson rj;
            rj["attribute"] = row.attribute;
            rj["majority"] = majority_to_json(row.majority);
            ojson pe = ojson::array();
            for (const auto& e : row.per_encoder) pe.push_back(eval_to_json(e));
            rj["per_encoder"] = pe;
            rj["all_beat_baseline"] = row.all_beat_baseline;
            rows.push_back(rj);
        }
        bj["rows"] = rows;
        j["breakdown"] = bj;
    }
    if (doc.partitions) {
        const auto& p = *doc.partitions;
        ojson pj;
        pj["encoders"] = p.encoder_ids;
        ojson same = ojson::array(), diff = ojson::array();
        for (const auto& e : p.same) same.push_back(eval_to_json(e));
        for (const auto& e : p.different) diff.push_back(eval_to_json(e));
        pj["same"] = same;
        pj["different"] = diff;
        j["partitions"] = pj;
    }
    if (doc.buckets) {
        const auto& b = *doc.buckets;
        ojson bj;
        bj["bucket_width"] = b.bucket_width;
        bj["max_edge"] = b.max_edge;
        bj["encoders"] = b.encoder_ids;
        ojson rows = ojson::array();
        for (const auto& row : b.rows) {
            ojson rj;
            rj["lo"] = row.lo;
            rj["hi"] = row.hi;
            rj["overflow"] = row.overflow;
            rj["count"] = row.count;
            ojson pe = ojson::array();
            for (const auto& e : row.per_encoder) pe.push_back(eval_to_json(e));
            rj["per_encoder"] = pe;
            rows.push_back(rj);
        }
        bj["rows"] = rows;
        j["buckets"] = bj;
    }
    ojson ext = ojson::object();
    for (const auto& [k, v] : doc.external_baselines) ext[k] = v;
    j["external_baselines"] = ext;
    return j.dump(2) + "\n";
}

ReportDoc report_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const std::exception& e) {
        throw FormatError(std::string("cannot parse structured report: ") + e.what());
    }
    ReportDoc doc;
    doc.schema_version = j.at("schema_version").get<int>();
    for (const auto& [k, v] : j.at("meta").items())
        doc.meta.emplace_back(k, v.get<std::string>());
    if (j.contains("stats")) {
        for (const auto& [split, sj] : j.at("stats").items()) {
            SplitStats s;
            s.count = sj.at("count").get<int64_t>();
            for (const auto& [label, n] : sj.at("labels").items())
                s.label_histogram[label] = n.get<int64_t>();
            doc.stats.emplace_back(split, std::move(s));
        }
    }
    if (j.contains("evals"))
        for (const auto& e : j.at("evals")) doc.evals.push_back(eval_from_json(e));
    if (j.contains("matrix")) {
        const auto& mj = j.at("matrix");
        MatrixReport m;
        m.encoder_ids = mj.at("encoders").get<std::vector<std::string>>();
        m.train_datasets = mj.at("trains").get<std::vector<std::string>>();
        m.test_ids = mj.at("tests").get<std::vector<std::string>>();
        for (const auto& cj : mj.at("cells")) {
            MatrixCell c;
            c.train_dataset = cj.at("train").get<std::string>();
            c.test_id = cj.at("test").get<std::string>();
            c.encoder_id = cj.at("encoder").get<std::string>();
            c.filled = cj.at("filled").get<bool>();
            if (c.filled) c.result = eval_from_json(cj.at("result"));
            else c.skip_reason = cj.at("skip_reason").get<std::string>();
            m.cells.push_back(std::move(c));
        }
        doc.matrix = std::move(m);
    }
    if (j.contains("breakdown")) {
        const auto& bj = j.at("breakdown");
        BreakdownReport b;
        b.encoder_ids = bj.at("encoders").get<std::vector<std::string>>();
        for (const auto& rj : bj.at("rows")) {
            BreakdownRow row;
            row.attribute = rj.at("attribute").get<std::string>();
            row.majority = majority_from_json(rj.at("majority"));
            for (const auto& e : rj.at("per_encoder")) row.per_encoder.push_back(eval_from_json(e));
            row.all_beat_baseline = rj.at("all_beat_baseline").get<bool>();
            b.rows.push_back(std::move(row));
        }
        doc.breakdown = std::move(b);
    }
    if (j.contains("partitions")) {
        const auto& pj = j.at("partitions");
        PartitionReport p;
        p.encoder_ids = pj.at("encoders").get<std::vector<std::string>>();
        for (const auto& e : pj.at("same")) p.same.push_back(eval_from_json(e));
        for (const auto& e : pj.at("different")) p.different.push_back(eval_from_json(e));
        doc.partitions = std::move(p);
    }
    if (j.contains("buckets")) {
        const auto& bj = j.at("buckets");
        BucketTable b;
        b.bucket_width = bj.at("bucket_width").get<int>();
        b.max_edge = bj.at("max_edge").get<int>();
        b.encoder_ids = bj.at("encoders").get<std::vector<std::string>>();
        for (const auto& rj : bj.at("rows")) {
            BucketRow row;
            row.lo = rj.at("lo").get<int>();
            row.hi = rj.at("hi").get<int>();
            row.overflow = rj.at("overflow").get<bool>();
            row.count = rj.at("count").get<int64_t>();
            for (const auto& e : rj.at("per_encoder")) row.per_encoder.push_back(eval_from_json(e));
            b.rows.push_back(std::move(row));
        }
        doc.buckets = std::move(b);
    }
    if (j.contains("external_baselines"))
        for (const auto& [k, v] : j.at("external_baselines").items())
            doc.external_baselines.emplace_back(k, v.get<std::string>());
    return doc;
}

// ---- fixed-width text rendering ----

std::string percent_str(int64_t correct, int64_t total) {
    if (total <= 0) return "-";
    const int64_t permille = (2000 * correct + total) / (2 * total);  // half-up
    std::ostringstream os;
    os << permille / 10 << "." << permille % 10;
    return os.str();
}

namespace {

std::string pad(const std::string& s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string cell_pct(const EvalResult& r) {
    return r.defined() ? percent_str(r.correct, r.n) : "-";
}

void render_evals(std::ostringstream& os, const std::vector<EvalResult>& evals) {
    os << "== accuracy ==\n";
    size_t w = 10;
    for (const auto& e : evals) w = std::max(w, e.dataset_id.size() + 2);
    os << pad("dataset", w) << pad("n", 8) << pad("acc", 8) << pad("maj", 8) << "maj_label\n";
    for (const auto& e : evals) {
        os << pad(e.dataset_id, w) << pad(std::to_string(e.n), 8) << pad(cell_pct(e), 8)
           << pad(e.defined() ? percent_str(e.majority_count, e.n) : "-", 8)
           << e.majority_label << "\n";
    }
    os << "\n";
}

void render_matrix(std::ostringstream& os, const MatrixReport& m) {
    os << "== train/test matrix ==\n";
    auto cell_of = [&](const std::string& tr, const std::string& te,
                       const std::string& enc) -> const MatrixCell* {
        for (const auto& c : m.cells)
            if (c.train_dataset == tr && c.test_id == te && c.encoder_id == enc) return &c;
        return nullptr;
    };
    size_t wtrain = 8;
    for (const auto& t : m.train_datasets) wtrain = std::max(wtrain, t.size() + 2);
    size_t wcell = 6;
    for (const auto& e : m.encoder_ids) wcell = std::max(wcell, e.size() + 2);

    // header: test sets with their majority baselines where known
    os << pad("train \\ test", wtrain);
    for (const auto& te : m.test_ids) {
        std::string maj = "-";
        for (const auto& c : m.cells)
            if (c.test_id == te && c.filled) {
                maj = percent_str(c.result.majority_count, c.result.n);
                break;
            }
        os << "| " << pad(te + " (maj " + maj + ")", wcell * m.encoder_ids.size()) << " ";
    }
    os << "\n" << pad("", wtrain);
    for (size_t t = 0; t < m.test_ids.size(); ++t) {
        os << "| ";
        for (const auto& e : m.encoder_ids) os << pad(e, wcell);
        os << " ";
    }
    os << "\n";
    for (const auto& tr : m.train_datasets) {
        os << pad(tr, wtrain);
        for (const auto& te : m.test_ids) {
            os << "| ";
            for (const auto& enc : m.encoder_ids) {
                const MatrixCell* c = cell_of(tr, te, enc);
                os << pad(c && c->filled ? cell_pct(c->result) : "-", wcell);
            }
            os << " ";
        }
        os << "\n";
    }
    os << "(- marks cells skipped for scheme mismatch)\n\n";
}

void render_breakdown(std::ostringstream& os, const BreakdownReport& b) {
    os << "== breakdown by attribute ==\n";
    size_t wattr = 11;
    for (const auto& r : b.rows) wattr = std::max(wattr, r.attribute.size() + 2);
    size_t wcell = 7;
    for (const auto& e : b.encoder_ids) wcell = std::max(wcell, e.size() + 2);
    os << pad("attribute", wattr);
    for (const auto& e : b.encoder_ids) os << pad(e, wcell);
    os << pad("avg", wcell) << pad("MAJ", wcell) << "n\n";
    for (const auto& r : b.rows) {
        os << pad(r.attribute, wattr);
        double sum = 0.0;
        for (const auto& e : r.per_encoder) {
            os << pad(cell_pct(e), wcell);
            sum += e.accuracy();
        }
        std::ostringstream avg;
        avg << std::fixed << std::setprecision(1)
            << 100.0 * sum / static_cast<double>(r.per_encoder.size());
        os << pad(avg.str() + (r.all_beat_baseline ? "*" : ""), wcell)
           << pad(percent_str(r.majority.count, r.majority.total), wcell)
           << r.majority.total << "\n";
    }
    os << "(* marks attributes where every classifier beats the majority baseline)\n\n";
}

void render_partitions(std::ostringstream& os, const PartitionReport& p) {
    os << "== tag-match partition ==\n";
    size_t wcell = 7;
    for (const auto& e : p.encoder_ids) wcell = std::max(wcell, e.size() + 2);
    os << pad("partition", 14);
    for (const auto& e : p.encoder_ids) os << pad(e, wcell);
    os << "n\n";
    auto row = [&](const char* name, const std::vector<EvalResult>& evals) {
        os << pad(name, 14);
        for (const auto& e : evals) os << pad(cell_pct(e), wcell);
        os << (evals.empty() ? 0 : evals[0].n) << "\n";
    };
    row("same", p.same);
    row("different", p.different);
    os << "\n";
}

void render_buckets(std::ostringstream& os, const BucketTable& b) {
    os << "== context-length buckets ==\n";
    size_t wcell = 7;
    for (const auto& e : b.encoder_ids) wcell = std::max(wcell, e.size() + 2);
    os << pad("length", 10);
    for (const auto& e : b.encoder_ids) os << pad(e, wcell);
    os << "total\n";
    for (const auto& r : b.rows) {
        std::string range = r.overflow ? std::to_string(b.max_edge) + "+"
                                       : std::to_string(r.lo) + "-" + std::to_string(r.hi);
        os << pad(range, 10);
        for (const auto& e : r.per_encoder) os << pad(cell_pct(e), wcell);
        os << r.count << "\n";
    }
    os << "\n";
}

void render_stats(std::ostringstream& os,
                  const std::vector<std::pair<std::string, SplitStats>>& stats) {
    os << "== dataset stats ==\n";
    os << pad("split", 14) << pad("n", 8) << "labels\n";
    for (const auto& [split, s] : stats) {
        os << pad(split, 14) << pad(std::to_string(s.count), 8);
        bool first = true;
        for (const auto& [label, n] : s.label_histogram) {
            if (!first) os << "  ";
            os << label << ":" << n;
            first = false;
        }
        os << "\n";
    }
    os << "\n";
}

}  // namespace

std::string report_to_table_text(const ReportDoc& doc) {
    std::ostringstream os;
    os << "report (schema " << doc.schema_version << ")\n";
    for (const auto& [k, v] : doc.meta) os << "  " << k << " = " << v << "\n";
    os << "\n";
    if (!doc.stats.empty()) render_stats(os, doc.stats);
    if (!doc.evals.empty()) render_evals(os, doc.evals);
    if (doc.matrix) render_matrix(os, *doc.matrix);
    if (doc.breakdown) render_breakdown(os, *doc.breakdown);
    if (doc.partitions) render_partitions(os, *doc.partitions);
    if (doc.buckets) render_buckets(os, *doc.buckets);
    if (!doc.external_baselines.empty()) {
        os << "== external baselines (user-supplied) ==\n";
        for (const auto& [k, v] : doc.external_baselines) os << "  " << k << " = " << v << "\n";
    }
    return os.str();
}

void emit_report(const ReportDoc& doc, ReportFormat format, const std::string& path) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open report file for writing: " + path);
    os << (format == ReportFormat::structured ? report_to_json(doc)
                                              : report_to_table_text(doc));
    if (!os) throw IoError("write failure on report file: " + path);
}

bool operator==(const SplitStats& a, const SplitStats& b) {
    return a.count == b.count && a.label_histogram == b.label_histogram;
}

}  // namespace seqprobe
