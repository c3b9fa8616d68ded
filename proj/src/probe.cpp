#include "seqprobe/probe.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "seqprobe/checkpoint.hpp"
#include "seqprobe/kvfile.hpp"
#include "seqprobe/optim.hpp"

namespace seqprobe {

ProbeKind parse_probe_kind(const std::string& name) {
    if (name == "linear") return ProbeKind::linear;
    if (name == "mlp") return ProbeKind::mlp;
    throw ValidationError("unknown probe kind '" + name + "' (expected linear or mlp)");
}

std::string probe_kind_name(ProbeKind k) {
    return k == ProbeKind::linear ? "linear" : "mlp";
}

namespace {

Graph::Var batch_leaf(Graph& g, const FeatureMatrix& features, const std::vector<int>& rows,
                      int dim) {
    std::vector<float> data;
    data.reserve(rows.size() * static_cast<size_t>(dim));
    for (int r : rows) {
        const auto& f = features[r];
        if (static_cast<int>(f.size()) != dim)
            throw ShapeError("feature row has dim " + std::to_string(f.size()) + ", expected " +
                             std::to_string(dim));
        data.insert(data.end(), f.begin(), f.end());
    }
    return g.constant({static_cast<int>(rows.size()), dim}, std::move(data));
}

std::vector<Param> snapshot_params(ProbeModel& model) {
    std::vector<Param> out;
    for (Param* p : model.params()) {
        Param copy(p->name, p->tensor.shape);
        copy.tensor.data = p->tensor.data;
        out.push_back(std::move(copy));
    }
    return out;
}

void restore_params(ProbeModel& model, const std::vector<Param>& saved) {
    auto params = model.params();
    for (size_t i = 0; i < params.size(); ++i) {
        params[i]->tensor.data = saved[i].tensor.data;
        params[i]->tensor.clear_grad();
    }
}

}  // namespace

ProbeModel train_probe(const FeatureMatrix& features, const std::vector<int>& labels,
                       const FeatureMatrix& dev_features, const std::vector<int>& dev_labels,
                       const ProbeConfig& cfg, ProbeTrainLog* log) {
    cfg.validate();
    if (features.empty()) throw InputError("train_probe: empty feature set");
    if (features.size() != labels.size())
        throw ShapeError("train_probe: " + std::to_string(features.size()) + " features vs " +
                         std::to_string(labels.size()) + " labels");
    if (dev_features.size() != dev_labels.size())
        throw ShapeError("train_probe: dev split size mismatch");
    const int dim = static_cast<int>(features[0].size());
    const int k = cfg.label_scheme.num_labels();
    for (const auto& f : features)
        if (static_cast<int>(f.size()) != dim)
            throw ShapeError("train_probe: non-uniform feature dims");
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= k)
            throw LabelError("train_probe: label " + std::to_string(labels[i]) + " at row " +
                             std::to_string(i) + " outside the " + cfg.label_scheme.name() +
                             " scheme");
    for (size_t i = 0; i < dev_labels.size(); ++i)
        if (dev_labels[i] < 0 || dev_labels[i] >= k)
            throw LabelError("train_probe: dev label " + std::to_string(dev_labels[i]) +
                             " at row " + std::to_string(i) + " outside the scheme");

    ProbeModel model;
    model.init(cfg, dim, cfg.seed);
    auto params = model.params();

    OptimizerState opt;
    opt.kind = OptimKind::adam;
    opt.learning_rate = cfg.learning_rate;

    std::mt19937 rng(static_cast<uint32_t>(cfg.seed) + 1);
    std::vector<int> order(features.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<Param> best = snapshot_params(model);
    double best_dev = -1.0;
    int best_epoch = -1;
    int bad = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        int batches = 0;
        for (size_t off = 0; off < order.size(); off += cfg.batch_size) {
            std::vector<int> rows(order.begin() + off,
                                  order.begin() + std::min(order.size(),
                                                           off + cfg.batch_size));
            std::vector<int> gold;
            gold.reserve(rows.size());
            for (int r : rows) gold.push_back(labels[r]);

            Graph g;
            auto x = batch_leaf(g, features, rows, dim);
            auto logits = probe_logits(g, model, x);
            auto loss = g.cross_entropy_rows(logits, gold);
            if (cfg.weight_decay > 0.0f) {
                for (auto& w : model.weights) {
                    auto wv = g.param(w);
                    loss = g.add(loss, g.scale(g.sum(g.mul(wv, wv)),
                                               cfg.weight_decay / 2.0f));
                }
            }
            loss_sum += g.val(loss)[0];
            batches += 1;
            g.backward(loss);
            adam_step(opt, params);
        }

        const double dev_acc = dev_features.empty()
                                   ? 0.0
                                   : probe_accuracy(model, dev_features, dev_labels);
        const bool improved = dev_acc > best_dev;
        if (improved) {
            best_dev = dev_acc;
            best = snapshot_params(model);
            best_epoch = epoch;
            bad = 0;
        } else {
            bad += 1;
        }
        if (log)
            log->epochs.push_back({epoch, loss_sum / std::max(1, batches), dev_acc, improved});
        if (bad >= cfg.patience) {
            if (log)
                log->stop_reason = "no dev improvement for " + std::to_string(bad) +
                                   " consecutive epochs";
            break;
        }
    }
    if (log) {
        if (log->stop_reason.empty()) log->stop_reason = "reached max_epochs";
        log->best_dev_accuracy = best_dev;
        log->best_epoch = best_epoch;
    }
    restore_params(model, best);
    return model;
}

std::vector<float> predict(ProbeModel& model, const std::vector<float>& feature) {
    if (static_cast<int>(feature.size()) != model.input_dim)
        throw ShapeError("predict: feature dim " + std::to_string(feature.size()) +
                         ", model expects " + std::to_string(model.input_dim));
    Graph g;
    auto x = g.constant({1, model.input_dim}, std::vector<float>(feature));
    auto logits = probe_logits(g, model, x);
    auto probs = g.softmax(g.row(logits, 0));
    return g.val(probs);
}

std::vector<int> predict_batch(ProbeModel& model, const FeatureMatrix& features) {
    std::vector<int> out;
    out.reserve(features.size());
    const int dim = model.input_dim;
    size_t i = 0;
    while (i < features.size()) {
        const size_t end = std::min(features.size(), i + 256);
        std::vector<int> rows;
        for (size_t r = i; r < end; ++r) rows.push_back(static_cast<int>(r));
        Graph g;
        auto x = batch_leaf(g, features, rows, dim);
        auto logits = probe_logits(g, model, x);
        const auto& vals = g.val(logits);
        const int k = g.shape(logits)[1];
        for (size_t r = 0; r < rows.size(); ++r) {
            const float* rowp = vals.data() + r * static_cast<size_t>(k);
            int arg = 0;
            for (int j = 1; j < k; ++j)
                if (rowp[j] > rowp[arg]) arg = j;
            out.push_back(arg);
        }
        i = end;
    }
    return out;
}

double probe_accuracy(ProbeModel& model, const FeatureMatrix& features,
                      const std::vector<int>& labels) {
    auto preds = predict_batch(model, features);
    int64_t correct = 0;
    for (size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) correct += 1;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

void save_probe(const std::string& path, ProbeModel& model,
                const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    std::vector<const Param*> params;
    for (Param* p : model.params()) params.push_back(p);
    save_checkpoint(path, params);

    KvFile meta;
    meta.set("checkpoint", "format", "probe");
    meta.set("probe", "kind", probe_kind_name(model.cfg.kind));
    meta.set("probe", "hidden_size", std::to_string(model.cfg.hidden_size));
    meta.set("probe", "hidden_layers", std::to_string(model.cfg.hidden_layers));
    meta.set("probe", "label_scheme", model.cfg.label_scheme.name());
    meta.set("probe", "input_dim", std::to_string(model.input_dim));
    {
        std::ostringstream os;
        os.precision(17);
        os << model.cfg.learning_rate;
        meta.set("probe", "learning_rate", os.str());
    }
    meta.set("probe", "batch_size", std::to_string(model.cfg.batch_size));
    meta.set("probe", "max_epochs", std::to_string(model.cfg.max_epochs));
    meta.set("probe", "patience", std::to_string(model.cfg.patience));
    meta.set("probe", "seed", std::to_string(model.cfg.seed));
    for (const auto& [k, v] : extra_meta) meta.set("files", k, v);
    meta.save(path + ".meta");
}

ProbeModel load_probe(const std::string& path,
                      std::vector<std::pair<std::string, std::string>>* extra_meta) {
    KvFile meta = KvFile::load(path + ".meta");
    if (meta.get_or("checkpoint", "format", "") != "probe")
        throw CompatibilityError(path + ".meta is not a probe checkpoint sidecar");
    ProbeConfig cfg;
    cfg.kind = parse_probe_kind(meta.get("probe", "kind"));
    cfg.hidden_size = static_cast<int>(meta.get_int("probe", "hidden_size"));
    cfg.hidden_layers = static_cast<int>(meta.get_int("probe", "hidden_layers"));
    cfg.label_scheme = LabelScheme::parse(meta.get("probe", "label_scheme"));
    cfg.learning_rate = static_cast<float>(meta.get_real("probe", "learning_rate"));
    cfg.batch_size = static_cast<int>(meta.get_int("probe", "batch_size"));
    cfg.max_epochs = static_cast<int>(meta.get_int("probe", "max_epochs"));
    cfg.patience = static_cast<int>(meta.get_int("probe", "patience"));
    cfg.seed = static_cast<uint64_t>(meta.get_int("probe", "seed"));

    ProbeModel model;
    model.init(cfg, static_cast<int>(meta.get_int("probe", "input_dim")), 0);
    std::vector<Param*> params = model.params();
    load_checkpoint_into(path, params);
    if (extra_meta) *extra_meta = meta.section("files");
    return model;
}

}  // namespace seqprobe
