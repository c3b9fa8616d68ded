#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqprobe/corpora.hpp"
#include "seqprobe/graph.hpp"
#include "seqprobe/repr.hpp"

namespace seqprobe {

enum class ProbeKind { linear, mlp };

ProbeKind parse_probe_kind(const std::string& name);
std::string probe_kind_name(ProbeKind k);

struct ProbeConfig {
    ProbeKind kind = ProbeKind::linear;
    int hidden_size = 500;
    int hidden_layers = 1;  // >1 enables the deeper preliminary variant
    LabelScheme label_scheme;
    float learning_rate = 1e-3f;
    float weight_decay = 0.0f;
    int batch_size = 64;
    int max_epochs = 100;
    int patience = 5;
    uint64_t seed = 0;

    void validate() const {
        if (kind == ProbeKind::mlp && hidden_size < 1)
            throw ValidationError("mlp probe requires hidden_size >= 1");
        if (kind == ProbeKind::mlp && hidden_layers < 1)
            throw ValidationError("mlp probe requires hidden_layers >= 1");
        if (learning_rate <= 0.0f) throw ValidationError("probe learning_rate must be positive");
        if (batch_size < 1 || max_epochs < 1 || patience < 1)
            throw ValidationError("probe training knobs must be positive");
    }
};

// Softmax classifier over pair representations; output width equals the
// number of labels in the scheme.
template <class S>
struct ProbeModelT {
    ProbeConfig cfg;
    int input_dim = 0;
    std::vector<ParamT<S>> weights;  // hidden layers then output
    std::vector<ParamT<S>> biases;

    void init(const ProbeConfig& config, int in_dim, uint64_t seed) {
        config.validate();
        cfg = config;
        input_dim = in_dim;
        weights.clear();
        biases.clear();
        std::mt19937 rng(static_cast<uint32_t>(seed));
        const int k = cfg.label_scheme.num_labels();
        if (cfg.kind == ProbeKind::linear) {
            weights.emplace_back("probe.w0", Shape{in_dim, k});
            biases.emplace_back("probe.b0", Shape{k});
            glorot_init(weights[0].tensor, rng);
        } else {
            int prev = in_dim;
            for (int l = 0; l < cfg.hidden_layers; ++l) {
                weights.emplace_back("probe.w" + std::to_string(l),
                                     Shape{prev, cfg.hidden_size});
                biases.emplace_back("probe.b" + std::to_string(l), Shape{cfg.hidden_size});
                glorot_init(weights.back().tensor, rng);
                prev = cfg.hidden_size;
            }
            weights.emplace_back("probe.w" + std::to_string(cfg.hidden_layers),
                                 Shape{prev, k});
            biases.emplace_back("probe.b" + std::to_string(cfg.hidden_layers), Shape{k});
            glorot_init(weights.back().tensor, rng);
        }
    }

    std::vector<ParamT<S>*> params() {
        std::vector<ParamT<S>*> out;
        for (size_t i = 0; i < weights.size(); ++i) {
            out.push_back(&weights[i]);
            out.push_back(&biases[i]);
        }
        return out;
    }
};

using ProbeModel = ProbeModelT<float>;

// Logits for a batch matrix [b x input_dim]; hidden layers use ReLU.
template <class S>
VarT<S> probe_logits(GraphT<S>& g, ProbeModelT<S>& model, VarT<S> x) {
    auto h = x;
    for (size_t l = 0; l + 1 < model.weights.size(); ++l)
        h = g.relu(g.add_rowvec(g.matmul(h, g.param(model.weights[l])),
                                g.param(model.biases[l])));
    const size_t last = model.weights.size() - 1;
    return g.add_rowvec(g.matmul(h, g.param(model.weights[last])), g.param(model.biases[last]));
}

struct ProbeEpoch {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_accuracy = 0.0;
    bool improved = false;
};

struct ProbeTrainLog {
    std::vector<ProbeEpoch> epochs;
    double best_dev_accuracy = 0.0;
    int best_epoch = -1;
    std::string stop_reason;
};

using FeatureMatrix = std::vector<std::vector<float>>;

// Adam training with dev-accuracy early stopping; returns the best-dev model.
ProbeModel train_probe(const FeatureMatrix& features, const std::vector<int>& labels,
                       const FeatureMatrix& dev_features, const std::vector<int>& dev_labels,
                       const ProbeConfig& cfg, ProbeTrainLog* log = nullptr);

// Probability distribution over labels; sums to 1.
std::vector<float> predict(ProbeModel& model, const std::vector<float>& feature);

// Argmax labels, ties broken by lowest label index; order preserved.
std::vector<int> predict_batch(ProbeModel& model, const FeatureMatrix& features);

double probe_accuracy(ProbeModel& model, const FeatureMatrix& features,
                      const std::vector<int>& labels);

// SPRB1 container + key=value sidecar (<path>.meta). extra_meta entries are
// copied into the sidecar's [files] section (dump hashes and the like).
void save_probe(const std::string& path, ProbeModel& model,
                const std::vector<std::pair<std::string, std::string>>& extra_meta = {});
ProbeModel load_probe(const std::string& path,
                      std::vector<std::pair<std::string, std::string>>* extra_meta = nullptr);

}  // namespace seqprobe
