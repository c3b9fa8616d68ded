#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqprobe/corpora.hpp"
#include "seqprobe/graph.hpp"
#include "seqprobe/optim.hpp"

namespace seqprobe {

template <class S>
using VarT = typename GraphT<S>::Var;

struct NmtConfig {
    int d = 16;
    int layers = 2;
    int src_vocab = 2000;  // maximum vocabulary sizes
    int tgt_vocab = 2000;
    int max_train_len = 50;
    OptimKind optimizer = OptimKind::sgd;
    float learning_rate = 1.0f;
    float clip_norm = 5.0f;
    bool halve_lr_on_plateau = true;
    int batch_size = 16;
    int eval_every = 200;
    int patience = 3;
    int max_steps = 3000;

    static NmtConfig desk_profile() { return NmtConfig{}; }
    static NmtConfig paper_profile() {
        NmtConfig c;
        c.d = 500;
        c.layers = 4;
        c.src_vocab = 75000;
        c.tgt_vocab = 75000;
        return c;
    }

    void validate() const {
        if (d < 1 || layers < 1)
            throw ValidationError("NmtConfig requires d >= 1 and layers >= 1");
        if (src_vocab < kNumReserved + 1 || tgt_vocab < kNumReserved + 1)
            throw ValidationError("NmtConfig vocabulary sizes too small");
        if (learning_rate <= 0.0f) throw ValidationError("learning_rate must be positive");
        if (batch_size < 1 || eval_every < 1 || patience < 1 || max_steps < 1)
            throw ValidationError("NmtConfig training knobs must be positive");
    }
};

// Input, recurrent weights and bias for the four gates, laid out as a single
// [*, 4d] block in gate order (input, forget, candidate, output).
template <class S>
struct LstmCellParamsT {
    ParamT<S> wx;  // [input_dim x 4d]
    ParamT<S> wh;  // [d x 4d]
    ParamT<S> b;   // [4d]

    int input_dim() const { return wx.tensor.shape[0]; }
    int d() const { return wh.tensor.shape[0]; }

    void init(const std::string& prefix, int in_dim, int dim, std::mt19937& rng) {
        wx = ParamT<S>(prefix + ".wx", {in_dim, 4 * dim});
        wh = ParamT<S>(prefix + ".wh", {dim, 4 * dim});
        b = ParamT<S>(prefix + ".b", {4 * dim});
        glorot_init(wx.tensor, rng);
        glorot_init(wh.tensor, rng);
        // forget-gate bias starts at 1 to keep early memory open
        for (int j = dim; j < 2 * dim; ++j) b.tensor.data[j] = S(1);
    }

    void collect(std::vector<ParamT<S>*>& out) {
        out.push_back(&wx);
        out.push_back(&wh);
        out.push_back(&b);
    }
};

template <class S>
struct AttentionParamsT {
    ParamT<S> w_enc;  // [2d x d]
    ParamT<S> w_dec;  // [d x d]
    ParamT<S> b;      // [d]
    ParamT<S> v;      // [d]

    void init(const std::string& prefix, int d, std::mt19937& rng) {
        w_enc = ParamT<S>(prefix + ".w_enc", {2 * d, d});
        w_dec = ParamT<S>(prefix + ".w_dec", {d, d});
        b = ParamT<S>(prefix + ".b", {d});
        v = ParamT<S>(prefix + ".v", {d});
        glorot_init(w_enc.tensor, rng);
        glorot_init(w_dec.tensor, rng);
        glorot_init(v.tensor, rng);
    }

    void collect(std::vector<ParamT<S>*>& out) {
        out.push_back(&w_enc);
        out.push_back(&w_dec);
        out.push_back(&b);
        out.push_back(&v);
    }
};

template <class S>
struct EncoderParamsT {
    ParamT<S> embed;  // [V_src x d]
    struct Layer {
        LstmCellParamsT<S> fwd, bwd;
    };
    std::vector<Layer> layers;

    int d() const { return embed.tensor.shape[1]; }

    void init(int vocab, int dim, int num_layers, std::mt19937& rng) {
        embed = ParamT<S>("enc.embed", {vocab, dim});
        glorot_init(embed.tensor, rng);
        layers.resize(num_layers);
        for (int l = 0; l < num_layers; ++l) {
            const int in_dim = l == 0 ? dim : 2 * dim;
            layers[l].fwd.init("enc.l" + std::to_string(l) + ".fwd", in_dim, dim, rng);
            layers[l].bwd.init("enc.l" + std::to_string(l) + ".bwd", in_dim, dim, rng);
        }
    }

    void collect(std::vector<ParamT<S>*>& out) {
        out.push_back(&embed);
        for (auto& l : layers) {
            l.fwd.collect(out);
            l.bwd.collect(out);
        }
    }
};

template <class S>
struct DecoderParamsT {
    ParamT<S> embed;  // [V_tgt x d]
    std::vector<LstmCellParamsT<S>> layers;
    struct Bridge {
        ParamT<S> wh, bh, wc, bc;  // [2d x d], [d] each
    };
    std::vector<Bridge> bridges;
    AttentionParamsT<S> attn;
    ParamT<S> w_comb;  // [3d x d] attentional hidden over [h ; context]
    ParamT<S> b_comb;  // [d]
    ParamT<S> w_out;   // [d x V_tgt]
    ParamT<S> b_out;   // [V_tgt]

    int d() const { return embed.tensor.shape[1]; }
    int vocab() const { return embed.tensor.shape[0]; }

    void init(int vocab, int dim, int num_layers, std::mt19937& rng) {
        embed = ParamT<S>("dec.embed", {vocab, dim});
        glorot_init(embed.tensor, rng);
        layers.resize(num_layers);
        bridges.resize(num_layers);
        for (int l = 0; l < num_layers; ++l) {
            // layer 0 sees [token embedding ; fed-back context]
            const int in_dim = l == 0 ? 3 * dim : dim;
            layers[l].init("dec.l" + std::to_string(l), in_dim, dim, rng);
            auto& br = bridges[l];
            const std::string p = "dec.bridge" + std::to_string(l);
            br.wh = ParamT<S>(p + ".wh", {2 * dim, dim});
            br.bh = ParamT<S>(p + ".bh", {dim});
            br.wc = ParamT<S>(p + ".wc", {2 * dim, dim});
            br.bc = ParamT<S>(p + ".bc", {dim});
            glorot_init(br.wh.tensor, rng);
            glorot_init(br.wc.tensor, rng);
        }
        attn.init("attn", dim, rng);
        w_comb = ParamT<S>("dec.w_comb", {3 * dim, dim});
        b_comb = ParamT<S>("dec.b_comb", {dim});
        w_out = ParamT<S>("dec.w_out", {dim, vocab});
        b_out = ParamT<S>("dec.b_out", {vocab});
        glorot_init(w_comb.tensor, rng);
        glorot_init(w_out.tensor, rng);
    }

    void collect(std::vector<ParamT<S>*>& out) {
        out.push_back(&embed);
        for (auto& l : layers) l.collect(out);
        for (auto& br : bridges) {
            out.push_back(&br.wh);
            out.push_back(&br.bh);
            out.push_back(&br.wc);
            out.push_back(&br.bc);
        }
        attn.collect(out);
        out.push_back(&w_comb);
        out.push_back(&b_comb);
        out.push_back(&w_out);
        out.push_back(&b_out);
    }
};

template <class S>
struct NmtModelT {
    NmtConfig cfg;
    EncoderParamsT<S> enc;
    DecoderParamsT<S> dec;

    // src_vocab/tgt_vocab are the actual (post-cut) vocabulary sizes.
    void init(const NmtConfig& config, int src_vocab, int tgt_vocab, uint64_t seed) {
        cfg = config;
        std::mt19937 rng(static_cast<uint32_t>(seed));
        enc.init(src_vocab, cfg.d, cfg.layers, rng);
        dec.init(tgt_vocab, cfg.d, cfg.layers, rng);
    }

    std::vector<ParamT<S>*> params() {
        std::vector<ParamT<S>*> out;
        enc.collect(out);
        dec.collect(out);
        return out;
    }
};

using NmtModel = NmtModelT<float>;

// Per-position, per-direction, per-layer hidden and cell states for one
// sentence, read out of the graph.
template <class S>
struct EncoderOutputT {
    int d = 0;
    int layers = 0;
    int length = 0;
    std::vector<S> states;  // [(layer*2+dir)*length + pos] * d
    std::vector<S> cells;

    const S* state(int layer, int dir, int pos) const {
        return states.data() +
               (static_cast<size_t>((layer * 2 + dir)) * length + pos) * static_cast<size_t>(d);
    }
    const S* cell(int layer, int dir, int pos) const {
        return cells.data() +
               (static_cast<size_t>((layer * 2 + dir)) * length + pos) * static_cast<size_t>(d);
    }
};

using EncoderOutput = EncoderOutputT<float>;

// ---- graph-side building blocks ----

template <class S>
struct BoundLstmCellT {
    VarT<S> wx, wh, b;
    int d = 0;
};

template <class S>
BoundLstmCellT<S> bind_cell(GraphT<S>& g, LstmCellParamsT<S>& p) {
    return {g.param(p.wx), g.param(p.wh), g.param(p.b), p.d()};
}

template <class S>
struct LstmStateT {
    VarT<S> h, c;
};

// One LSTM step: gates sigma, candidate tanh, c' = f*c + i*g, h' = o*tanh(c').
template <class S>
LstmStateT<S> lstm_cell_step(GraphT<S>& g, VarT<S> x, LstmStateT<S> prev,
                             const BoundLstmCellT<S>& cell) {
    const int d = cell.d;
    auto pre = g.add(g.add(g.vecmat(x, cell.wx), g.vecmat(prev.h, cell.wh)), cell.b);
    auto i = g.sigmoid(g.slice(pre, 0, d));
    auto f = g.sigmoid(g.slice(pre, d, d));
    auto cand = g.tanh(g.slice(pre, 2 * d, d));
    auto o = g.sigmoid(g.slice(pre, 3 * d, d));
    auto c = g.add(g.mul(f, prev.c), g.mul(i, cand));
    auto h = g.mul(o, g.tanh(c));
    return {h, c};
}

template <class S>
struct BoundEncoderT {
    std::vector<BoundLstmCellT<S>> fwd, bwd;  // per layer
    ParamT<S>* embed = nullptr;
    int d = 0;
};

template <class S>
BoundEncoderT<S> bind_encoder(GraphT<S>& g, EncoderParamsT<S>& p) {
    BoundEncoderT<S> out;
    out.embed = &p.embed;
    out.d = p.d();
    for (auto& l : p.layers) {
        out.fwd.push_back(bind_cell(g, l.fwd));
        out.bwd.push_back(bind_cell(g, l.bwd));
    }
    return out;
}

// Per-layer forward/backward state sequences; index [layer][pos] where pos is
// the token position (the backward pass fills positions n-1..0).
template <class S>
struct EncGraphT {
    int d = 0, layers = 0, length = 0;
    std::vector<std::vector<LstmStateT<S>>> fwd, bwd;
    std::vector<VarT<S>> top;  // [pos] -> concat(fwd_h, bwd_h) at the top layer

    VarT<S> fwd_last_h(int layer) const { return fwd[layer][length - 1].h; }
    VarT<S> bwd_last_h(int layer) const { return bwd[layer][0].h; }
    VarT<S> fwd_last_c(int layer) const { return fwd[layer][length - 1].c; }
    VarT<S> bwd_last_c(int layer) const { return bwd[layer][0].c; }
};

// Forward direction reads positions 0..n-1, backward reads n-1..0; layer l>0
// consumes the concatenated bidirectional output of layer l-1.
template <class S>
EncGraphT<S> bilstm_encode(GraphT<S>& g, const BoundEncoderT<S>& enc,
                           const std::vector<int>& indices) {
    if (indices.empty()) throw InputError("bilstm_encode: empty sentence");
    const int n = static_cast<int>(indices.size());
    const int d = enc.d;
    const int num_layers = static_cast<int>(enc.fwd.size());

    EncGraphT<S> out;
    out.d = d;
    out.layers = num_layers;
    out.length = n;
    out.fwd.resize(num_layers);
    out.bwd.resize(num_layers);

    auto emb = g.lookup(*enc.embed, indices);  // [n x d]
    std::vector<VarT<S>> inputs(n);
    for (int t = 0; t < n; ++t) inputs[t] = g.row(emb, t);

    for (int l = 0; l < num_layers; ++l) {
        out.fwd[l].resize(n);
        out.bwd[l].resize(n);
        LstmStateT<S> st{g.zeros(d), g.zeros(d)};
        for (int t = 0; t < n; ++t) {
            st = lstm_cell_step(g, inputs[t], st, enc.fwd[l]);
            out.fwd[l][t] = st;
        }
        st = {g.zeros(d), g.zeros(d)};
        for (int t = n - 1; t >= 0; --t) {
            st = lstm_cell_step(g, inputs[t], st, enc.bwd[l]);
            out.bwd[l][t] = st;
        }
        if (l + 1 < num_layers) {
            for (int t = 0; t < n; ++t)
                inputs[t] = g.concat({out.fwd[l][t].h, out.bwd[l][t].h});
        }
    }
    out.top.resize(n);
    for (int t = 0; t < n; ++t)
        out.top[t] = g.concat({out.fwd[num_layers - 1][t].h, out.bwd[num_layers - 1][t].h});
    return out;
}

template <class S>
EncoderOutputT<S> read_encoder_output(const GraphT<S>& g, const EncGraphT<S>& eg) {
    EncoderOutputT<S> out;
    out.d = eg.d;
    out.layers = eg.layers;
    out.length = eg.length;
    out.states.resize(static_cast<size_t>(eg.layers) * 2 * eg.length * eg.d);
    out.cells.resize(out.states.size());
    for (int l = 0; l < eg.layers; ++l)
        for (int dir = 0; dir < 2; ++dir)
            for (int t = 0; t < eg.length; ++t) {
                const auto& st = dir == 0 ? eg.fwd[l][t] : eg.bwd[l][t];
                const size_t off =
                    (static_cast<size_t>(l * 2 + dir) * eg.length + t) * static_cast<size_t>(eg.d);
                std::copy(g.val(st.h).begin(), g.val(st.h).end(), out.states.begin() + off);
                std::copy(g.val(st.c).begin(), g.val(st.c).end(), out.cells.begin() + off);
            }
    return out;
}

template <class S>
struct BoundAttentionT {
    VarT<S> w_enc, w_dec, b, v;
};

template <class S>
BoundAttentionT<S> bind_attention(GraphT<S>& g, AttentionParamsT<S>& p) {
    return {g.param(p.w_enc), g.param(p.w_dec), g.param(p.b), g.param(p.v)};
}

template <class S>
struct AttentionResultT {
    VarT<S> context;  // [2d]
    VarT<S> weights;  // [n]
};

// Additive attention over precomputed projections: enc_states is the stacked
// [n x 2d] matrix and enc_proj = enc_states * w_enc.
template <class S>
AttentionResultT<S> attention_step(GraphT<S>& g, const BoundAttentionT<S>& attn,
                                   VarT<S> dec_state, VarT<S> enc_states, VarT<S> enc_proj) {
    auto query = g.add(g.vecmat(dec_state, attn.w_dec), attn.b);
    auto scores = g.matvec(g.tanh(g.add_rowvec(enc_proj, query)), attn.v);
    auto weights = g.softmax(scores);
    auto context = g.vecmat(weights, enc_states);
    return {context, weights};
}

// Convenience overload over a list of per-position encoder states.
template <class S>
AttentionResultT<S> attention_step(GraphT<S>& g, const BoundAttentionT<S>& attn,
                                   VarT<S> dec_state, const std::vector<VarT<S>>& enc_states) {
    if (enc_states.empty()) throw InputError("attention over zero encoder states");
    auto stacked = g.stack_rows(enc_states);
    auto proj = g.matmul(stacked, attn.w_enc);
    return attention_step(g, attn, dec_state, stacked, proj);
}

template <class S>
struct BoundDecoderT {
    std::vector<BoundLstmCellT<S>> layers;
    std::vector<std::array<VarT<S>, 4>> bridges;  // wh, bh, wc, bc
    BoundAttentionT<S> attn;
    VarT<S> w_comb, b_comb, w_out, b_out;
    ParamT<S>* embed = nullptr;
    int d = 0;
};

template <class S>
BoundDecoderT<S> bind_decoder(GraphT<S>& g, DecoderParamsT<S>& p) {
    BoundDecoderT<S> out;
    out.embed = &p.embed;
    out.d = p.d();
    for (auto& l : p.layers) out.layers.push_back(bind_cell(g, l));
    for (auto& br : p.bridges)
        out.bridges.push_back({g.param(br.wh), g.param(br.bh), g.param(br.wc), g.param(br.bc)});
    out.attn = bind_attention(g, p.attn);
    out.w_comb = g.param(p.w_comb);
    out.b_comb = g.param(p.b_comb);
    out.w_out = g.param(p.w_out);
    out.b_out = g.param(p.b_out);
    return out;
}

template <class S>
struct DecStateT {
    std::vector<LstmStateT<S>> layers;
    VarT<S> context;  // [2d], fed into the next step's input
};

// Learned bridge from each encoder layer's final forward/backward states.
template <class S>
DecStateT<S> decoder_init(GraphT<S>& g, const BoundDecoderT<S>& dec, const EncGraphT<S>& enc) {
    DecStateT<S> st;
    for (size_t l = 0; l < dec.layers.size(); ++l) {
        auto hcat = g.concat({enc.fwd_last_h(static_cast<int>(l)),
                              enc.bwd_last_h(static_cast<int>(l))});
        auto ccat = g.concat({enc.fwd_last_c(static_cast<int>(l)),
                              enc.bwd_last_c(static_cast<int>(l))});
        auto h = g.tanh(g.add(g.vecmat(hcat, dec.bridges[l][0]), dec.bridges[l][1]));
        auto c = g.tanh(g.add(g.vecmat(ccat, dec.bridges[l][2]), dec.bridges[l][3]));
        st.layers.push_back({h, c});
    }
    st.context = g.zeros(2 * dec.d);
    return st;
}

template <class S>
struct DecodeStepResultT {
    VarT<S> logits;
    VarT<S> attn_weights;
    DecStateT<S> state;
};

// One teacher-forced / greedy step: embed the previous token, feed the
// previous context into the first layer's input, run the stack, attend with
// the top hidden state, and project [h ; context] to vocabulary logits.
template <class S>
DecodeStepResultT<S> decode_step(GraphT<S>& g, const BoundDecoderT<S>& dec, int prev_token,
                                 const DecStateT<S>& state, VarT<S> enc_states,
                                 VarT<S> enc_proj) {
    auto emb = g.row(g.lookup(*dec.embed, {prev_token}), 0);
    auto x = g.concat({emb, state.context});
    DecStateT<S> next;
    for (size_t l = 0; l < dec.layers.size(); ++l) {
        auto st = lstm_cell_step(g, x, state.layers[l], dec.layers[l]);
        next.layers.push_back(st);
        x = st.h;
    }
    auto att = attention_step(g, dec.attn, x, enc_states, enc_proj);
    next.context = att.context;
    auto comb = g.tanh(g.add(g.vecmat(g.concat({x, att.context}), dec.w_comb), dec.b_comb));
    auto logits = g.add(g.vecmat(comb, dec.w_out), dec.b_out);
    return {logits, att.weights, next};
}

// Teacher-forced sequence loss: decoder inputs are [BOS, target...], gold
// stream is [target..., EOS]. Returns the summed cross-entropy node and the
// number of gold tokens.
template <class S>
std::pair<VarT<S>, int> sequence_loss(GraphT<S>& g, const BoundDecoderT<S>& dec,
                                      const EncGraphT<S>& enc, const std::vector<int>& target) {
    auto stacked = g.stack_rows(enc.top);
    auto proj = g.matmul(stacked, dec.attn.w_enc);
    auto state = decoder_init(g, dec, enc);
    VarT<S> total;
    int prev = kBos;
    const int steps = static_cast<int>(target.size()) + 1;
    for (int t = 0; t < steps; ++t) {
        const int gold = t < static_cast<int>(target.size()) ? target[t] : kEos;
        auto step = decode_step(g, dec, prev, state, stacked, proj);
        auto ce = g.cross_entropy(step.logits, gold);
        total = total.valid() ? g.add(total, ce) : ce;
        state = step.state;
        prev = gold;
    }
    return {total, steps};
}

// ---- float-level driver API (training, evaluation, persistence) ----

struct TrainEval {
    int64_t step = 0;
    double dev_perplexity = 0.0;
    bool improved = false;
    float learning_rate = 0.0f;
};

struct TrainLog {
    std::vector<TrainEval> evals;
    std::vector<double> step_losses;  // mean per-token loss per step
    std::string stop_reason;
};

// Best-dev snapshot of a trained model.
struct Checkpoint {
    NmtConfig config;
    std::vector<Param> params;
    double dev_metric = 0.0;
    int64_t step = 0;
};

struct NmtBundle {
    NmtModel model;
    Vocabulary src_vocab;
    Vocabulary tgt_vocab;
    uint64_t seed = 0;
    double dev_metric = 0.0;
    int64_t step = 0;
};

// Mini-batch teacher-forced training with dev-perplexity checkpoint
// selection and patience-based early stopping.
Checkpoint train_nmt(const std::vector<ParallelExample>& train,
                     const std::vector<ParallelExample>& dev, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, const NmtConfig& cfg, uint64_t seed,
                     TrainLog* log = nullptr);

// exp(ce_sum / tokens), the perplexity formula over accumulated loss.
double perplexity_from(double ce_sum, int64_t tokens);

// exp(mean per-token cross-entropy); EOS counted, PAD never enters.
double perplexity(NmtModel& model, const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                  const std::vector<ParallelExample>& data);

EncoderOutput encode_sentence(NmtModel& model, const std::vector<int>& indices);
std::vector<EncoderOutput> encode_sentences(NmtModel& model,
                                            const std::vector<std::vector<int>>& sentences);

std::vector<int> greedy_decode(NmtModel& model, const std::vector<int>& src_indices,
                               int max_len);

// Checkpoint file + key=value sidecar (<path>.meta) + vocabulary files
// (<path>.src.vocab / <path>.tgt.vocab).
void save_nmt_bundle(const std::string& path, NmtModel& model, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, uint64_t seed, double dev_metric,
                     int64_t step);
NmtBundle load_nmt_bundle(const std::string& path);

void apply_checkpoint(NmtModel& model, const Checkpoint& ckpt);

}  // namespace seqprobe
