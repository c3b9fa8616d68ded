#include "seqprobe/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqprobe/checkpoint.hpp"
#include "seqprobe/hash.hpp"
#include "seqprobe/kvfile.hpp"

namespace seqprobe {

namespace {

std::string fmt_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct EncodedPair {
    std::vector<int> src, tgt;
};

std::vector<EncodedPair> encode_pairs(const std::vector<ParallelExample>& data,
                                      const Vocabulary& src_vocab, const Vocabulary& tgt_vocab) {
    std::vector<EncodedPair> out;
    out.reserve(data.size());
    for (const auto& ex : data)
        out.push_back({src_vocab.encode(ex.source_tokens, false),
                       tgt_vocab.encode(ex.target_tokens, false)});
    return out;
}

std::vector<std::vector<int>> make_batches(const std::vector<EncodedPair>& data, int batch_size) {
    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (data[a].src.size() != data[b].src.size())
            return data[a].src.size() < data[b].src.size();
        return data[a].tgt.size() < data[b].tgt.size();
    });
    std::vector<std::vector<int>> batches;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        std::vector<int> b(order.begin() + i,
                           order.begin() + std::min(order.size(), i + batch_size));
        batches.push_back(std::move(b));
    }
    return batches;
}

Checkpoint snapshot(NmtModel& model, double dev_metric, int64_t step) {
    Checkpoint ckpt;
    ckpt.config = model.cfg;
    ckpt.dev_metric = dev_metric;
    ckpt.step = step;
    for (Param* p : model.params()) {
        Param copy(p->name, p->tensor.shape);
        copy.tensor.data = p->tensor.data;
        ckpt.params.push_back(std::move(copy));
    }
    return ckpt;
}

double perplexity_encoded(NmtModel& model, const std::vector<EncodedPair>& data) {
    if (data.empty()) throw InputError("perplexity over empty data");
    double ce_sum = 0.0;
    int64_t tokens = 0;
    size_t i = 0;
    while (i < data.size()) {
        Graph g;
        auto enc = bind_encoder(g, model.enc);
        auto dec = bind_decoder(g, model.dec);
        size_t positions = 0;
        while (i < data.size() && positions < 512) {
            const auto& pair = data[i];
            auto eg = bilstm_encode(g, enc, pair.src);
            auto [loss, n] = sequence_loss(g, dec, eg, pair.tgt);
            ce_sum += static_cast<double>(g.val(loss)[0]);
            tokens += n;
            positions += pair.src.size() + pair.tgt.size() + 1;
            ++i;
        }
    }
    return perplexity_from(ce_sum, tokens);
}

}  // namespace

double perplexity_from(double ce_sum, int64_t tokens) {
    if (tokens < 1) throw InputError("perplexity over zero tokens");
    return std::exp(ce_sum / static_cast<double>(tokens));
}

Checkpoint train_nmt(const std::vector<ParallelExample>& train,
                     const std::vector<ParallelExample>& dev, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, const NmtConfig& cfg, uint64_t seed,
                     TrainLog* log) {
    if (train.empty()) throw InputError("train_nmt: empty training split");
    if (dev.empty()) throw InputError("train_nmt: empty dev split");

    NmtModel model;
    model.init(cfg, src_vocab.size(), tgt_vocab.size(), seed);
    auto params = model.params();

    OptimizerState opt;
    opt.kind = cfg.optimizer;
    opt.learning_rate = cfg.learning_rate;

    auto train_enc = encode_pairs(train, src_vocab, tgt_vocab);
    auto dev_enc = encode_pairs(dev, src_vocab, tgt_vocab);
    auto batches = make_batches(train_enc, cfg.batch_size);

    std::mt19937 shuffle_rng(static_cast<uint32_t>(seed) + 1);
    std::vector<int> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);

    Checkpoint best;
    double best_dev = std::numeric_limits<double>::infinity();
    int bad_evals = 0;
    bool stopped = false;
    int64_t step = 0;
    size_t cursor = batches.size();  // trigger the first shuffle

    auto evaluate = [&](int64_t at_step) {
        const double ppl = perplexity_encoded(model, dev_enc);
        const bool improved = ppl < best_dev;
        if (improved) {
            best_dev = ppl;
            best = snapshot(model, ppl, at_step);
            bad_evals = 0;
        } else {
            bad_evals += 1;
            if (cfg.halve_lr_on_plateau && cfg.optimizer == OptimKind::sgd)
                opt.learning_rate *= 0.5f;
        }
        if (log) log->evals.push_back({at_step, ppl, improved, opt.learning_rate});
        return improved;
    };

    while (step < cfg.max_steps && !stopped) {
        if (cursor >= batch_order.size()) {
            std::shuffle(batch_order.begin(), batch_order.end(), shuffle_rng);
            cursor = 0;
        }
        const auto& batch = batches[batch_order[cursor++]];

        Graph g;
        auto enc = bind_encoder(g, model.enc);
        auto dec = bind_decoder(g, model.dec);
        Graph::Var total;
        int tokens = 0;
        for (int idx : batch) {
            auto eg = bilstm_encode(g, enc, train_enc[idx].src);
            auto [loss, n] = sequence_loss(g, dec, eg, train_enc[idx].tgt);
            total = total.valid() ? g.add(total, loss) : loss;
            tokens += n;
        }
        auto mean_loss = g.scale(total, 1.0f / static_cast<float>(tokens));
        const double loss_value = g.val(mean_loss)[0];
        if (!std::isfinite(loss_value))
            throw ComputeError("training loss diverged (non-finite) at step " +
                               std::to_string(step + 1));
        g.backward(mean_loss);
        clip_grad_norm(params, cfg.clip_norm);
        optimizer_step(opt, params);
        step += 1;
        if (log) log->step_losses.push_back(loss_value);

        if (step % cfg.eval_every == 0) {
            evaluate(step);
            if (bad_evals >= cfg.patience) {
                stopped = true;
                if (log)
                    log->stop_reason = "no dev improvement for " + std::to_string(bad_evals) +
                                       " consecutive evaluations";
            }
        }
    }
    if (step % cfg.eval_every != 0 && !stopped) evaluate(step);
    if (log && log->stop_reason.empty()) log->stop_reason = "reached max_steps";

    if (best.params.empty()) best = snapshot(model, best_dev, step);
    return best;
}

double perplexity(NmtModel& model, const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                  const std::vector<ParallelExample>& data) {
    return perplexity_encoded(model, encode_pairs(data, src_vocab, tgt_vocab));
}

EncoderOutput encode_sentence(NmtModel& model, const std::vector<int>& indices) {
    Graph g;
    auto enc = bind_encoder(g, model.enc);
    auto eg = bilstm_encode(g, enc, indices);
    return read_encoder_output(g, eg);
}

std::vector<EncoderOutput> encode_sentences(NmtModel& model,
                                            const std::vector<std::vector<int>>& sentences) {
    std::vector<EncoderOutput> out;
    out.reserve(sentences.size());
    size_t i = 0;
    while (i < sentences.size()) {
        Graph g;
        auto enc = bind_encoder(g, model.enc);
        size_t positions = 0, count = 0;
        while (i < sentences.size() && positions < 512 && count < 64) {
            auto eg = bilstm_encode(g, enc, sentences[i]);
            out.push_back(read_encoder_output(g, eg));
            positions += sentences[i].size();
            count += 1;
            ++i;
        }
    }
    return out;
}

std::vector<int> greedy_decode(NmtModel& model, const std::vector<int>& src_indices,
                               int max_len) {
    Graph g;
    auto enc = bind_encoder(g, model.enc);
    auto dec = bind_decoder(g, model.dec);
    auto eg = bilstm_encode(g, enc, src_indices);
    auto stacked = g.stack_rows(eg.top);
    auto proj = g.matmul(stacked, dec.attn.w_enc);
    auto state = decoder_init(g, dec, eg);
    std::vector<int> out;
    int prev = kBos;
    for (int t = 0; t < max_len; ++t) {
        auto stepr = decode_step(g, dec, prev, state, stacked, proj);
        const auto& logits = g.val(stepr.logits);
        int arg = 0;
        for (size_t j = 1; j < logits.size(); ++j)
            if (logits[j] > logits[arg]) arg = static_cast<int>(j);
        if (arg == kEos) break;
        out.push_back(arg);
        state = stepr.state;
        prev = arg;
    }
    return out;
}

void apply_checkpoint(NmtModel& model, const Checkpoint& ckpt) {
    std::map<std::string, const Param*> by_name;
    for (const auto& p : ckpt.params) by_name[p.name] = &p;
    for (Param* dst : model.params()) {
        auto it = by_name.find(dst->name);
        if (it == by_name.end())
            throw CompatibilityError("checkpoint is missing parameter '" + dst->name + "'");
        if (it->second->tensor.shape != dst->tensor.shape)
            throw CompatibilityError("checkpoint parameter '" + dst->name + "' has shape " +
                                     shape_str(it->second->tensor.shape) + ", expected " +
                                     shape_str(dst->tensor.shape));
        dst->tensor.data = it->second->tensor.data;
        dst->tensor.clear_grad();
    }
}

void save_nmt_bundle(const std::string& path, NmtModel& model, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, uint64_t seed, double dev_metric,
                     int64_t step) {
    std::vector<const Param*> params;
    for (Param* p : model.params()) params.push_back(p);
    save_checkpoint(path, params);
    src_vocab.save(path + ".src.vocab");
    tgt_vocab.save(path + ".tgt.vocab");

    KvFile meta;
    meta.set("checkpoint", "format", "nmt");
    meta.set("checkpoint", "seed", std::to_string(seed));
    meta.set("checkpoint", "dev_metric", fmt_real(dev_metric));
    meta.set("checkpoint", "dev_metric_kind", "perplexity");
    meta.set("checkpoint", "step", std::to_string(step));
    meta.set("nmt", "d", std::to_string(model.cfg.d));
    meta.set("nmt", "layers", std::to_string(model.cfg.layers));
    meta.set("nmt", "src_vocab", std::to_string(src_vocab.size()));
    meta.set("nmt", "tgt_vocab", std::to_string(tgt_vocab.size()));
    meta.set("nmt", "max_train_len", std::to_string(model.cfg.max_train_len));
    meta.set("nmt", "optimizer", model.cfg.optimizer == OptimKind::sgd ? "sgd" : "adam");
    meta.set("nmt", "learning_rate", fmt_real(model.cfg.learning_rate));
    meta.set("nmt", "clip_norm", fmt_real(model.cfg.clip_norm));
    meta.set("nmt", "halve_lr_on_plateau", model.cfg.halve_lr_on_plateau ? "true" : "false");
    meta.set("nmt", "batch_size", std::to_string(model.cfg.batch_size));
    meta.set("nmt", "eval_every", std::to_string(model.cfg.eval_every));
    meta.set("nmt", "patience", std::to_string(model.cfg.patience));
    meta.set("nmt", "max_steps", std::to_string(model.cfg.max_steps));
    meta.set("files", "src_vocab_hash", hex64(hash_file(path + ".src.vocab")));
    meta.set("files", "tgt_vocab_hash", hex64(hash_file(path + ".tgt.vocab")));
    meta.save(path + ".meta");
}

NmtBundle load_nmt_bundle(const std::string& path) {
    KvFile meta = KvFile::load(path + ".meta");
    if (meta.get_or("checkpoint", "format", "") != "nmt")
        throw CompatibilityError(path + ".meta is not an NMT checkpoint sidecar");

    NmtBundle bundle;
    NmtConfig cfg;
    cfg.d = static_cast<int>(meta.get_int("nmt", "d"));
    cfg.layers = static_cast<int>(meta.get_int("nmt", "layers"));
    cfg.src_vocab = static_cast<int>(meta.get_int("nmt", "src_vocab"));
    cfg.tgt_vocab = static_cast<int>(meta.get_int("nmt", "tgt_vocab"));
    cfg.max_train_len = static_cast<int>(meta.get_int("nmt", "max_train_len"));
    cfg.optimizer = meta.get("nmt", "optimizer") == "adam" ? OptimKind::adam : OptimKind::sgd;
    cfg.learning_rate = static_cast<float>(meta.get_real("nmt", "learning_rate"));
    cfg.clip_norm = static_cast<float>(meta.get_real("nmt", "clip_norm"));
    cfg.halve_lr_on_plateau = meta.get_bool("nmt", "halve_lr_on_plateau");
    cfg.batch_size = static_cast<int>(meta.get_int("nmt", "batch_size"));
    cfg.eval_every = static_cast<int>(meta.get_int("nmt", "eval_every"));
    cfg.patience = static_cast<int>(meta.get_int("nmt", "patience"));
    cfg.max_steps = static_cast<int>(meta.get_int("nmt", "max_steps"));

    bundle.src_vocab = Vocabulary::load(path + ".src.vocab");
    bundle.tgt_vocab = Vocabulary::load(path + ".tgt.vocab");
    if (hex64(hash_file(path + ".src.vocab")) != meta.get("files", "src_vocab_hash") ||
        hex64(hash_file(path + ".tgt.vocab")) != meta.get("files", "tgt_vocab_hash"))
        throw CompatibilityError("vocabulary files do not match checkpoint sidecar: " + path);

    bundle.seed = static_cast<uint64_t>(meta.get_int("checkpoint", "seed"));
    bundle.dev_metric = meta.get_real("checkpoint", "dev_metric");
    bundle.step = meta.get_int("checkpoint", "step");

    bundle.model.init(cfg, bundle.src_vocab.size(), bundle.tgt_vocab.size(), 0);
    std::vector<Param*> params = bundle.model.params();
    load_checkpoint_into(path, params);
    return bundle;
}

}  // namespace seqprobe
