#include "seqprobe/gradcheck_suite.hpp"

#include <algorithm>

#include "seqprobe/probe.hpp"
#include "seqprobe/seq2seq.hpp"

namespace seqprobe {

namespace {

std::vector<double> random_values(int n, std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

GradCheckReport check_lstm_cell(uint64_t seed) {
    std::mt19937 rng(static_cast<uint32_t>(seed));
    LstmCellParamsT<double> cell;
    cell.init("cell", 4, 5, rng);
    ParamT<double> x("x", {4}), h0("h0", {5}), c0("c0", {5});
    x.tensor.data = random_values(4, rng);
    h0.tensor.data = random_values(5, rng);
    c0.tensor.data = random_values(5, rng);

    auto fwd = [&](GraphD& g) {
        auto bc = bind_cell(g, cell);
        LstmStateT<double> st{g.param(h0), g.param(c0)};
        auto next = lstm_cell_step(g, g.param(x), st, bc);
        return g.add(g.sum(g.mul(next.h, next.h)), g.sum(next.c));
    };
    return grad_check(fwd, {&cell.wx, &cell.wh, &cell.b, &x, &h0, &c0}, 1e-5, 0, seed);
}

GradCheckReport check_bilstm_layer(uint64_t seed) {
    EncoderParamsT<double> enc;
    std::mt19937 rng(static_cast<uint32_t>(seed));
    enc.init(7, 4, 2, rng);
    const std::vector<int> sentence = {4, 6, 5};

    auto fwd = [&](GraphD& g) {
        auto be = bind_encoder(g, enc);
        auto eg = bilstm_encode(g, be, sentence);
        VarT<double> loss;
        for (auto& top : eg.top) {
            auto term = g.sum(g.mul(top, top));
            loss = loss.valid() ? g.add(loss, term) : term;
        }
        return loss;
    };
    std::vector<ParamT<double>*> params;
    enc.collect(params);
    return grad_check(fwd, params, 1e-5, 16, seed);
}

GradCheckReport check_attention(uint64_t seed) {
    std::mt19937 rng(static_cast<uint32_t>(seed));
    AttentionParamsT<double> attn;
    attn.init("attn", 4, rng);
    ParamT<double> query("query", {4});
    query.tensor.data = random_values(4, rng);
    std::vector<ParamT<double>> states;
    for (int i = 0; i < 3; ++i) {
        states.emplace_back("enc_state" + std::to_string(i), Shape{8});
        states.back().tensor.data = random_values(8, rng);
    }

    auto fwd = [&](GraphD& g) {
        auto ba = bind_attention(g, attn);
        std::vector<VarT<double>> evars;
        for (auto& s : states) evars.push_back(g.param(s));
        auto res = attention_step(g, ba, g.param(query), evars);
        return g.add(g.sum(g.mul(res.context, res.context)),
                     g.sum(g.mul(res.weights, res.weights)));
    };
    std::vector<ParamT<double>*> params = {&attn.w_enc, &attn.w_dec, &attn.b, &attn.v, &query};
    for (auto& s : states) params.push_back(&s);
    return grad_check(fwd, params, 1e-5, 0, seed);
}

GradCheckReport check_decoder_step(uint64_t seed) {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<double> model;
    model.init(cfg, 11, 13, seed);
    const std::vector<int> src = {4, 6, 5};
    const std::vector<int> tgt = {4, 7};

    auto fwd = [&](GraphD& g) {
        auto enc = bind_encoder(g, model.enc);
        auto dec = bind_decoder(g, model.dec);
        auto eg = bilstm_encode(g, enc, src);
        auto [loss, tokens] = sequence_loss(g, dec, eg, tgt);
        (void)tokens;
        return loss;
    };
    return grad_check(fwd, model.params(), 1e-5, 8, seed);
}

GradCheckReport check_probe(uint64_t seed, ProbeKind kind) {
    ProbeConfig cfg;
    cfg.kind = kind;
    cfg.hidden_size = 5;
    cfg.label_scheme = LabelScheme{SchemeKind::three_way};
    ProbeModelT<double> model;
    model.init(cfg, 6, seed);
    std::mt19937 rng(static_cast<uint32_t>(seed) + 17);
    const int batch = 4;
    auto features = random_values(batch * 6, rng);
    const std::vector<int> gold = {0, 2, 1, 0};

    auto fwd = [&](GraphD& g) {
        auto x = g.constant({batch, 6}, features);
        auto logits = probe_logits(g, model, x);
        return g.cross_entropy_rows(logits, gold);
    };
    return grad_check(fwd, model.params(), 1e-5, 0, seed);
}

}  // namespace

std::vector<GradCheckComponent> standard_grad_checks() {
    return {
        {"lstm_cell", check_lstm_cell},
        {"bilstm_layer", check_bilstm_layer},
        {"attention", check_attention},
        {"decoder_step", check_decoder_step},
        {"linear_probe", [](uint64_t s) { return check_probe(s, ProbeKind::linear); }},
        {"mlp_probe", [](uint64_t s) { return check_probe(s, ProbeKind::mlp); }},
    };
}

std::vector<GradCheckSuiteRow> run_grad_check_suite(
    const std::vector<GradCheckComponent>& components, const std::vector<uint64_t>& seeds,
    double tolerance) {
    std::vector<GradCheckSuiteRow> rows;
    for (const auto& comp : components) {
        GradCheckSuiteRow row;
        row.component = comp.name;
        for (uint64_t seed : seeds)
            row.max_rel_err = std::max(row.max_rel_err, comp.run(seed).max_rel_err());
        row.pass = row.max_rel_err < tolerance;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace seqprobe
