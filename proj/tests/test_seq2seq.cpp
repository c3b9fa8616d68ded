#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqprobe/seq2seq.hpp"
#include "testutil.hpp"

using namespace seqprobe;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("seq2seq");

namespace {

// vocab of n symbol tokens on top of the reserved four
Vocabulary symbol_vocab(int n) {
    std::vector<std::vector<std::string>> corpus(1);
    for (int i = 0; i < n; ++i) corpus[0].push_back("sym" + std::to_string(i));
    return build_vocab(corpus, n + kNumReserved);
}

std::vector<ParallelExample> copy_pairs(int count, int vocab_symbols, int min_len, int max_len,
                                        std::mt19937& rng) {
    std::vector<ParallelExample> out;
    for (int i = 0; i < count; ++i) {
        const int len = min_len + static_cast<int>(rng() % (max_len - min_len + 1));
        ParallelExample ex;
        for (int t = 0; t < len; ++t) {
            const std::string tok = "sym" + std::to_string(rng() % vocab_symbols);
            ex.source_tokens.push_back(tok);
            ex.target_tokens.push_back(tok);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

template <class S>
void zero_params(std::vector<ParamT<S>*> params) {
    for (auto* p : params) std::fill(p->tensor.data.begin(), p->tensor.data.end(), S(0));
}

}  // namespace

TEST_CASE("lstm cell: zero parameters and inputs give zero state") {
    std::mt19937 rng(1);
    LstmCellParamsT<float> cell;
    cell.init("c", 3, 4, rng);
    zero_params<float>({&cell.wx, &cell.wh, &cell.b});

    Graph g;
    auto bc = bind_cell(g, cell);
    LstmStateT<float> st{g.zeros(4), g.zeros(4)};
    auto next = lstm_cell_step(g, g.zeros(3), st, bc);
    for (float v : g.val(next.c)) CHECK(v == 0.0f);
    for (float v : g.val(next.h)) CHECK(v == 0.0f);
}

TEST_CASE("lstm cell: saturated forget gate retains the cell") {
    std::mt19937 rng(2);
    LstmCellParamsT<float> cell;
    cell.init("c", 3, 4, rng);
    zero_params<float>({&cell.wx, &cell.wh, &cell.b});
    for (int j = 4; j < 8; ++j) cell.b.tensor.data[j] = 25.0f;  // forget gate slice

    Graph g;
    auto bc = bind_cell(g, cell);
    auto c0 = g.constant({4}, {5.0f, -3.0f, 0.5f, 2.0f});
    auto next = lstm_cell_step(g, g.zeros(3), {g.zeros(4), c0}, bc);
    for (int j = 0; j < 4; ++j)
        CHECK(g.val(next.c)[j] == doctest::Approx(g.val(c0)[j]).epsilon(1e-6));
}

TEST_CASE("lstm cell matches the scalar loop-per-gate oracle") {
    std::mt19937 rng(3);
    const int in_dim = 2, d = 3;
    LstmCellParamsT<double> cell;
    cell.init("c", in_dim, d, rng);
    auto x = oracles::random_vec(in_dim, rng);
    auto h0 = oracles::random_vec(d, rng);
    auto c0 = oracles::random_vec(d, rng);

    GraphD g;
    auto bc = bind_cell(g, cell);
    auto next = lstm_cell_step(g, g.constant({in_dim}, x),
                               {g.constant({d}, h0), g.constant({d}, c0)}, bc);

    auto expect = oracles::lstm_step(x, h0, c0, cell.wx.tensor.data, cell.wh.tensor.data,
                                     cell.b.tensor.data, in_dim, d);
    for (int j = 0; j < d; ++j) {
        CHECK(std::fabs(g.val(next.h)[j] - expect.h[j]) < 1e-6);
        CHECK(std::fabs(g.val(next.c)[j] - expect.c[j]) < 1e-6);
    }
}

TEST_CASE("bilstm: single-token sentence exposes both directions at position 1") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 10, 10, 5);
    auto out = encode_sentence(model, {4});
    CHECK(out.length == 1);
    CHECK(out.layers == 2);
    for (int l = 0; l < 2; ++l)
        for (int dir = 0; dir < 2; ++dir)
            CHECK(std::isfinite(out.state(l, dir, 0)[0]));
    CHECK_THROWS_AS(encode_sentence(model, {}), InputError);
}

TEST_CASE("bilstm: reversing the input swaps directions under tied parameters") {
    NmtConfig cfg;
    cfg.d = 5;
    cfg.layers = 1;
    NmtModelT<float> model;
    model.init(cfg, 12, 12, 7);
    // tie the backward cell to the forward cell
    model.enc.layers[0].bwd.wx.tensor.data = model.enc.layers[0].fwd.wx.tensor.data;
    model.enc.layers[0].bwd.wh.tensor.data = model.enc.layers[0].fwd.wh.tensor.data;
    model.enc.layers[0].bwd.b.tensor.data = model.enc.layers[0].fwd.b.tensor.data;

    const std::vector<int> seq = {4, 7, 5, 9};
    std::vector<int> rev(seq.rbegin(), seq.rend());
    auto a = encode_sentence(model, seq);
    auto b = encode_sentence(model, rev);
    const int n = static_cast<int>(seq.size());
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < cfg.d; ++j) {
            CHECK(a.state(0, 0, t)[j] == b.state(0, 1, n - 1 - t)[j]);
            CHECK(a.state(0, 1, t)[j] == b.state(0, 0, n - 1 - t)[j]);
        }
}

TEST_CASE("bilstm matches a per-position unrolled oracle built from lstm_cell_step") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 9, 9, 11);
    const std::vector<int> seq = {4, 8, 6};
    auto out = encode_sentence(model, seq);

    // oracle: drive lstm_cell_step by hand, layer by layer
    Graph g;
    auto enc = bind_encoder(g, model.enc);
    const int n = 3, d = 4;
    std::vector<Graph::Var> inputs;
    auto emb = g.lookup(model.enc.embed, seq);
    for (int t = 0; t < n; ++t) inputs.push_back(g.row(emb, t));

    for (int l = 0; l < 2; ++l) {
        std::vector<LstmStateT<float>> fwd(n), bwd(n);
        LstmStateT<float> st{g.zeros(d), g.zeros(d)};
        for (int t = 0; t < n; ++t) {
            st = lstm_cell_step(g, inputs[t], st, enc.fwd[l]);
            fwd[t] = st;
        }
        st = {g.zeros(d), g.zeros(d)};
        for (int t = n - 1; t >= 0; --t) {
            st = lstm_cell_step(g, inputs[t], st, enc.bwd[l]);
            bwd[t] = st;
        }
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < d; ++j) {
                CHECK(out.state(l, 0, t)[j] == g.val(fwd[t].h)[j]);
                CHECK(out.state(l, 1, t)[j] == g.val(bwd[t].h)[j]);
                CHECK(out.cell(l, 0, t)[j] == g.val(fwd[t].c)[j]);
                CHECK(out.cell(l, 1, t)[j] == g.val(bwd[t].c)[j]);
            }
        if (l == 0)
            for (int t = 0; t < n; ++t) inputs[t] = g.concat({fwd[t].h, bwd[t].h});
    }
}

TEST_CASE("attention: weights are a distribution; n=1 is the identity") {
    std::mt19937 rng(13);
    AttentionParamsT<float> attn;
    attn.init("a", 4, rng);

    Graph g;
    auto ba = bind_attention(g, attn);
    std::vector<Graph::Var> states;
    for (int i = 0; i < 5; ++i)
        states.push_back(g.constant({8}, oracles::random_vec_f(8, rng)));
    auto q = g.constant({4}, oracles::random_vec_f(4, rng));
    auto res = attention_step(g, ba, q, states);
    double sum = 0.0;
    for (float w : g.val(res.weights)) sum += w;
    CHECK(std::fabs(sum - 1.0) < 1e-6);

    auto res1 = attention_step(g, ba, q, std::vector<Graph::Var>{states[0]});
    CHECK(g.val(res1.weights) == std::vector<float>{1.0f});
    CHECK(g.val(res1.context) == g.val(states[0]));

    CHECK_THROWS_AS(attention_step(g, ba, q, std::vector<Graph::Var>{}), InputError);
}

TEST_CASE("attention with zeroed score parameters is uniform averaging") {
    std::mt19937 rng(17);
    AttentionParamsT<float> attn;
    attn.init("a", 3, rng);
    zero_params<float>({&attn.w_enc, &attn.w_dec, &attn.b, &attn.v});

    Graph g;
    auto ba = bind_attention(g, attn);
    std::vector<Graph::Var> states;
    std::vector<float> mean(6, 0.0f);
    const int n = 4;
    for (int i = 0; i < n; ++i) {
        auto vals = oracles::random_vec_f(6, rng);
        for (int j = 0; j < 6; ++j) mean[j] += vals[j] / n;
        states.push_back(g.constant({6}, vals));
    }
    auto res = attention_step(g, ba, g.constant({3}, oracles::random_vec_f(3, rng)), states);
    for (float w : g.val(res.weights)) CHECK(w == doctest::Approx(0.25));
    for (int j = 0; j < 6; ++j) CHECK(g.val(res.context)[j] == doctest::Approx(mean[j]));
}

TEST_CASE("decode_step: logits cover the target vocabulary, deterministically") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 9, 14, 19);
    const std::vector<int> src = {4, 5};

    auto run_once = [&]() {
        Graph g;
        auto enc = bind_encoder(g, model.enc);
        auto dec = bind_decoder(g, model.dec);
        auto eg = bilstm_encode(g, enc, src);
        auto stacked = g.stack_rows(eg.top);
        auto proj = g.matmul(stacked, dec.attn.w_enc);
        auto state = decoder_init(g, dec, eg);
        auto step = decode_step(g, dec, kBos, state, stacked, proj);
        return std::make_pair(g.val(step.logits), g.val(step.attn_weights));
    };
    auto [logits1, w1] = run_once();
    auto [logits2, w2] = run_once();
    CHECK(logits1.size() == 14);
    CHECK(logits1 == logits2);  // bit-identical
    double sum = 0.0;
    for (float w : w1) sum += w;
    CHECK(std::fabs(sum - 1.0) < 1e-6);
}

TEST_CASE("teacher-forced loss equals the per-step cross-entropy sum") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 9, 11, 23);
    const std::vector<int> src = {4, 6, 8};
    const std::vector<int> tgt = {5, 7, 4};

    Graph g;
    auto enc = bind_encoder(g, model.enc);
    auto dec = bind_decoder(g, model.dec);
    auto eg = bilstm_encode(g, enc, src);
    auto [loss, tokens] = sequence_loss(g, dec, eg, tgt);
    CHECK(tokens == 4);  // three target tokens plus EOS

    // oracle: replay decode_step by hand and sum -log softmax[gold]
    Graph g2;
    auto enc2 = bind_encoder(g2, model.enc);
    auto dec2 = bind_decoder(g2, model.dec);
    auto eg2 = bilstm_encode(g2, enc2, src);
    auto stacked = g2.stack_rows(eg2.top);
    auto proj = g2.matmul(stacked, dec2.attn.w_enc);
    auto state = decoder_init(g2, dec2, eg2);
    double expected = 0.0;
    int prev = kBos;
    std::vector<int> golds = {5, 7, 4, kEos};
    for (int gold : golds) {
        auto step = decode_step(g2, dec2, prev, state, stacked, proj);
        std::vector<double> logits(g2.val(step.logits).begin(), g2.val(step.logits).end());
        expected += oracles::cross_entropy(logits, gold);
        state = step.state;
        prev = gold;
    }
    CHECK(g.val(loss)[0] == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("perplexity: uniform model gives |V|, perfect loss gives 1") {
    CHECK(perplexity_from(0.0, 100) == doctest::Approx(1.0));

    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 1;
    NmtModelT<float> model;
    model.init(cfg, 9, 9, 29);
    // zero the output projection so every step emits uniform logits
    zero_params<float>({&model.dec.w_out, &model.dec.b_out});

    auto vocab = symbol_vocab(5);
    REQUIRE(vocab.size() == 9);
    std::vector<ParallelExample> data = {{{"sym0", "sym1"}, {"sym2"}},
                                         {{"sym3"}, {"sym4", "sym0"}}};
    const double ppl = perplexity(model, vocab, vocab, data);
    CHECK(ppl == doctest::Approx(9.0).epsilon(1e-5));
}

TEST_CASE("perplexity matches the direct formula oracle on a tiny corpus") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 9, 9, 31);
    auto vocab = symbol_vocab(5);
    std::vector<ParallelExample> data = {{{"sym0", "sym1"}, {"sym1", "sym0"}},
                                         {{"sym2"}, {"sym2", "sym3", "sym4"}}};

    // oracle: accumulate -log p(gold) per step through the public decode path
    double ce = 0.0;
    int64_t tokens = 0;
    for (const auto& ex : data) {
        const auto src = vocab.encode(ex.source_tokens, false);
        auto tgt = vocab.encode(ex.target_tokens, false);
        Graph g;
        auto enc = bind_encoder(g, model.enc);
        auto dec = bind_decoder(g, model.dec);
        auto eg = bilstm_encode(g, enc, src);
        auto stacked = g.stack_rows(eg.top);
        auto proj = g.matmul(stacked, dec.attn.w_enc);
        auto state = decoder_init(g, dec, eg);
        int prev = kBos;
        tgt.push_back(kEos);
        for (int gold : tgt) {
            auto step = decode_step(g, dec, prev, state, stacked, proj);
            std::vector<double> logits(g.val(step.logits).begin(), g.val(step.logits).end());
            ce += oracles::cross_entropy(logits, gold);
            tokens += 1;
            state = step.state;
            prev = gold;
        }
    }
    const double expected = std::exp(ce / static_cast<double>(tokens));
    CHECK(perplexity(model, vocab, vocab, data) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("batched encoding equals per-sentence encoding") {
    NmtConfig cfg;
    cfg.d = 6;
    cfg.layers = 2;
    NmtModelT<float> model;
    model.init(cfg, 20, 20, 37);
    std::mt19937 rng(37);
    std::vector<std::vector<int>> sentences;
    for (int i = 0; i < 30; ++i) {
        std::vector<int> s;
        const int len = 1 + static_cast<int>(rng() % 7);
        for (int t = 0; t < len; ++t) s.push_back(4 + static_cast<int>(rng() % 16));
        sentences.push_back(std::move(s));
    }
    auto batched = encode_sentences(model, sentences);
    REQUIRE(batched.size() == sentences.size());
    for (size_t i = 0; i < sentences.size(); ++i) {
        auto single = encode_sentence(model, sentences[i]);
        CHECK(single.states == batched[i].states);
        CHECK(single.cells == batched[i].cells);
    }
}

TEST_CASE("training: frozen learning rate stops after exactly patience evaluations") {
    std::mt19937 rng(41);
    auto pairs = copy_pairs(24, 6, 2, 4, rng);
    std::vector<ParallelExample> dev(pairs.begin() + 16, pairs.end());
    pairs.resize(16);
    auto vocab = symbol_vocab(6);

    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 1;
    cfg.learning_rate = 0.0f;  // frozen: dev perplexity can never improve
    cfg.batch_size = 8;
    cfg.eval_every = 2;
    cfg.patience = 3;
    cfg.max_steps = 100;
    TrainLog log;
    auto ckpt = train_nmt(pairs, dev, vocab, vocab, cfg, 1, &log);
    // first evaluation sets the best; exactly three more then stop
    CHECK(log.evals.size() == 4);
    CHECK(log.evals[0].improved);
    for (size_t i = 1; i < log.evals.size(); ++i) CHECK(!log.evals[i].improved);
    CHECK(ckpt.step == 2);
}

TEST_CASE("training is deterministic: same seed, same data, identical checkpoints") {
    std::mt19937 rng(43);
    auto pairs = copy_pairs(40, 8, 2, 5, rng);
    std::vector<ParallelExample> dev(pairs.begin() + 32, pairs.end());
    pairs.resize(32);
    auto vocab = symbol_vocab(8);

    NmtConfig cfg;
    cfg.d = 6;
    cfg.layers = 2;
    cfg.batch_size = 8;
    cfg.eval_every = 10;
    cfg.patience = 5;
    cfg.max_steps = 30;
    cfg.learning_rate = 0.5f;

    auto c1 = train_nmt(pairs, dev, vocab, vocab, cfg, 99);
    auto c2 = train_nmt(pairs, dev, vocab, vocab, cfg, 99);
    REQUIRE(c1.params.size() == c2.params.size());
    for (size_t i = 0; i < c1.params.size(); ++i) {
        CHECK(c1.params[i].name == c2.params[i].name);
        CHECK(c1.params[i].tensor.data == c2.params[i].tensor.data);
    }
    CHECK(c1.dev_metric == c2.dev_metric);

    // a different seed must move at least one parameter
    auto c3 = train_nmt(pairs, dev, vocab, vocab, cfg, 100);
    bool any_diff = false;
    for (size_t i = 0; i < c1.params.size() && !any_diff; ++i)
        any_diff = c1.params[i].tensor.data != c3.params[i].tensor.data;
    CHECK(any_diff);
}

TEST_CASE("training explosion reports the failing step") {
    std::mt19937 rng(47);
    auto pairs = copy_pairs(16, 6, 2, 4, rng);
    std::vector<ParallelExample> dev(pairs.begin() + 12, pairs.end());
    pairs.resize(12);
    auto vocab = symbol_vocab(6);

    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 1;
    cfg.learning_rate = 1e30f;
    cfg.clip_norm = 1e30f;
    cfg.batch_size = 4;
    cfg.eval_every = 50;
    cfg.max_steps = 50;
    CHECK_THROWS_WITH_AS(train_nmt(pairs, dev, vocab, vocab, cfg, 7),
                         doctest::Contains("step"), ComputeError);
}

TEST_CASE("checkpoint bundle round-trips to bit-identical encodings") {
    auto dir = testutil::scratch_dir("bundle");
    std::mt19937 rng(53);
    auto pairs = copy_pairs(20, 6, 2, 5, rng);
    std::vector<ParallelExample> dev(pairs.begin() + 16, pairs.end());
    pairs.resize(16);
    auto vocab = symbol_vocab(6);

    NmtConfig cfg;
    cfg.d = 5;
    cfg.layers = 2;
    cfg.batch_size = 8;
    cfg.eval_every = 5;
    cfg.max_steps = 10;
    cfg.learning_rate = 0.5f;
    TrainLog log;
    auto ckpt = train_nmt(pairs, dev, vocab, vocab, cfg, 3, &log);

    NmtModel model;
    model.init(cfg, vocab.size(), vocab.size(), 0);
    apply_checkpoint(model, ckpt);
    const std::string path = (dir / "m.sprb").string();
    save_nmt_bundle(path, model, vocab, vocab, 3, ckpt.dev_metric, ckpt.step);

    auto bundle = load_nmt_bundle(path);
    CHECK(bundle.seed == 3);
    CHECK(bundle.model.cfg.d == 5);
    const std::vector<int> probe_sentence = {4, 7, 5};
    auto a = encode_sentence(model, probe_sentence);
    auto b = encode_sentence(bundle.model, probe_sentence);
    CHECK(a.states == b.states);
    CHECK(a.cells == b.cells);

    // tampering with the vocabulary file breaks compatibility
    {
        std::ofstream os(path + ".src.vocab", std::ios::app);
        os << "rogue_token\n";
    }
    CHECK_THROWS_AS(load_nmt_bundle(path), CompatibilityError);
    fs::remove_all(dir);
}

TEST_CASE("greedy decode emits target tokens until EOS") {
    NmtConfig cfg;
    cfg.d = 4;
    cfg.layers = 1;
    NmtModelT<float> model;
    model.init(cfg, 9, 9, 59);
    auto out = greedy_decode(model, {4, 5, 6}, 10);
    CHECK(out.size() <= 10);
    for (int tok : out) {
        CHECK(tok >= 0);
        CHECK(tok < 9);
    }
}

TEST_SUITE_END();
