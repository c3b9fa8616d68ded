#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqprobe/probe.hpp"
#include "testutil.hpp"

using namespace seqprobe;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("probe");

namespace {

// two well-separated Gaussian blobs in feature space
void make_blobs(int n, int dim, std::mt19937& rng, FeatureMatrix& feats,
                std::vector<int>& labels) {
    std::normal_distribution<float> noise(0.0f, 0.3f);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        std::vector<float> f(dim);
        for (auto& v : f) v = noise(rng);
        f[0] += label ? 2.0f : -2.0f;
        feats.push_back(std::move(f));
        labels.push_back(label);
    }
}

}  // namespace

TEST_CASE("linear probe separates Gaussian blobs to dev accuracy 1.0") {
    std::mt19937 rng(5);
    FeatureMatrix train, dev;
    std::vector<int> trl, del;
    make_blobs(2000, 8, rng, train, trl);
    make_blobs(400, 8, rng, dev, del);

    ProbeConfig cfg;
    cfg.kind = ProbeKind::linear;
    cfg.label_scheme = LabelScheme{SchemeKind::two_way};
    cfg.max_epochs = 50;
    cfg.seed = 1;
    ProbeTrainLog log;
    auto model = train_probe(train, trl, dev, del, cfg, &log);
    CHECK(log.best_dev_accuracy == 1.0);
    CHECK(log.best_epoch <= 50);

    // training loss trends down on separable data
    CHECK(log.epochs.back().train_loss < log.epochs.front().train_loss);
}

TEST_CASE("three-way scheme gives an output layer of width 3") {
    ProbeConfig cfg;
    cfg.kind = ProbeKind::linear;
    cfg.label_scheme = LabelScheme{SchemeKind::three_way};
    ProbeModel model;
    model.init(cfg, 10, 0);
    CHECK(model.weights.back().tensor.shape == Shape{10, 3});
    CHECK(model.biases.back().tensor.shape == Shape{3});
    CHECK(predict(model, std::vector<float>(10, 0.1f)).size() == 3);
}

TEST_CASE("training is deterministic per seed") {
    std::mt19937 rng(7);
    FeatureMatrix train, dev;
    std::vector<int> trl, del;
    make_blobs(300, 6, rng, train, trl);
    make_blobs(60, 6, rng, dev, del);

    ProbeConfig cfg;
    cfg.kind = ProbeKind::mlp;
    cfg.hidden_size = 8;
    cfg.label_scheme = LabelScheme{SchemeKind::two_way};
    cfg.max_epochs = 5;
    cfg.seed = 42;
    auto a = train_probe(train, trl, dev, del, cfg);
    auto b = train_probe(train, trl, dev, del, cfg);
    REQUIRE(a.weights.size() == b.weights.size());
    for (size_t i = 0; i < a.weights.size(); ++i) {
        CHECK(a.weights[i].tensor.data == b.weights[i].tensor.data);
        CHECK(a.biases[i].tensor.data == b.biases[i].tensor.data);
    }
}

TEST_CASE("predict: zero linear model is uniform; distributions sum to one") {
    ProbeConfig cfg;
    cfg.kind = ProbeKind::linear;
    cfg.label_scheme = LabelScheme{SchemeKind::three_way};
    ProbeModel model;
    model.init(cfg, 4, 0);
    for (auto& v : model.weights[0].tensor.data) v = 0.0f;

    auto dist = predict(model, {1.0f, -2.0f, 0.5f, 3.0f});
    for (float p : dist) CHECK(p == doctest::Approx(1.0 / 3));

    std::mt19937 rng(11);
    ProbeModel rnd;
    rnd.init(cfg, 4, 3);
    double sum = 0.0;
    for (float p : predict(rnd, oracles::random_vec_f(4, rng))) sum += p;
    CHECK(std::fabs(sum - 1.0) < 1e-6);

    CHECK_THROWS_AS(predict(model, {1.0f}), ShapeError);
}

TEST_CASE("mlp with zeroed hidden weights predicts a constant") {
    ProbeConfig cfg;
    cfg.kind = ProbeKind::mlp;
    cfg.hidden_size = 6;
    cfg.label_scheme = LabelScheme{SchemeKind::two_way};
    ProbeModel model;
    model.init(cfg, 5, 1);
    for (auto& v : model.weights[0].tensor.data) v = 0.0f;
    for (auto& v : model.biases[0].tensor.data) v = 0.0f;

    std::mt19937 rng(13);
    auto d1 = predict(model, oracles::random_vec_f(5, rng));
    auto d2 = predict(model, oracles::random_vec_f(5, rng));
    CHECK(d1 == d2);
}

TEST_CASE("prediction ties break to the lowest label index") {
    ProbeConfig cfg;
    cfg.kind = ProbeKind::linear;
    cfg.label_scheme = LabelScheme{SchemeKind::three_way};
    ProbeModel model;
    model.init(cfg, 2, 0);
    for (auto& v : model.weights[0].tensor.data) v = 0.0f;
    for (auto& v : model.biases[0].tensor.data) v = 0.0f;
    auto labels = predict_batch(model, {{0.3f, 0.4f}, {1.0f, -1.0f}});
    CHECK(labels == std::vector<int>{0, 0});
}

TEST_CASE("predict_batch preserves order and matches per-example predict") {
    std::mt19937 rng(17);
    ProbeConfig cfg;
    cfg.kind = ProbeKind::mlp;
    cfg.hidden_size = 7;
    cfg.label_scheme = LabelScheme{SchemeKind::three_way};
    ProbeModel model;
    model.init(cfg, 6, 9);

    FeatureMatrix feats;
    for (int i = 0; i < 100; ++i) feats.push_back(oracles::random_vec_f(6, rng));
    auto batched = predict_batch(model, feats);
    REQUIRE(batched.size() == 100);
    for (size_t i = 0; i < feats.size(); ++i) {
        auto dist = predict(model, feats[i]);
        int arg = 0;
        for (size_t j = 1; j < dist.size(); ++j)
            if (dist[j] > dist[arg]) arg = static_cast<int>(j);
        CHECK(batched[i] == arg);
    }

    // batch of one equals single predict; permuting inputs permutes outputs
    CHECK(predict_batch(model, {feats[3]})[0] == batched[3]);
    FeatureMatrix reversed(feats.rbegin(), feats.rend());
    auto rev = predict_batch(model, reversed);
    for (size_t i = 0; i < rev.size(); ++i) CHECK(rev[i] == batched[99 - i]);
}

TEST_CASE("config validation: mlp needs a hidden layer, labels must fit the scheme") {
    ProbeConfig cfg;
    cfg.kind = ProbeKind::mlp;
    cfg.hidden_size = 0;
    cfg.label_scheme = LabelScheme{SchemeKind::two_way};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    ProbeConfig ok;
    ok.kind = ProbeKind::linear;
    ok.hidden_size = 0;  // ignored by the linear model
    ok.label_scheme = LabelScheme{SchemeKind::two_way};
    FeatureMatrix train = {{0.0f, 1.0f}, {1.0f, 0.0f}};
    CHECK_NOTHROW(train_probe(train, {0, 1}, train, {0, 1}, ok));
    CHECK_THROWS_AS(train_probe(train, {0, 2}, train, {0, 1}, ok), LabelError);
    FeatureMatrix ragged = {{0.0f, 1.0f}, {1.0f}};
    CHECK_THROWS_AS(train_probe(ragged, {0, 1}, train, {0, 1}, ok), ShapeError);
}

TEST_CASE("probe files round-trip to bit-identical predictions") {
    auto dir = testutil::scratch_dir("probe_io");
    std::mt19937 rng(19);
    FeatureMatrix train, dev;
    std::vector<int> trl, del;
    make_blobs(200, 6, rng, train, trl);
    make_blobs(40, 6, rng, dev, del);

    ProbeConfig cfg;
    cfg.kind = ProbeKind::mlp;
    cfg.hidden_size = 8;
    cfg.label_scheme = LabelScheme{SchemeKind::two_way};
    cfg.max_epochs = 10;
    cfg.seed = 2;
    auto model = train_probe(train, trl, dev, del, cfg);

    const std::string path = (dir / "probe.sprb").string();
    save_probe(path, model, {{"note", "unit"}});
    std::vector<std::pair<std::string, std::string>> extra;
    auto loaded = load_probe(path, &extra);
    CHECK(extra == std::vector<std::pair<std::string, std::string>>{{"note", "unit"}});
    CHECK(loaded.cfg.kind == ProbeKind::mlp);
    CHECK(loaded.input_dim == 6);
    for (const auto& f : dev) CHECK(predict(loaded, f) == predict(model, f));
    fs::remove_all(dir);
}

TEST_SUITE_END();
