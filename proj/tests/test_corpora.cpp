#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "seqprobe/corpora.hpp"
#include "testutil.hpp"

using namespace seqprobe;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("corpora");

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string repeat_tokens(const std::string& tok, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += " ";
        out += tok;
    }
    return out;
}

}  // namespace

TEST_CASE("load_parallel applies the strict >max_len filter in training mode") {
    auto dir = testutil::scratch_dir("parallel");
    testutil::write_file(dir / "src.txt", join_lines({repeat_tokens("s", 51),
                                                      repeat_tokens("s", 50),
                                                      "a b c"}));
    testutil::write_file(dir / "tgt.txt", join_lines({repeat_tokens("t", 3),
                                                      repeat_tokens("t", 50),
                                                      "x y"}));

    auto [kept, stats] = load_parallel((dir / "src.txt").string(), (dir / "tgt.txt").string(), 50);
    CHECK(kept.size() == 2);  // 51-token source dropped, exact-50 pair kept
    CHECK(stats.dropped_long == 1);
    CHECK(kept[0].source_tokens.size() == 50);

    // test mode keeps everything regardless of length
    auto [all, stats2] = load_parallel((dir / "src.txt").string(), (dir / "tgt.txt").string(),
                                       std::nullopt);
    CHECK(all.size() == 3);
    CHECK(stats2.dropped_long == 0);
    fs::remove_all(dir);
}

TEST_CASE("load_parallel filtering is monotone in max_len") {
    auto dir = testutil::scratch_dir("parallel_mono");
    std::mt19937 rng(5);
    std::vector<std::string> src, tgt;
    for (int i = 0; i < 40; ++i) {
        src.push_back(repeat_tokens("s", 1 + static_cast<int>(rng() % 20)));
        tgt.push_back(repeat_tokens("t", 1 + static_cast<int>(rng() % 20)));
    }
    testutil::write_file(dir / "src.txt", join_lines(src));
    testutil::write_file(dir / "tgt.txt", join_lines(tgt));

    size_t prev = 0;
    for (int max_len : {3, 5, 8, 12, 20}) {
        auto [kept, stats] = load_parallel((dir / "src.txt").string(),
                                           (dir / "tgt.txt").string(), max_len);
        CHECK(kept.size() >= prev);
        prev = kept.size();
    }
    fs::remove_all(dir);
}

TEST_CASE("load_parallel reports alignment and format errors") {
    auto dir = testutil::scratch_dir("parallel_err");
    testutil::write_file(dir / "src.txt", "a b\nc d\n");
    testutil::write_file(dir / "tgt.txt", "x\n");
    CHECK_THROWS_WITH_AS(
        load_parallel((dir / "src.txt").string(), (dir / "tgt.txt").string(), std::nullopt),
        doctest::Contains("2"), AlignmentError);

    testutil::write_file(dir / "src3.txt", "a b\n\n");
    testutil::write_file(dir / "tgt3.txt", "x\ny\n");
    CHECK_THROWS_WITH_AS(
        load_parallel((dir / "src3.txt").string(), (dir / "tgt3.txt").string(), std::nullopt),
        doctest::Contains("line 2"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("build_vocab keeps top tokens by frequency with lexicographic ties") {
    std::vector<std::vector<std::string>> corpus = {{"a", "a", "b"}, {"a", "b", "c"}};
    auto v = build_vocab(corpus, 6);
    CHECK(v.size() == 6);
    CHECK(v.contains("a"));
    CHECK(v.contains("b"));
    CHECK(!v.contains("c"));
    CHECK(v.id_of("c") == kUnk);

    // tie between equally frequent tokens goes to the smaller string
    auto v2 = build_vocab({{"b", "a"}, {"a", "b"}}, 5);
    CHECK(v2.contains("a"));
    CHECK(!v2.contains("b"));

    Vocabulary defaults;
    CHECK(defaults.max_size == 75000);
}

TEST_CASE("encode handles boundaries, UNK and round-trips known tokens") {
    auto v = build_vocab({{"hello", "world", "hello"}}, 10);
    auto ids = v.encode({"hello", "world"}, false);
    CHECK(v.decode(ids) == std::vector<std::string>{"hello", "world"});

    CHECK(v.encode({"martian"}, false) == std::vector<int>{kUnk});
    CHECK(v.encode({}, true) == std::vector<int>{kBos, kEos});

    auto wrapped = v.encode({"world"}, true);
    CHECK(wrapped.size() == 3);
    CHECK(wrapped.front() == kBos);
    CHECK(wrapped.back() == kEos);
}

TEST_CASE("vocabulary files round-trip") {
    auto dir = testutil::scratch_dir("vocab");
    auto v = build_vocab({{"x", "y", "x", "z"}}, 7);
    v.save((dir / "v.vocab").string());
    auto loaded = Vocabulary::load((dir / "v.vocab").string());
    CHECK(loaded.size() == v.size());
    for (int i = 0; i < v.size(); ++i) CHECK(loaded.token_of(i) == v.token_of(i));
    fs::remove_all(dir);
}

TEST_CASE("label schemes are closed") {
    auto two = LabelScheme::parse("two_way");
    CHECK(two.num_labels() == 2);
    CHECK(two.index_of("entailed") == 0);
    CHECK(two.index_of("not_entailed") == 1);
    CHECK(two.index_of("neutral") == -1);

    auto three = LabelScheme::parse("three_way");
    CHECK(three.num_labels() == 3);
    CHECK(three.index_of("contradiction") >= 0);
    CHECK_THROWS_AS(LabelScheme::parse("five_way"), ValidationError);
}

TEST_CASE("load_nli validates labels against the scheme") {
    auto dir = testutil::scratch_dir("nli");
    testutil::write_file(dir / "bad.tsv",
                         "context\thypothesis\tlabel\n"
                         "a b\tc d\tentailed\n"
                         "e f\tg h\tneutral\n");
    CHECK_THROWS_WITH_AS(load_nli((dir / "bad.tsv").string(), LabelScheme::parse("two_way")),
                         doctest::Contains("row 3"), LabelError);

    testutil::write_file(dir / "nohdr.tsv", "context\thypothesis\na\tb\n");
    CHECK_THROWS_WITH_AS(load_nli((dir / "nohdr.tsv").string(), LabelScheme::parse("two_way")),
                         doctest::Contains("label"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("load_nli reads meta columns") {
    auto dir = testutil::scratch_dir("nli_meta");
    testutil::write_file(dir / "test.tsv",
                         "context\thypothesis\tlabel\tattribute\ttag_match\tgenre\n"
                         "Berry rejoins WPP\tBerry was sentient\tentailed\tsentient\tsame\tnews\n"
                         "a b c\td e\tnot_entailed\tvolitional\tdifferent\tfiction\n");
    auto [rows, stats] = load_nli((dir / "test.tsv").string(), LabelScheme::parse("two_way"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].attribute == "sentient");
    CHECK(rows[0].tag_match == TagMatch::same);
    CHECK(rows[0].genre == "news");
    CHECK(rows[1].tag_match == TagMatch::different);
    CHECK(rows[0].context == std::vector<std::string>{"Berry", "rejoins", "WPP"});
    CHECK(stats.count == 2);
    CHECK(stats.label_histogram.at("entailed") == 1);
    fs::remove_all(dir);
}

TEST_CASE("dataset directory stats match a DPR-shaped corpus and a recount oracle") {
    auto dir = testutil::scratch_dir("nli_dpr");
    std::mt19937 rng(9);
    auto scheme = LabelScheme::parse("two_way");
    auto make_split = [&](int n) {
        std::ostringstream os;
        os << "context\thypothesis\tlabel\n";
        std::vector<std::string> golds;
        for (int i = 0; i < n; ++i) {
            const std::string label = rng() % 2 ? "entailed" : "not_entailed";
            golds.push_back(label);
            os << "tok" << i << " x\thyp " << i << "\t" << label << "\n";
        }
        return std::make_pair(os.str(), golds);
    };
    auto [train_text, train_golds] = make_split(2000);
    auto [dev_text, dev_golds] = make_split(400);
    auto [test_text, test_golds] = make_split(1000);
    testutil::write_file(dir / "train.tsv", train_text);
    testutil::write_file(dir / "dev.tsv", dev_text);
    testutil::write_file(dir / "test.tsv", test_text);

    auto ds = load_nli_dataset(dir.string(), scheme);
    CHECK(ds.stats.splits.at("train").count == 2000);
    CHECK(ds.stats.splits.at("dev").count == 400);
    CHECK(ds.stats.splits.at("test").count == 1000);
    REQUIRE(ds.tests.size() == 1);
    CHECK(ds.tests[0].first == "test");

    auto oracle = oracles::histogram(train_golds);
    for (const auto& [label, n] : ds.stats.splits.at("train").label_histogram)
        CHECK(n == oracle.at(label));
    int64_t total = 0;
    for (const auto& [label, n] : ds.stats.splits.at("train").label_histogram) total += n;
    CHECK(total == 2000);

    // row order in file = example order
    CHECK(ds.train[0].context[0] == "tok0");
    CHECK(ds.train[1999].context[0] == "tok1999");
    fs::remove_all(dir);
}

TEST_CASE("multi-test-set datasets load every test*.tsv in sorted order") {
    auto dir = testutil::scratch_dir("nli_multi");
    const char* hdr = "context\thypothesis\tlabel\n";
    testutil::write_file(dir / "test_matched.tsv",
                         std::string(hdr) + "a\tb\tentailment\n");
    testutil::write_file(dir / "test_mismatched.tsv",
                         std::string(hdr) + "c\td\tneutral\ne\tf\tcontradiction\n");
    auto ds = load_nli_dataset(dir.string(), LabelScheme::parse("three_way"));
    CHECK(!ds.has_train());
    REQUIRE(ds.tests.size() == 2);
    CHECK(ds.tests[0].first == "test_matched");
    CHECK(ds.tests[1].first == "test_mismatched");
    CHECK(ds.tests[1].second.size() == 2);
    fs::remove_all(dir);
}

TEST_SUITE_END();
