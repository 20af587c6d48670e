#include <catch_amalgamated.hpp>

#include <random>

#include <ethics_triage/topics.hpp>

#include "support/oracles.hpp"

using namespace ethics_triage;

namespace {

LdaConfig quick_config(int k, std::uint64_t seed = 7, int iterations = 200) {
    auto c = LdaConfig::with_topics(k);
    c.iterations = iterations;
    c.burn_in = iterations / 4;
    c.seed = seed;
    return c;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out.emplace_back(m.row(r).begin(), m.row(r).end());
    }
    return out;
}

void require_row_stochastic(const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (double p : m.row(r)) {
            REQUIRE(p > 0.0);
            sum += p;
        }
        REQUIRE(std::abs(sum - 1.0) <= 1e-9);
    }
}

// Small synthetic corpus shared by several tests (3 topics, 30 terms).
struct SmallFixture {
    oracle::SyntheticLda truth = oracle::sample_lda_corpus(3, 30, 150, 80, 0.1, 0.3, 99);
    std::pair<Vocabulary, std::vector<BowDoc>> data = oracle::to_bows(truth);
    TopicModel model = train_lda(data.second, data.first, quick_config(3, 5, 300));
};

const SmallFixture& small() {
    static const SmallFixture f;
    return f;
}

} // namespace

TEST_CASE("LdaConfig validation", "[topics]") {
    auto c = LdaConfig::with_topics(50);
    CHECK(c.alpha == Catch::Approx(0.02));
    CHECK(c.beta == 0.01);
    CHECK(c.iterations == 1000);
    CHECK(c.burn_in == 200);
    CHECK_NOTHROW(c.validate());

    auto bad = c;
    bad.num_topics = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.beta = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.burn_in = bad.iterations;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.burn_in = -1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("train_lda rejects empty input and warns about oversized K", "[topics]") {
    const Vocabulary vocab({"x"});
    CHECK_THROWS_AS(train_lda({}, vocab, quick_config(2)), ValidationError);

    auto bow = to_bow({"x", "x"}, vocab, "d0");
    BowDoc empty;
    empty.doc_id = "d1";
    empty.vocab_fingerprint = vocab.fingerprint();
    TrainingLog log;
    const auto model = train_lda({bow, empty}, vocab, quick_config(3), &log);
    REQUIRE(log.warnings.size() == 2);
    CHECK_THAT(log.warnings[0], Catch::Matchers::ContainsSubstring("exceeds"));
    CHECK_THAT(log.warnings[1], Catch::Matchers::ContainsSubstring("d1"));
    // Skipped documents keep a row: the uniform prior mix.
    for (double p : model.theta.row(1)) {
        CHECK(p == Catch::Approx(1.0 / 3.0));
    }

    BowDoc foreign = bow;
    foreign.vocab_fingerprint = "0000";
    CHECK_THROWS_AS(train_lda({foreign}, vocab, quick_config(2)), ValidationError);
}

TEST_CASE("degenerate single-term corpus", "[topics]") {
    const std::vector<std::vector<std::string>> docs(5, std::vector<std::string>(20, "x"));
    const auto vocab = build_vocabulary(docs, 1);
    std::vector<BowDoc> bows;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        bows.push_back(to_bow(docs[i], vocab, "d" + std::to_string(i)));
    }
    auto config = quick_config(4);
    config.beta = 1e-6;
    const auto model = train_lda(bows, vocab, config);
    for (std::size_t k = 0; k < model.num_topics(); ++k) {
        CHECK(model.phi(k, 0) >= 1.0 - 1e-9);
        const auto top = top_words(model, static_cast<int>(k), 30);
        REQUIRE(top.size() == 1);
        CHECK(top[0].first == "x");
        CHECK(top[0].second == Catch::Approx(1.0));
    }
}

TEST_CASE("trained matrices are row-stochastic and strictly positive", "[topics]") {
    const auto& f = small();
    CHECK(f.model.phi.rows() == 3);
    CHECK(f.model.phi.cols() == 30);
    CHECK(f.model.theta.rows() == 150);
    require_row_stochastic(f.model.phi);
    require_row_stochastic(f.model.theta);
}

TEST_CASE("training is deterministic under a seed", "[topics]") {
    const auto& f = small();
    const auto again = train_lda(f.data.second, f.data.first, quick_config(3, 5, 300));
    CHECK(again.phi == f.model.phi);
    CHECK(again.theta == f.model.theta);
    CHECK(to_json(again).dump() == to_json(f.model).dump());

    const auto other = train_lda(f.data.second, f.data.first, quick_config(3, 6, 300));
    CHECK_FALSE(other.phi == f.model.phi);
}

TEST_CASE("small synthetic corpus is recovered", "[topics]") {
    const auto& f = small();
    const auto [tv, mapping] = oracle::greedy_aligned_tv(f.truth.phi, rows_of(f.model.phi));
    CHECK(tv <= 0.15);
}

TEST_CASE("corpus log-likelihood is invariant to document order", "[topics]") {
    const auto& f = small();
    auto permuted = f.data.second;
    std::mt19937_64 rng(1);
    std::shuffle(permuted.begin(), permuted.end(), rng);
    const auto model = train_lda(permuted, f.data.first, quick_config(3, 5, 300));
    const double a = log_likelihood(f.model, f.data.second);
    const double b = log_likelihood(model, f.data.second);
    CHECK(std::abs(a - b) <= 0.01 * std::abs(a));
}

TEST_CASE("infer_doc_topics", "[topics]") {
    const auto& f = small();

    SECTION("empty document gives the uniform mix") {
        BowDoc empty;
        empty.vocab_fingerprint = f.model.vocab_fingerprint();
        for (double p : infer_doc_topics(f.model, empty, 50)) {
            CHECK(p == Catch::Approx(1.0 / 3.0));
        }
    }

    SECTION("sums to one and is deterministic") {
        const auto a = infer_doc_topics(f.model, f.data.second[0], 100);
        const auto b = infer_doc_topics(f.model, f.data.second[0], 100);
        CHECK(a == b);
        double sum = 0.0;
        for (double p : a) {
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }

    SECTION("training documents reproduce their theta rows") {
        double worst = 0.0;
        double mean = 0.0;
        const std::size_t n = 40;
        for (std::size_t d = 0; d < n; ++d) {
            const auto mix = infer_doc_topics(f.model, f.data.second[d], 200);
            const auto row = f.model.theta.row(d);
            const double tv = oracle::total_variation(mix, {row.begin(), row.end()});
            worst = std::max(worst, tv);
            mean += tv / n;
        }
        INFO("worst " << worst << " mean " << mean);
        CHECK(mean <= 0.05);
    }

    SECTION("a document of one topic's signature terms lands on that topic") {
        const auto [tv, mapping] = oracle::greedy_aligned_tv(f.truth.phi, rows_of(f.model.phi));
        for (std::size_t t = 0; t < f.truth.topics; ++t) {
            // Terms whose probability under topic t dominates every other topic.
            BowDoc bow;
            bow.doc_id = "probe" + std::to_string(t);
            bow.vocab_fingerprint = f.model.vocab_fingerprint();
            for (std::size_t w = 0; w < f.truth.terms; ++w) {
                bool dominant = f.truth.phi[t][w] > 0.02;
                for (std::size_t o = 0; o < f.truth.topics; ++o) {
                    dominant = dominant && (o == t || f.truth.phi[t][w] > 5 * f.truth.phi[o][w]);
                }
                if (dominant) {
                    bow.counts[static_cast<std::uint32_t>(w)] = 5;
                }
            }
            REQUIRE_FALSE(bow.empty());
            const auto mix = infer_doc_topics(f.model, bow, 100);
            const auto argmax = static_cast<std::size_t>(std::max_element(mix.begin(), mix.end()) - mix.begin());
            CHECK(argmax == mapping[t]);
        }
    }

    SECTION("vocabulary mismatch is an error") {
        BowDoc bow = f.data.second[0];
        bow.vocab_fingerprint = "ffff";
        CHECK_THROWS_AS(infer_doc_topics(f.model, bow, 10), ValidationError);
        CHECK_THROWS_AS(log_likelihood(f.model, {bow}), ValidationError);
    }
}

TEST_CASE("top_words ranks by probability then term", "[topics]") {
    TopicModel m;
    m.config = LdaConfig::with_topics(2);
    m.vocab = Vocabulary({"delta", "alpha", "charlie", "bravo"});
    m.phi = Matrix(2, 4);
    const double row0[] = {0.1, 0.3, 0.3, 0.3};
    const double row1[] = {0.25, 0.25, 0.25, 0.25};
    std::copy(std::begin(row0), std::end(row0), m.phi.row(0).begin());
    std::copy(std::begin(row1), std::end(row1), m.phi.row(1).begin());

    using Ranked = std::vector<std::pair<std::string, double>>;
    CHECK(top_words(m, 0, 3) == Ranked{{"alpha", 0.3}, {"bravo", 0.3}, {"charlie", 0.3}});
    CHECK(top_words(m, 1, 10).size() == 4);
    CHECK(top_words(m, 1, 2) == Ranked{{"alpha", 0.25}, {"bravo", 0.25}});
    CHECK_THROWS_AS(top_words(m, 2, 3), ValidationError);
    CHECK_THROWS_AS(top_words(m, -1, 3), ValidationError);
    CHECK_THROWS_AS(top_words(m, 0, 0), ValidationError);

    SECTION("probabilities never increase down the list") {
        const auto& f = small();
        for (int k = 0; k < 3; ++k) {
            const auto top = top_words(f.model, k, 30);
            CHECK(top.size() == 30);
            for (std::size_t i = 1; i < top.size(); ++i) {
                REQUIRE(top[i].second <= top[i - 1].second);
            }
        }
    }
}

TEST_CASE("category maps", "[topics]") {
    TopicModel m;
    m.config = LdaConfig::with_topics(50);
    m.phi = Matrix(50, 1, 1.0);

    SECTION("the shipped category map") {
        const auto map = CategoryMap::load(std::filesystem::path(ETHICS_TRIAGE_DATA_DIR) / "samples/category_map.json");
        CHECK(map.categories().size() == 13);
        const auto view = apply_category_map(m, map);
        CHECK(view.topic_count("authentication") == 7);
        CHECK(view.topic_count("vulnerabilities") == 3);
        CHECK(view.topic_count("online measurements") == 7);
        CHECK(view.topic_count(kUncategorized) == 0);
        CHECK(view.category_of_topic[0] == "authentication");
        CHECK(view.category_of_topic[49] == "bank account");
    }

    SECTION("empty map leaves everything uncategorized") {
        const auto view = apply_category_map(m, CategoryMap{});
        CHECK(view.topic_count(kUncategorized) == 50);
    }

    SECTION("two topics in one category") {
        CategoryMap map;
        map.assign("encryption", {3, 9});
        const auto view = apply_category_map(m, map);
        CHECK(view.topic_count("encryption") == 2);
        CHECK(view.topic_count(kUncategorized) == 48);
    }

    SECTION("invalid ids are listed") {
        CategoryMap map;
        map.assign("a", {1, 50, 77});
        try {
            apply_category_map(m, map);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("50, 77"));
        }
    }

    SECTION("a topic may not sit in two categories") {
        CategoryMap map;
        map.assign("a", {1});
        CHECK_THROWS_AS(map.assign("b", {1}), ValidationError);
    }

    SECTION("JSON round trip") {
        CategoryMap map;
        map.assign("a", {1, 2});
        map.assign("b", {0});
        const auto back = CategoryMap::from_json(map.to_json());
        CHECK(back.categories() == map.categories());
        CHECK_THROWS_AS(CategoryMap::from_json(nlohmann::json::parse(R"({"categories": [{"name": "x"}]})")), ValidationError);
    }
}

TEST_CASE("log_likelihood", "[topics]") {
    const auto& f = small();
    CHECK(log_likelihood(f.model, {}) == 0.0);
    const double ll = log_likelihood(f.model, f.data.second);
    CHECK(ll <= 0.0);
    CHECK(std::isfinite(ll));

    SECTION("unseen documents are scored through inference") {
        BowDoc bow = f.data.second[3];
        bow.doc_id = "unseen";
        CHECK(log_likelihood(f.model, {bow}) <= 0.0);
    }

    SECTION("trend across sweeps is non-decreasing up to 1% dips") {
        TrainingLog log;
        log.trace_every = 10;
        log.record_during_burn_in = true;
        train_lda(f.data.second, f.data.first, quick_config(3, 5, 300), &log);
        REQUIRE(log.trace.size() == 30);
        for (std::size_t i = 1; i < log.trace.size(); ++i) {
            INFO("sweep " << log.trace[i].sweep);
            REQUIRE(log.trace[i].log_likelihood >= log.trace[i - 1].log_likelihood - 0.01 * std::abs(log.trace[i - 1].log_likelihood));
        }
        CHECK(log.trace.back().log_likelihood > log.trace.front().log_likelihood);
    }
}

TEST_CASE("model persistence", "[topics]") {
    const auto& f = small();
    oracle::TempDir dir("model");
    save_model(f.model, dir / "m.json");
    const auto back = load_model(dir / "m.json");
    CHECK(back.config == f.model.config);
    CHECK(back.vocab == f.model.vocab);
    CHECK(back.doc_ids == f.model.doc_ids);
    CHECK(back.phi == f.model.phi);
    CHECK(back.theta == f.model.theta);

    auto j = to_json(f.model);
    CHECK(j["version"] == 1);
    CHECK(j["vocab_fingerprint"] == f.model.vocab_fingerprint());
    j["terms"][0] = "tampered";
    CHECK_THROWS_AS(topic_model_from_json(j), ValidationError);
}
