#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include <ethics_triage/cli.hpp>
#include <ethics_triage/corpus.hpp>

#include "support/oracles.hpp"

using namespace ethics_triage;

namespace {

TokenizerConfig shipped_config() {
    TokenizerConfig c;
    c.stopwords = load_stopwords(cli::default_stopwords());
    return c;
}

} // namespace

TEST_CASE("tokenize applies case, separator, unreadable and stopword rules", "[corpus]") {
    TokenizerConfig config;
    config.stopwords = {"the", "our"};

    CHECK(tokenize("", config).empty());
    CHECK(tokenize("The IRB approved\u000C our study", config) == std::vector<std::string>{"irb", "approved", "study"});
    CHECK(tokenize("r\xc3\xa9sum\xc3\xa9 data", config) == std::vector<std::string>{"data"});

    SECTION("shipped stopword list gives the same result") {
        auto shipped = shipped_config();
        CHECK(shipped.stopwords.contains("the"));
        CHECK(shipped.stopwords.contains("our"));
        CHECK(tokenize("The IRB approved\u000C our study", shipped) == std::vector<std::string>{"irb", "approved", "study"});
    }

    SECTION("punctuation and digits") {
        CHECK(tokenize("TLS-1.3, AES_256!", config) == std::vector<std::string>{"tls", "1", "3", "aes", "256"});
    }

    SECTION("minimum token length") {
        config.min_token_length = 3;
        CHECK(tokenize("a ab abc abcd", config) == std::vector<std::string>{"abc", "abcd"});
    }
}

TEST_CASE("tokenize is idempotent on its own output", "[corpus]") {
    auto config = shipped_config();
    std::mt19937_64 rng(11);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> tokens;
        const int n = static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            std::string t;
            const int len = 1 + static_cast<int>(rng() % 8);
            for (int j = 0; j < len; ++j) {
                t += alphabet[rng() % alphabet.size()];
            }
            if (!config.stopwords.contains(t)) {
                tokens.push_back(t);
            }
        }
        std::string joined;
        for (const auto& t : tokens) {
            joined += t + " ";
        }
        REQUIRE(tokenize(joined, config) == tokens);
    }
}

TEST_CASE("tokenizer config validation", "[corpus]") {
    TokenizerConfig c;
    c.max_ngram = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.max_ngram = 11;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.max_ngram = 10;
    CHECK_NOTHROW(c.validate());
    c.stopwords = {"The"};
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("extract_ngrams enumerates unigrams first", "[corpus]") {
    const std::vector<std::string> abc{"a", "b", "c"};
    CHECK(extract_ngrams(abc, 2) == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
    CHECK(extract_ngrams(abc, 5) == std::vector<std::string>{"a", "b", "c", "a b", "b c", "a b c"});
    CHECK(extract_ngrams({}, 3).empty());
    CHECK_THROWS_AS(extract_ngrams(abc, 0), ValidationError);
}

TEST_CASE("extract_ngrams length matches the closed form", "[corpus]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = rng() % 30;
        const int max_n = 1 + static_cast<int>(rng() % 10);
        std::vector<std::string> tokens(len, "t");
        std::size_t expected = 0;
        for (std::size_t n = 1; n <= std::min<std::size_t>(static_cast<std::size_t>(max_n), len); ++n) {
            expected += len - n + 1;
        }
        REQUIRE(extract_ngrams(tokens, max_n).size() == expected);
    }
}

TEST_CASE("build_vocabulary filters by document frequency and orders deterministically", "[corpus]") {
    CHECK(build_vocabulary({{"tor", "x"}, {"tor"}}, 2).terms() == std::vector<std::string>{"tor"});
    CHECK_FALSE(build_vocabulary({{"tor", "x"}, {"tor"}}, 2).id_of("x"));

    // df: c=3, a=2, b=2, z=1. Hand-sorted by (-df, term).
    const std::vector<std::vector<std::string>> docs{{"b", "a", "c", "c"}, {"c", "b", "a"}, {"c", "z"}};
    const auto vocab = build_vocabulary(docs, 1);
    CHECK(vocab.terms() == std::vector<std::string>{"c", "a", "b", "z"});
    CHECK(vocab.id_of("a") == 1u);
    CHECK(vocab.id_of("b") == 2u);

    SECTION("same input, same ordering, regardless of document order") {
        auto shuffled = docs;
        std::reverse(shuffled.begin(), shuffled.end());
        CHECK(build_vocabulary(docs, 1) == vocab);
        CHECK(build_vocabulary(shuffled, 1) == vocab);
        CHECK(build_vocabulary(shuffled, 1).fingerprint() == vocab.fingerprint());
    }

    SECTION("empty vocabulary is an error") {
        CHECK_THROWS_AS(build_vocabulary({{"a"}, {"b"}}, 2), ValidationError);
        CHECK_THROWS_AS(build_vocabulary({{"a"}}, 0), ValidationError);
    }
}

TEST_CASE("vocabulary ids form a bijection", "[corpus]") {
    const Vocabulary v({"x", "y", "z"});
    for (std::uint32_t i = 0; i < v.size(); ++i) {
        CHECK(v.id_of(v.term(i)) == i);
    }
    CHECK_THROWS_AS(Vocabulary({"x", "x"}), ValidationError);
    CHECK(Vocabulary({"x", "y"}).fingerprint() != Vocabulary({"y", "x"}).fingerprint());
}

TEST_CASE("to_bow counts in-vocabulary terms", "[corpus]") {
    const Vocabulary vocab({"a", "b"});
    const auto bow = to_bow({"a", "a", "b"}, vocab);
    CHECK(bow.counts == std::map<std::uint32_t, std::uint32_t>{{0, 2}, {1, 1}});
    CHECK(bow.vocab_fingerprint == vocab.fingerprint());
    CHECK(to_bow({"q", "r"}, vocab).counts.empty());

    SECTION("total is at most the input length, equal iff all terms are known") {
        std::mt19937_64 rng(5);
        const std::vector<std::string> pool{"a", "b", "c", "d"};
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::string> terms;
            bool all_known = true;
            for (std::size_t i = 0, n = rng() % 12; i < n; ++i) {
                terms.push_back(pool[rng() % pool.size()]);
                all_known = all_known && vocab.id_of(terms.back()).has_value();
            }
            const auto b = to_bow(terms, vocab);
            REQUIRE(b.total() <= terms.size());
            REQUIRE((b.total() == terms.size()) == all_known);
            for (const auto& [id, c] : b.counts) {
                REQUIRE(c >= 1);
                REQUIRE(id < vocab.size());
            }
        }
    }
}

TEST_CASE("load_corpus reads manifest entries in order", "[corpus]") {
    oracle::TempDir dir("corpus");
    std::filesystem::create_directories(dir / "b");
    dir.write("b/one.txt", "first body");
    dir.write("b/two.txt", "second body");
    dir.write("m.json", R"([
      {"id": "p1", "title": "T1", "abstract": "A1", "body_path": "b/one.txt", "venue": "SOUPS", "year": 2015, "gray_flag": true},
      {"id": "p2", "title": "T2", "abstract": "A2", "body_path": "b/two.txt", "venue": "", "gray_flag": false}
    ])");
    const auto docs = load_corpus(dir / "m.json");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "p1");
    CHECK(docs[0].body_text == "first body");
    CHECK(docs[0].venue == "SOUPS");
    CHECK(docs[0].year == 2015);
    CHECK(docs[0].gray_flag);
    CHECK(docs[1].id == "p2");
    CHECK_FALSE(docs[1].year.has_value());
    CHECK_FALSE(docs[1].gray_flag);

    SECTION("modeling text joins title, abstract and body unless disabled") {
        CHECK(modeling_text(docs[0]) == "T1\nA1\nfirst body");
        CHECK(modeling_text(docs[0], false) == "first body");
    }
}

TEST_CASE("load_corpus error paths", "[corpus]") {
    oracle::TempDir dir("corpus_err");
    dir.write("ok.txt", "x");

    SECTION("missing body file names the path") {
        dir.write("m.json", R"([{"id": "p1", "body_path": "nope.txt"}])");
        try {
            load_corpus(dir / "m.json");
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("nope.txt"));
        }
    }
    SECTION("missing manifest") {
        CHECK_THROWS_AS(load_corpus(dir / "absent.json"), IngestError);
    }
    SECTION("duplicate id") {
        dir.write("m.json", R"([{"id": "p1", "body_path": "ok.txt"}, {"id": "p1", "body_path": "ok.txt"}])");
        CHECK_THROWS_AS(load_corpus(dir / "m.json"), ValidationError);
    }
    SECTION("empty id and negative year") {
        dir.write("m.json", R"([{"id": "", "body_path": "ok.txt"}])");
        CHECK_THROWS_AS(load_corpus(dir / "m.json"), ValidationError);
        dir.write("m.json", R"([{"id": "a", "body_path": "ok.txt", "year": -3}])");
        CHECK_THROWS_AS(load_corpus(dir / "m.json"), ValidationError);
    }
    SECTION("malformed JSON reports the line") {
        dir.write("m.json", "[\n  {\"id\": \"p1\",\n   \"body_path\": \"ok.txt\" ,,\n  }\n]");
        try {
            load_corpus(dir / "m.json");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("body_path"));
        }
    }
}

TEST_CASE("venue-count fixture survives ingestion", "[corpus]") {
    const auto fixture = nlohmann::json::parse(detail::read_file(std::filesystem::path(ETHICS_TRIAGE_TEST_DIR) / "fixtures/venue_counts.json"));
    std::map<std::string, std::size_t> expected;
    std::size_t rows = 0;
    std::vector<oracle::PlantedDoc> planted;
    for (const auto& v : fixture["venues"]) {
        const auto n = v["count"].get<std::size_t>();
        expected[v["venue"].get<std::string>()] = n;
        rows += n;
        for (std::size_t i = 0; i < n; ++i) {
            planted.push_back({v["venue"].get<std::string>() + "#" + std::to_string(i), v["venue"].get<std::string>(), 2016,
                               false, "t", "a", "body"});
        }
    }
    CHECK(rows == 1021);
    CHECK(expected.at("USENIX Sec.") == 249);
    CHECK(expected.at("SSRN") == 32);
    CHECK(fixture["reported_total"] == 994);

    oracle::TempDir dir("venues");
    const auto docs = load_corpus(oracle::write_manifest(dir, planted));
    std::map<std::string, std::size_t> got;
    for (const auto& d : docs) {
        ++got[d.venue];
    }
    CHECK(got == expected);
}

TEST_CASE("prepare_corpus chains the stages", "[corpus]") {
    TokenizerConfig config;
    config.stopwords = {"the"};
    config.max_ngram = 2;
    std::vector<Document> docs{{"a", "", "", "the tor network", "", {}, false},
                               {"b", "", "", "tor network relays", "", {}, false}};
    const auto prepared = prepare_corpus(docs, config, 2, false);
    CHECK(prepared.vocab.terms() == std::vector<std::string>{"network", "tor", "tor network"});
    REQUIRE(prepared.bows.size() == 2);
    CHECK(prepared.bows[1].doc_id == "b");
    CHECK(prepared.bows[1].total() == 3);
}
