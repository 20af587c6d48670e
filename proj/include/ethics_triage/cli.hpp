#ifndef ETHICS_TRIAGE_CLI_HPP
#define ETHICS_TRIAGE_CLI_HPP

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "classify.hpp"
#include "corpus.hpp"
#include "detail/io.hpp"
#include "error.hpp"
#include "guideline.hpp"
#include "screening.hpp"
#include "service/http_api.hpp"
#include "topics.hpp"

#ifndef ETHICS_TRIAGE_DATA_DIR
#define ETHICS_TRIAGE_DATA_DIR "."
#endif

namespace ethics_triage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

inline std::filesystem::path default_stopwords() {
    return std::filesystem::path(ETHICS_TRIAGE_DATA_DIR) / "data" / "stopwords.txt";
}

inline std::filesystem::path default_guideline() {
    return std::filesystem::path(ETHICS_TRIAGE_DATA_DIR) / "guidelines" / "default.gdl";
}

// Bag-of-words corpus file written by `ingest` and read by `train`:
// {version, vocab_fingerprint, terms, docs: [{id, gray, counts: [[term, n]...]}]}

inline nlohmann::json bow_corpus_to_json(const PreparedCorpus& corpus, const std::vector<Document>& docs) {
    nlohmann::json jdocs = nlohmann::json::array();
    for (std::size_t i = 0; i < corpus.bows.size(); ++i) {
        nlohmann::json counts = nlohmann::json::array();
        for (const auto& [id, c] : corpus.bows[i].counts) {
            counts.push_back({id, c});
        }
        jdocs.push_back({{"id", corpus.bows[i].doc_id}, {"gray", docs[i].gray_flag}, {"counts", counts}});
    }
    return {{"version", 1},
            {"vocab_fingerprint", corpus.vocab.fingerprint()},
            {"terms", corpus.vocab.terms()},
            {"docs", jdocs}};
}

inline PreparedCorpus bow_corpus_from_json(const nlohmann::json& j) {
    try {
        PreparedCorpus corpus;
        corpus.vocab = Vocabulary(j.at("terms").get<std::vector<std::string>>());
        if (corpus.vocab.fingerprint() != j.at("vocab_fingerprint").get<std::string>()) {
            throw ValidationError("corpus vocabulary does not match its recorded fingerprint");
        }
        for (const auto& d : j.at("docs")) {
            BowDoc bow;
            bow.doc_id = d.at("id").get<std::string>();
            bow.vocab_fingerprint = corpus.vocab.fingerprint();
            for (const auto& pair : d.at("counts")) {
                const auto id = pair.at(0).get<std::uint32_t>();
                const auto count = pair.at(1).get<std::uint32_t>();
                if (id >= corpus.vocab.size() || count == 0) {
                    throw ValidationError("document '" + bow.doc_id + "' has an invalid count entry");
                }
                bow.counts[id] = count;
            }
            corpus.bows.push_back(std::move(bow));
        }
        return corpus;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid corpus file: ") + e.what());
    }
}

namespace detail {

inline nlohmann::json load_json(const std::string& path) {
    return ethics_triage::detail::parse_json(ethics_triage::detail::read_file(path), path);
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        ethics_triage::detail::write_file(path, content);
    }
}

/// Reads the next answer, skipping blank lines and '#' comments.
inline std::optional<std::string> next_answer(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') {
            continue;
        }
        return line.substr(start);
    }
    return std::nullopt;
}

/// Drives one session from a stream of answers. An answer may be a label or a
/// 1-based choice number; "undo" steps back; "quit" abandons the walk.
inline std::optional<guideline::Session> walk_tree(const guideline::GuidelineTree& tree,
                                                   std::istream& in,
                                                   std::ostream& out,
                                                   bool interactive) {
    auto session = guideline::start_session(tree);
    out << "== " << tree.name << " ==\n";
    while (!session.terminal()) {
        out << session.prompt() << "\n";
        const auto labels = session.labels();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out << "  " << (i + 1) << ") " << labels[i] << "\n";
        }
        out << "> " << std::flush;
        auto line = next_answer(in);
        if (!line) {
            throw ValidationError("answers ended before \"" + tree.name + "\" reached a verdict");
        }
        if (!interactive) {
            out << *line << "\n";
        }
        if (*line == "quit") {
            return std::nullopt;
        }
        if (*line == "undo") {
            try {
                session = guideline::undo(session);
            } catch (const guideline::SessionStateError& e) {
                if (!interactive) {
                    throw;
                }
                out << e.what() << "\n";
            }
            continue;
        }
        std::string label = *line;
        if (!label.empty() && label.find_first_not_of("0123456789") == std::string::npos) {
            const auto n = std::stoul(label);
            if (n >= 1 && n <= labels.size()) {
                label = labels[n - 1];
            }
        }
        try {
            session = guideline::answer(session, label);
        } catch (const guideline::UnknownAnswerError& e) {
            if (!interactive) {
                throw;
            }
            out << e.what() << "\n";
        }
    }
    const auto* v = session.verdict();
    out << "verdict: " << guideline::to_string(v->kind) << (session.provisional ? " (provisional)" : "") << "\n";
    if (!v->rationale.empty()) {
        out << "  " << v->rationale << "\n";
    }
    return session;
}

} // namespace detail

/// Entry point shared by the executable and the tests. Returns 0 on success,
/// 1 on validation/ingest errors, 2 on usage errors.
inline int cli_dispatch(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Corpus screening, topic modelling and ethics-guideline walkthroughs", "ethics-triage"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Tokenize a manifest into a bag-of-words corpus");
    std::string manifest;
    std::string stopwords_path = default_stopwords().string();
    int max_ngram = 5;
    std::size_t min_doc_freq = 2;
    std::size_t min_token_length = 1;
    bool body_only = false;
    std::string out_path;
    ingest->add_option("--manifest", manifest, "Manifest JSON")->required();
    ingest->add_option("--stopwords", stopwords_path, "Stopword list");
    ingest->add_option("--max-ngram", max_ngram, "Longest n-gram")->capture_default_str();
    ingest->add_option("--min-doc-freq", min_doc_freq, "Minimum document frequency")->capture_default_str();
    ingest->add_option("--min-token-length", min_token_length)->capture_default_str();
    ingest->add_flag("--body-only", body_only, "Model body text only (skip title and abstract)");
    ingest->add_option("--out", out_path, "Output corpus JSON")->required();

    // train
    auto* train = app.add_subcommand("train", "Train an LDA topic model");
    std::string corpus_path;
    LdaConfig lda;
    std::optional<double> alpha;
    train->add_option("--corpus", corpus_path, "Corpus JSON from ingest")->required();
    train->add_option("--topics", lda.num_topics, "Number of topics")->capture_default_str();
    train->add_option("--alpha", alpha, "Document-topic prior (default 1/K)");
    train->add_option("--beta", lda.beta, "Topic-term prior")->capture_default_str();
    train->add_option("--iterations", lda.iterations, "Gibbs sweeps")->capture_default_str();
    train->add_option("--burn-in", lda.burn_in)->capture_default_str();
    train->add_option("--seed", lda.seed)->capture_default_str();
    train->add_option("--out", out_path, "Output model JSON")->required();

    // topics
    auto* topics = app.add_subcommand("topics", "Print the top words of every topic");
    std::string model_path;
    std::string map_path;
    std::size_t top_n = 30;
    topics->add_option("--model", model_path)->required();
    topics->add_option("--top", top_n, "Words per topic")->capture_default_str();
    topics->add_option("--category-map", map_path);

    // screen
    auto* screen = app.add_subcommand("screen", "Flag gray-area and ethics-mentioning documents");
    std::string summary_path;
    screen->add_option("--manifest", manifest)->required();
    screen->add_option("--out", out_path, "Flag table CSV (default stdout)");
    screen->add_option("--summary", summary_path, "Also write the summary JSON here");

    // classify
    auto* classify = app.add_subcommand("classify", "Assign screened documents to topics and categories");
    std::string flags_path;
    AssignRules rules;
    bool classify_all = false;
    classify->add_option("--model", model_path)->required();
    classify->add_option("--category-map", map_path)->required();
    classify->add_option("--flags", flags_path, "Flag table from screen");
    classify->add_flag("--all", classify_all, "Classify every modelled document");
    classify->add_option("--threshold", rules.second_topic_threshold, "Second-topic threshold")->capture_default_str();
    classify->add_option("--out", out_path, "Assignment CSV (default stdout)");

    // counts
    auto* counts = app.add_subcommand("counts", "Documents per category");
    std::string assignments_path;
    counts->add_option("--assignments", assignments_path)->required();

    // lint
    auto* lint = app.add_subcommand("lint", "Validate a guideline file");
    std::string guideline_path;
    std::size_t max_depth = 50;
    lint->add_option("guideline", guideline_path)->required();
    lint->add_option("--max-depth", max_depth)->capture_default_str();

    // walk
    auto* walk = app.add_subcommand("walk", "Walk guideline trees interactively");
    std::string tree_name;
    std::string script_path;
    std::string report_path;
    walk->add_option("--guideline", guideline_path, "Guideline file (default: shipped guideline)");
    walk->add_option("--tree", tree_name, "Walk only this tree");
    walk->add_option("--script", script_path, "Read answers from this file instead of stdin");
    walk->add_option("--report", report_path, "Write the report JSON here (default stdout)");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve guideline sessions over HTTP");
    std::string addr;
    int ttl_hours = 24;
    serve->add_option("--guideline", guideline_path, "Guideline file (default: shipped guideline)");
    serve->add_option("--addr", addr, "host:port (default $ETHICS_TRIAGE_ADDR or 127.0.0.1:8080)");
    serve->add_option("--ttl-hours", ttl_hours, "Idle session lifetime")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return kExitUsage;
    }

    try {
        if (*ingest) {
            TokenizerConfig config;
            config.stopwords = load_stopwords(stopwords_path);
            config.max_ngram = max_ngram;
            config.min_token_length = min_token_length;
            const auto docs = load_corpus(manifest);
            const auto corpus = prepare_corpus(docs, config, min_doc_freq, !body_only);
            ethics_triage::detail::write_file(out_path, bow_corpus_to_json(corpus, docs).dump() + "\n");
            out << docs.size() << " documents, " << corpus.vocab.size() << " terms\n";
        } else if (*train) {
            const auto corpus = bow_corpus_from_json(detail::load_json(corpus_path));
            lda.alpha = alpha.value_or(1.0 / std::max(lda.num_topics, 1));
            TrainingLog log;
            const auto model = train_lda(corpus.bows, corpus.vocab, lda, &log);
            for (const auto& w : log.warnings) {
                err << "warning: " << w << "\n";
            }
            save_model(model, out_path);
            out << "trained " << model.num_topics() << " topics over " << model.doc_ids.size() << " documents, "
                << model.vocab.size() << " terms\n";
        } else if (*topics) {
            const auto model = load_model(model_path);
            std::optional<CategoryMap> map;
            if (!map_path.empty()) {
                map = CategoryMap::load(map_path);
                map->require_valid(model.num_topics());
            }
            for (std::size_t k = 0; k < model.num_topics(); ++k) {
                out << "topic " << k;
                if (map) {
                    out << " [" << map->category_of(static_cast<int>(k)) << "]";
                }
                out << ":";
                for (const auto& [term, p] : top_words(model, static_cast<int>(k), top_n)) {
                    out << " " << term << " (" << p << ")";
                }
                out << "\n";
            }
        } else if (*screen) {
            const auto docs = load_corpus(manifest);
            const auto flags = screen_corpus(docs);
            const auto summary = combine_flags(flags, docs);
            detail::emit(out_path, flags_to_csv(flags), out);
            const std::string summary_json = summary.to_json().dump(2) + "\n";
            if (!summary_path.empty()) {
                ethics_triage::detail::write_file(summary_path, summary_json);
            }
            if (!out_path.empty() && out_path != "-") {
                out << summary_json;
            }
        } else if (*classify) {
            const auto model = load_model(model_path);
            const auto map = CategoryMap::load(map_path);
            std::vector<std::string> ids;
            if (classify_all) {
                ids = model.doc_ids;
            } else {
                if (flags_path.empty()) {
                    err << "classify needs --flags or --all\n";
                    return kExitUsage;
                }
                for (const auto& f : flags_from_csv(ethics_triage::detail::read_file(flags_path))) {
                    if (f.gray || f.ethics_mention) {
                        ids.push_back(f.doc_id);
                    }
                }
            }
            const auto assignments = classify_documents(model, ids, map, rules);
            detail::emit(out_path, assignments_to_csv(assignments), out);
        } else if (*counts) {
            const auto assignments = assignments_from_csv(ethics_triage::detail::read_file(assignments_path));
            out << counts_to_json(category_counts(assignments)).dump(2) << "\n";
        } else if (*lint) {
            const auto trees = guideline::load_guideline(guideline_path);
            const auto findings = guideline::validate(trees, {max_depth});
            for (const auto& f : findings) {
                out << f.str() << "\n";
            }
            out << findings.size() << " findings\n";
            return guideline::has_errors(findings) ? kExitValidation : kExitOk;
        } else if (*walk) {
            const auto trees = guideline::load_guideline(guideline_path.empty() ? default_guideline() : std::filesystem::path(guideline_path));
            if (auto findings = guideline::validate(trees); guideline::has_errors(findings)) {
                err << findings.front().str() << "\n";
                return kExitValidation;
            }
            std::vector<const guideline::GuidelineTree*> selected;
            for (const auto& t : trees) {
                if (tree_name.empty() || t.name == tree_name) {
                    selected.push_back(&t);
                }
            }
            if (selected.empty()) {
                err << "no guideline named \"" << tree_name << "\"\n";
                return kExitValidation;
            }
            std::ifstream script;
            std::istream* source = &in;
            if (!script_path.empty()) {
                script.open(script_path);
                if (!script) {
                    throw IngestError(script_path, "cannot open answer script");
                }
                source = &script;
            }
            const bool interactive = script_path.empty() && &in == &std::cin;
            std::vector<guideline::Session> done;
            for (const auto* t : selected) {
                auto s = detail::walk_tree(*t, *source, report_path.empty() ? err : out, interactive);
                if (!s) {
                    break;
                }
                done.push_back(std::move(*s));
            }
            const std::string report_json = guideline::to_json(guideline::report(done)).dump(2) + "\n";
            detail::emit(report_path, report_json, out);
        } else if (*serve) {
            const auto trees = guideline::load_guideline(guideline_path.empty() ? default_guideline() : std::filesystem::path(guideline_path));
            if (auto findings = guideline::validate(trees); guideline::has_errors(findings)) {
                err << findings.front().str() << "\n";
                return kExitValidation;
            }
            const auto address = addr.empty() ? service::address_from_env() : service::parse_address(addr);
            service::Api api(trees, std::chrono::hours(ttl_hours));
            httplib::Server server;
            api.bind(server);
            out << "listening on " << address.host << ":" << address.port << "\n" << std::flush;
            if (!server.listen(address.host, address.port)) {
                err << "cannot listen on " << address.host << ":" << address.port << "\n";
                return kExitValidation;
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

} // namespace ethics_triage::cli

#endif
