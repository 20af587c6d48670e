#ifndef ETHICS_TRIAGE_TOPICS_HPP
#define ETHICS_TRIAGE_TOPICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "corpus.hpp"
#include "detail/io.hpp"
#include "error.hpp"

namespace ethics_triage {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kUncategorized = "uncategorized";

struct LdaConfig {
    int num_topics = 50;
    double alpha = 1.0 / 50.0;
    double beta = 0.01;
    int iterations = 1000;
    /// Sweeps before the likelihood trace starts. Parameters always come from
    /// the final sampler state.
    int burn_in = 200;
    std::uint64_t seed = 42;

    /// Defaults for a given topic count: alpha = 1/K, beta = 0.01.
    static LdaConfig with_topics(int k) {
        LdaConfig c;
        c.num_topics = k;
        c.alpha = k > 0 ? 1.0 / k : 0.0;
        return c;
    }

    void validate() const {
        if (num_topics < 1) {
            throw ValidationError("num_topics must be >= 1");
        }
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw ValidationError("alpha must be positive");
        }
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw ValidationError("beta must be positive");
        }
        if (burn_in < 0 || iterations <= burn_in) {
            throw ValidationError("require iterations > burn_in >= 0");
        }
    }

    friend bool operator==(const LdaConfig&, const LdaConfig&) = default;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct TopicModel {
    LdaConfig config;
    Vocabulary vocab;
    /// Row labels of theta, in training order.
    std::vector<std::string> doc_ids;
    Matrix phi;   // K x V
    Matrix theta; // D x K

    std::size_t num_topics() const noexcept { return phi.rows(); }
    const std::string& vocab_fingerprint() const noexcept { return vocab.fingerprint(); }

    std::optional<std::size_t> doc_index(std::string_view id) const {
        for (std::size_t i = 0; i < doc_ids.size(); ++i) {
            if (doc_ids[i] == id) {
                return i;
            }
        }
        return std::nullopt;
    }
};

struct TracePoint {
    int sweep = 0;
    double log_likelihood = 0.0;
};

/// Optional side channel for train_lda.
struct TrainingLog {
    /// Record the corpus log-likelihood every this many sweeps once burn-in is
    /// over (0 disables). Set record_during_burn_in to trace from sweep 1.
    int trace_every = 0;
    bool record_during_burn_in = false;
    std::vector<TracePoint> trace;
    std::vector<std::string> warnings;
};

namespace detail {

/// mt19937_64 is fully specified by the standard; the distributions are not,
/// so uniform variates are derived from raw bits here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint32_t below(std::uint32_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::uint32_t>(x % n);
    }

private:
    std::mt19937_64 engine_;
};

inline void require_fingerprint(const TopicModel& model, const BowDoc& bow) {
    if (bow.vocab_fingerprint != model.vocab_fingerprint()) {
        throw ValidationError("document '" + bow.doc_id + "' uses vocabulary " + bow.vocab_fingerprint +
                              " but the model expects " + model.vocab_fingerprint());
    }
}

inline double doc_log_likelihood(const Matrix& phi, std::span<const double> theta_row, const BowDoc& bow) {
    double ll = 0.0;
    const std::size_t k_count = phi.rows();
    for (const auto& [w, c] : bow.counts) {
        double p = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            p += theta_row[k] * phi(k, w);
        }
        ll += static_cast<double>(c) * std::log(p);
    }
    return ll;
}

/// Collapsed Gibbs state: per-token topic assignments plus the three count
/// tables. Word-topic counts are stored word-major for the inner loop.
struct GibbsState {
    std::size_t topics = 0;
    std::size_t vocab = 0;
    std::vector<std::vector<std::uint32_t>> words;  // per doc
    std::vector<std::vector<std::uint32_t>> assign; // per doc
    std::vector<std::uint32_t> doc_topic;           // D x K
    std::vector<std::uint32_t> word_topic;          // V x K
    std::vector<std::uint64_t> topic_total;         // K

    void estimate(const LdaConfig& cfg, Matrix& phi, Matrix& theta) const {
        phi = Matrix(topics, vocab);
        theta = Matrix(words.size(), topics);
        const double vbeta = static_cast<double>(vocab) * cfg.beta;
        for (std::size_t k = 0; k < topics; ++k) {
            const double denom = static_cast<double>(topic_total[k]) + vbeta;
            for (std::size_t w = 0; w < vocab; ++w) {
                phi(k, w) = (word_topic[w * topics + k] + cfg.beta) / denom;
            }
        }
        const double kalpha = static_cast<double>(topics) * cfg.alpha;
        for (std::size_t d = 0; d < words.size(); ++d) {
            const double denom = static_cast<double>(words[d].size()) + kalpha;
            for (std::size_t k = 0; k < topics; ++k) {
                theta(d, k) = (doc_topic[d * topics + k] + cfg.alpha) / denom;
            }
        }
    }
};

} // namespace detail

/// Trains LDA by collapsed Gibbs sampling. Identical (bows, vocab, config)
/// produce bit-identical models.
inline TopicModel train_lda(const std::vector<BowDoc>& bows,
                            const Vocabulary& vocab,
                            const LdaConfig& config,
                            TrainingLog* log = nullptr) {
    config.validate();
    if (bows.empty()) {
        throw ValidationError("cannot train a topic model on an empty corpus");
    }
    if (vocab.empty()) {
        throw ValidationError("cannot train a topic model with an empty vocabulary");
    }
    const auto K = static_cast<std::size_t>(config.num_topics);
    const std::size_t V = vocab.size();
    if (log && K > V) {
        log->warnings.push_back("num_topics (" + std::to_string(K) + ") exceeds the number of distinct terms (" +
                                std::to_string(V) + ")");
    }

    detail::GibbsState st;
    st.topics = K;
    st.vocab = V;
    st.words.resize(bows.size());
    st.assign.resize(bows.size());
    st.doc_topic.assign(bows.size() * K, 0);
    st.word_topic.assign(V * K, 0);
    st.topic_total.assign(K, 0);

    TopicModel model;
    model.config = config;
    model.vocab = vocab;
    model.doc_ids.reserve(bows.size());

    detail::Rng rng(config.seed);
    for (std::size_t d = 0; d < bows.size(); ++d) {
        const BowDoc& bow = bows[d];
        if (bow.vocab_fingerprint != vocab.fingerprint()) {
            throw ValidationError("document '" + bow.doc_id + "' was built against a different vocabulary");
        }
        model.doc_ids.push_back(bow.doc_id);
        if (bow.empty() && log) {
            log->warnings.push_back("document '" + bow.doc_id + "' has no in-vocabulary terms; skipped (uniform topic mix)");
        }
        auto& words = st.words[d];
        words.reserve(bow.total());
        for (const auto& [w, c] : bow.counts) {
            if (w >= V) {
                throw ValidationError("document '" + bow.doc_id + "' references term id " + std::to_string(w) +
                                      " outside the vocabulary");
            }
            words.insert(words.end(), c, w);
        }
        auto& z = st.assign[d];
        z.resize(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) {
            const std::uint32_t k = rng.below(static_cast<std::uint32_t>(K));
            z[i] = k;
            ++st.doc_topic[d * K + k];
            ++st.word_topic[words[i] * K + k];
            ++st.topic_total[k];
        }
    }

    const double vbeta = static_cast<double>(V) * config.beta;
    std::vector<double> cumulative(K);
    Matrix phi;
    Matrix theta;

    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        for (std::size_t d = 0; d < st.words.size(); ++d) {
            const auto& words = st.words[d];
            auto& z = st.assign[d];
            std::uint32_t* dt = st.doc_topic.data() + d * K;
            for (std::size_t i = 0; i < words.size(); ++i) {
                const std::uint32_t w = words[i];
                std::uint32_t* wt = st.word_topic.data() + static_cast<std::size_t>(w) * K;
                std::uint32_t k = z[i];
                --dt[k];
                --wt[k];
                --st.topic_total[k];

                double total = 0.0;
                for (std::size_t t = 0; t < K; ++t) {
                    total += (dt[t] + config.alpha) * (wt[t] + config.beta) /
                             (static_cast<double>(st.topic_total[t]) + vbeta);
                    cumulative[t] = total;
                }
                const double u = rng.uniform() * total;
                k = static_cast<std::uint32_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                if (k >= K) {
                    k = static_cast<std::uint32_t>(K - 1);
                }

                z[i] = k;
                ++dt[k];
                ++wt[k];
                ++st.topic_total[k];
            }
        }

        if (log && log->trace_every > 0 && sweep % log->trace_every == 0 &&
            (log->record_during_burn_in || sweep > config.burn_in)) {
            st.estimate(config, phi, theta);
            double ll = 0.0;
            for (std::size_t d = 0; d < bows.size(); ++d) {
                ll += detail::doc_log_likelihood(phi, theta.row(d), bows[d]);
            }
            log->trace.push_back({sweep, ll});
        }
    }

    st.estimate(config, model.phi, model.theta);
    return model;
}

/// Topic mix of a document under a trained model: Gibbs sampling with phi held
/// fixed, averaging the estimate over the second half of the sweeps.
inline std::vector<double> infer_doc_topics(const TopicModel& model, const BowDoc& bow, int inference_iterations = 100) {
    detail::require_fingerprint(model, bow);
    if (inference_iterations < 1) {
        throw ValidationError("inference_iterations must be >= 1");
    }
    const std::size_t K = model.num_topics();
    const double alpha = model.config.alpha;
    std::vector<double> mix(K, 1.0 / static_cast<double>(K));
    if (bow.empty()) {
        return mix;
    }

    std::vector<std::uint32_t> words;
    words.reserve(bow.total());
    for (const auto& [w, c] : bow.counts) {
        if (w >= model.vocab.size()) {
            throw ValidationError("document '" + bow.doc_id + "' references a term outside the vocabulary");
        }
        words.insert(words.end(), c, w);
    }

    detail::Rng rng(model.config.seed ^ detail::fnv1a(bow.doc_id, detail::fnv1a("infer")));
    std::vector<std::uint32_t> z(words.size());
    std::vector<std::uint32_t> counts(K, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
        z[i] = rng.below(static_cast<std::uint32_t>(K));
        ++counts[z[i]];
    }

    std::vector<double> cumulative(K);
    std::vector<double> accum(K, 0.0);
    const int keep_from = inference_iterations / 2;
    int kept = 0;
    for (int sweep = 0; sweep < inference_iterations; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --counts[z[i]];
            double total = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                total += (counts[k] + alpha) * model.phi(k, words[i]);
                cumulative[k] = total;
            }
            const double u = rng.uniform() * total;
            auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            if (k >= K) {
                k = K - 1;
            }
            z[i] = static_cast<std::uint32_t>(k);
            ++counts[k];
        }
        if (sweep >= keep_from) {
            for (std::size_t k = 0; k < K; ++k) {
                accum[k] += counts[k];
            }
            ++kept;
        }
    }

    const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        mix[k] = (accum[k] / kept + alpha) / denom;
        sum += mix[k];
    }
    for (auto& p : mix) {
        p /= sum;
    }
    return mix;
}

/// The n most probable terms of a topic, most probable first; equal
/// probabilities fall back to lexicographic order.
inline std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int topic, std::size_t n) {
    if (topic < 0 || static_cast<std::size_t>(topic) >= model.num_topics()) {
        throw ValidationError("topic " + std::to_string(topic) + " out of range [0, " +
                              std::to_string(model.num_topics()) + ")");
    }
    if (n < 1) {
        throw ValidationError("n must be >= 1");
    }
    const auto row = model.phi.row(static_cast<std::size_t>(topic));
    std::vector<std::uint32_t> ids(row.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ids[i] = static_cast<std::uint32_t>(i);
    }
    const std::size_t take = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (row[a] != row[b]) {
            return row[a] > row[b];
        }
        return model.vocab.term(a) < model.vocab.term(b);
    });
    std::vector<std::pair<std::string, double>> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.emplace_back(model.vocab.term(ids[i]), row[ids[i]]);
    }
    return out;
}

/// Sum over token positions of log sum_k theta_dk phi_kw. Documents seen in
/// training use their theta row; others are inferred.
inline double log_likelihood(const TopicModel& model, const std::vector<BowDoc>& bows) {
    std::unordered_map<std::string, std::size_t> rows;
    for (std::size_t i = 0; i < model.doc_ids.size(); ++i) {
        rows.emplace(model.doc_ids[i], i);
    }
    double ll = 0.0;
    for (const auto& bow : bows) {
        detail::require_fingerprint(model, bow);
        if (auto it = rows.find(bow.doc_id); it != rows.end()) {
            ll += detail::doc_log_likelihood(model.phi, model.theta.row(it->second), bow);
        } else {
            const auto mix = infer_doc_topics(model, bow);
            ll += detail::doc_log_likelihood(model.phi, mix, bow);
        }
    }
    return ll;
}

/// Human-authored grouping of topics into named categories.
class CategoryMap {
public:
    struct Category {
        std::string name;
        std::vector<int> topics;
        friend bool operator==(const Category&, const Category&) = default;
    };

    CategoryMap() = default;

    /// Adds topics to a category, creating it on first use. A topic may belong
    /// to one category only.
    void assign(const std::string& name, const std::vector<int>& topics) {
        if (name.empty()) {
            throw ValidationError("category name must not be empty");
        }
        auto it = std::find_if(categories_.begin(), categories_.end(), [&](const Category& c) { return c.name == name; });
        if (it == categories_.end()) {
            categories_.push_back({name, {}});
            it = categories_.end() - 1;
        }
        for (int t : topics) {
            if (auto prev = entries_.find(t); prev != entries_.end()) {
                throw ValidationError("topic " + std::to_string(t) + " mapped to both '" + prev->second + "' and '" + name + "'");
            }
            entries_.emplace(t, name);
            it->topics.push_back(t);
        }
    }

    const std::vector<Category>& categories() const noexcept { return categories_; }
    const std::map<int, std::string>& entries() const noexcept { return entries_; }

    std::string category_of(int topic) const {
        auto it = entries_.find(topic);
        return it == entries_.end() ? std::string(kUncategorized) : it->second;
    }

    /// Topic ids outside [0, num_topics).
    std::vector<int> invalid_topics(std::size_t num_topics) const {
        std::vector<int> bad;
        for (const auto& [t, name] : entries_) {
            if (t < 0 || static_cast<std::size_t>(t) >= num_topics) {
                bad.push_back(t);
            }
        }
        return bad;
    }

    void require_valid(std::size_t num_topics) const {
        const auto bad = invalid_topics(num_topics);
        if (bad.empty()) {
            return;
        }
        std::string list;
        for (int t : bad) {
            list += (list.empty() ? "" : ", ") + std::to_string(t);
        }
        throw ValidationError("category map references topics outside [0, " + std::to_string(num_topics) + "): " + list);
    }

    nlohmann::json to_json() const {
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& c : categories_) {
            cats.push_back({{"name", c.name}, {"topics", c.topics}});
        }
        return {{"categories", cats}};
    }

    static CategoryMap from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("categories") || !j["categories"].is_array()) {
            throw ValidationError("category map must be an object with a 'categories' array");
        }
        CategoryMap map;
        for (const auto& c : j["categories"]) {
            if (!c.is_object() || !c.contains("name") || !c["name"].is_string() || !c.contains("topics") ||
                !c["topics"].is_array()) {
                throw ValidationError("each category needs a string 'name' and a 'topics' array");
            }
            std::vector<int> topics;
            for (const auto& t : c["topics"]) {
                if (!t.is_number_integer()) {
                    throw ValidationError("category '" + c["name"].get<std::string>() + "': topic ids must be integers");
                }
                topics.push_back(t.get<int>());
            }
            map.assign(c["name"].get<std::string>(), topics);
        }
        return map;
    }

    static CategoryMap load(const std::filesystem::path& path) {
        return from_json(detail::parse_json(detail::read_file(path), path.string()));
    }

private:
    std::vector<Category> categories_;
    std::map<int, std::string> entries_;
};

/// A model's topics grouped through a CategoryMap.
struct CategorizedModel {
    /// category name -> topic ids; unmapped topics land in "uncategorized"
    std::map<std::string, std::vector<int>> topics_by_category;
    /// topic id -> category name
    std::vector<std::string> category_of_topic;

    std::size_t topic_count(const std::string& category) const {
        auto it = topics_by_category.find(category);
        return it == topics_by_category.end() ? 0 : it->second.size();
    }
};

inline CategorizedModel apply_category_map(const TopicModel& model, const CategoryMap& map) {
    const std::size_t K = model.num_topics();
    map.require_valid(K);
    CategorizedModel view;
    view.category_of_topic.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        auto name = map.category_of(static_cast<int>(k));
        view.topics_by_category[name].push_back(static_cast<int>(k));
        view.category_of_topic.push_back(std::move(name));
    }
    return view;
}

// Persistence --------------------------------------------------------------

inline nlohmann::json to_json(const LdaConfig& c) {
    return {{"num_topics", c.num_topics}, {"alpha", c.alpha},     {"beta", c.beta},
            {"iterations", c.iterations}, {"burn_in", c.burn_in}, {"seed", c.seed}};
}

inline LdaConfig lda_config_from_json(const nlohmann::json& j) {
    try {
        LdaConfig c;
        c.num_topics = j.at("num_topics").get<int>();
        c.alpha = j.at("alpha").get<double>();
        c.beta = j.at("beta").get<double>();
        c.iterations = j.at("iterations").get<int>();
        c.burn_in = j.at("burn_in").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid LDA config: ") + e.what());
    }
}

inline nlohmann::json to_json(const TopicModel& m) {
    auto rows = [](const Matrix& mat) {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t r = 0; r < mat.rows(); ++r) {
            const auto row = mat.row(r);
            out.push_back(std::vector<double>(row.begin(), row.end()));
        }
        return out;
    };
    return {{"version", kModelFormatVersion},
            {"config", to_json(m.config)},
            {"vocab_fingerprint", m.vocab_fingerprint()},
            {"terms", m.vocab.terms()},
            {"doc_ids", m.doc_ids},
            {"phi", rows(m.phi)},
            {"theta", rows(m.theta)}};
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != kModelFormatVersion) {
            throw ValidationError("unsupported model version " + j.at("version").dump());
        }
        TopicModel m;
        m.config = lda_config_from_json(j.at("config"));
        m.vocab = Vocabulary(j.at("terms").get<std::vector<std::string>>());
        if (m.vocab.fingerprint() != j.at("vocab_fingerprint").get<std::string>()) {
            throw ValidationError("model vocabulary does not match its recorded fingerprint");
        }
        m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        auto read = [](const nlohmann::json& rows, std::size_t n_rows, std::size_t n_cols, const char* what) {
            if (!rows.is_array() || rows.size() != n_rows) {
                throw ValidationError(std::string(what) + " has the wrong number of rows");
            }
            Matrix mat(n_rows, n_cols);
            for (std::size_t r = 0; r < n_rows; ++r) {
                const auto values = rows[r].get<std::vector<double>>();
                if (values.size() != n_cols) {
                    throw ValidationError(std::string(what) + " row " + std::to_string(r) + " has the wrong length");
                }
                std::copy(values.begin(), values.end(), mat.row(r).begin());
            }
            return mat;
        };
        const auto K = static_cast<std::size_t>(m.config.num_topics);
        m.phi = read(j.at("phi"), K, m.vocab.size(), "phi");
        m.theta = read(j.at("theta"), m.doc_ids.size(), K, "theta");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid model file: ") + e.what());
    }
}

inline void save_model(const TopicModel& m, const std::filesystem::path& path) {
    detail::write_file(path, to_json(m).dump() + "\n");
}

inline TopicModel load_model(const std::filesystem::path& path) {
    return topic_model_from_json(detail::parse_json(detail::read_file(path), path.string()));
}

} // namespace ethics_triage

#endif
