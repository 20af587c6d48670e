#ifndef ETHICS_TRIAGE_CORPUS_HPP
#define ETHICS_TRIAGE_CORPUS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "detail/io.hpp"
#include "error.hpp"

namespace ethics_triage {

struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::string body_text;
    std::string venue;
    std::optional<int> year;
    /// Manual gray-area judgment made from title and abstract; never computed.
    bool gray_flag = false;
};

struct TokenizerConfig {
    std::set<std::string> stopwords;
    int max_ngram = 5;
    std::size_t min_token_length = 1;

    void validate() const {
        if (max_ngram < 1 || max_ngram > 10) {
            throw ValidationError("max_ngram must be in [1, 10], got " + std::to_string(max_ngram));
        }
        for (const auto& word : stopwords) {
            if (word.empty()) {
                throw ValidationError("stopword list contains an empty entry");
            }
            if (std::any_of(word.begin(), word.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; })) {
                throw ValidationError("stopword '" + word + "' is not lowercase");
            }
        }
    }
};

/// Reads a stopword list: one word per line, '#' starts a comment, entries
/// are lowercased.
inline std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::set<std::string> words;
    const std::string text = detail::read_file(path);
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(pos, end - pos);
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::string word;
        for (unsigned char c : line) {
            if (c == ' ' || c == '\t' || c == '\r') {
                continue;
            }
            word.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
        }
        if (!word.empty()) {
            words.insert(std::move(word));
        }
        pos = end + 1;
    }
    return words;
}

/// Ordered set of unique terms (space-joined n-grams) with a dense id per term.
class Vocabulary {
public:
    Vocabulary() = default;

    explicit Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
        index_.reserve(terms_.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second) {
                throw ValidationError("duplicate vocabulary term '" + terms_[i] + "'");
            }
        }
        std::uint64_t hash = detail::fnv1a("vocab");
        for (const auto& t : terms_) {
            hash = detail::fnv1a(t, hash);
            hash = detail::fnv1a(std::string_view("\n", 1), hash);
        }
        fingerprint_ = detail::to_hex(hash);
    }

    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const std::string& term(std::uint32_t id) const { return terms_.at(id); }

    std::optional<std::uint32_t> id_of(std::string_view term) const {
        auto it = index_.find(std::string(term));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Hex FNV-1a digest over the ordered term list; two vocabularies with the
    /// same terms in the same order share a fingerprint.
    const std::string& fingerprint() const noexcept { return fingerprint_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::string fingerprint_ = detail::to_hex(detail::fnv1a("vocab"));
};

struct BowDoc {
    std::string doc_id;
    /// term id -> occurrence count (always >= 1)
    std::map<std::uint32_t, std::uint32_t> counts;
    /// Fingerprint of the vocabulary the ids refer to.
    std::string vocab_fingerprint;

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& [id, c] : counts) {
            n += c;
        }
        return n;
    }
    bool empty() const noexcept { return counts.empty(); }

    friend bool operator==(const BowDoc&, const BowDoc&) = default;
};

namespace detail {

inline bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline std::string require_string(const nlohmann::json& entry, const char* key, std::size_t index, bool required) {
    auto it = entry.find(key);
    if (it == entry.end() || it->is_null()) {
        if (required) {
            throw ValidationError("manifest entry " + std::to_string(index) + ": missing field '" + key + "'");
        }
        return {};
    }
    if (!it->is_string()) {
        throw ValidationError("manifest entry " + std::to_string(index) + ": field '" + key + "' must be a string");
    }
    return it->get<std::string>();
}

} // namespace detail

/// Reads a JSON manifest (array of {id, title, abstract, body_path, venue,
/// year, gray_flag}). Relative body paths resolve against the manifest's
/// directory.
inline std::vector<Document> load_corpus(const std::filesystem::path& manifest_path) {
    const std::string text = detail::read_file(manifest_path);
    const nlohmann::json manifest = detail::parse_json(text, manifest_path.string());
    if (!manifest.is_array()) {
        throw ValidationError(manifest_path.string() + ": manifest must be a JSON array");
    }

    const std::filesystem::path base = manifest_path.parent_path();
    std::vector<Document> docs;
    docs.reserve(manifest.size());
    std::unordered_set<std::string> seen;

    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& entry = manifest[i];
        if (!entry.is_object()) {
            throw ValidationError("manifest entry " + std::to_string(i) + " is not an object");
        }
        Document doc;
        doc.id = detail::require_string(entry, "id", i, true);
        if (doc.id.empty()) {
            throw ValidationError("manifest entry " + std::to_string(i) + ": empty id");
        }
        if (!seen.insert(doc.id).second) {
            throw ValidationError("duplicate document id '" + doc.id + "'");
        }
        doc.title = detail::require_string(entry, "title", i, false);
        doc.abstract = detail::require_string(entry, "abstract", i, false);
        doc.venue = detail::require_string(entry, "venue", i, false);

        if (auto it = entry.find("year"); it != entry.end() && !it->is_null()) {
            if (!it->is_number_integer()) {
                throw ValidationError("manifest entry " + std::to_string(i) + ": year must be an integer");
            }
            const auto year = it->get<long long>();
            if (year < 0 || year > 100000) {
                throw ValidationError("document '" + doc.id + "': year out of range");
            }
            doc.year = static_cast<int>(year);
        }
        if (auto it = entry.find("gray_flag"); it != entry.end() && !it->is_null()) {
            if (!it->is_boolean()) {
                throw ValidationError("manifest entry " + std::to_string(i) + ": gray_flag must be a boolean");
            }
            doc.gray_flag = it->get<bool>();
        }

        std::filesystem::path body = detail::require_string(entry, "body_path", i, true);
        if (body.is_relative()) {
            body = base / body;
        }
        if (!std::filesystem::is_regular_file(body)) {
            throw IngestError(body.string(), "body file does not exist (document '" + doc.id + "')");
        }
        doc.body_text = detail::read_file(body);
        docs.push_back(std::move(doc));
    }
    return docs;
}

/// Lowercased tokens. ASCII characters other than letters and digits separate
/// tokens; a token holding any non-ASCII byte is unreadable and dropped, as are
/// stopwords and tokens shorter than the configured minimum.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    std::string current;
    bool unreadable = false;

    auto flush = [&] {
        if (!current.empty() && !unreadable && current.size() >= config.min_token_length &&
            !config.stopwords.contains(current)) {
            tokens.push_back(current);
        }
        current.clear();
        unreadable = false;
    };

    for (unsigned char c : text) {
        if (c >= 0x80) {
            current.push_back(static_cast<char>(c));
            unreadable = true;
        } else if (detail::is_ascii_alnum(c)) {
            current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

/// Every contiguous n-gram for n = 1..max_n, unigrams first, each order left
/// to right.
inline std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int max_n) {
    if (max_n < 1) {
        throw ValidationError("max_n must be >= 1");
    }
    const std::size_t len = tokens.size();
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(max_n), len);
    std::vector<std::string> terms;
    std::size_t count = 0;
    for (std::size_t n = 1; n <= top; ++n) {
        count += len - n + 1;
    }
    terms.reserve(count);
    for (std::size_t n = 1; n <= top; ++n) {
        for (std::size_t start = 0; start + n <= len; ++start) {
            std::string term = tokens[start];
            for (std::size_t k = 1; k < n; ++k) {
                term += ' ';
                term += tokens[start + k];
            }
            terms.push_back(std::move(term));
        }
    }
    return terms;
}

/// Terms occurring in at least `min_doc_freq` documents, ordered by
/// descending document frequency and then lexicographically.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& term_lists, std::size_t min_doc_freq = 2) {
    if (min_doc_freq < 1) {
        throw ValidationError("min_doc_freq must be >= 1");
    }
    std::unordered_map<std::string, std::size_t> doc_freq;
    for (const auto& terms : term_lists) {
        std::unordered_set<std::string_view> distinct(terms.begin(), terms.end());
        for (auto term : distinct) {
            ++doc_freq[std::string(term)];
        }
    }

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [term, df] : doc_freq) {
        if (df >= min_doc_freq) {
            kept.emplace_back(term, df);
        }
    }
    if (kept.empty()) {
        throw ValidationError("vocabulary is empty (no term reaches document frequency " +
                              std::to_string(min_doc_freq) + ")");
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });

    std::vector<std::string> terms;
    terms.reserve(kept.size());
    for (auto& entry : kept) {
        terms.push_back(std::move(entry.first));
    }
    return Vocabulary(std::move(terms));
}

/// Counts of in-vocabulary terms; out-of-vocabulary terms are dropped.
inline BowDoc to_bow(const std::vector<std::string>& terms, const Vocabulary& vocab, std::string doc_id = {}) {
    BowDoc bow;
    bow.doc_id = std::move(doc_id);
    bow.vocab_fingerprint = vocab.fingerprint();
    for (const auto& term : terms) {
        if (auto id = vocab.id_of(term)) {
            ++bow.counts[*id];
        }
    }
    return bow;
}

/// Text that feeds the topic model for one document.
inline std::string modeling_text(const Document& doc, bool include_title_abstract = true) {
    if (!include_title_abstract) {
        return doc.body_text;
    }
    std::string text = doc.title;
    text += '\n';
    text += doc.abstract;
    text += '\n';
    text += doc.body_text;
    return text;
}

struct PreparedCorpus {
    Vocabulary vocab;
    std::vector<BowDoc> bows;
};

/// tokenize -> n-grams -> vocabulary -> bag of words, for a whole corpus.
inline PreparedCorpus prepare_corpus(const std::vector<Document>& docs,
                                     const TokenizerConfig& config,
                                     std::size_t min_doc_freq = 2,
                                     bool include_title_abstract = true) {
    config.validate();
    std::vector<std::vector<std::string>> term_lists;
    term_lists.reserve(docs.size());
    for (const auto& doc : docs) {
        term_lists.push_back(extract_ngrams(tokenize(modeling_text(doc, include_title_abstract), config), config.max_ngram));
    }
    PreparedCorpus out{build_vocabulary(term_lists, min_doc_freq), {}};
    out.bows.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        out.bows.push_back(to_bow(term_lists[i], out.vocab, docs[i].id));
    }
    return out;
}

} // namespace ethics_triage

#endif
