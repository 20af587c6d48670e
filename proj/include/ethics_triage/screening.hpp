#ifndef ETHICS_TRIAGE_SCREENING_HPP
#define ETHICS_TRIAGE_SCREENING_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "corpus.hpp"
#include "detail/csv.hpp"
#include "error.hpp"

namespace ethics_triage {

/// Word-level ethics keywords. Prefixes match case-insensitively at the start
/// of a word (so "morale" is a known false positive of "moral"); exact tokens
/// match whole words case-sensitively.
struct KeywordRules {
    std::vector<std::string> prefix_patterns{"ethic", "moral"};
    std::vector<std::string> exact_tokens{"IRB", "REB"};

    void validate() const {
        for (const auto& p : prefix_patterns) {
            if (p.empty()) {
                throw ValidationError("empty keyword prefix");
            }
            if (std::any_of(p.begin(), p.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; })) {
                throw ValidationError("keyword prefix '" + p + "' must be lowercase");
            }
        }
        for (const auto& t : exact_tokens) {
            if (t.empty()) {
                throw ValidationError("empty exact keyword token");
            }
        }
    }
};

struct ScreenFlags {
    std::string doc_id;
    bool gray = false;
    bool ethics_mention = false;
    /// Distinct matching surface forms in order of first appearance.
    std::vector<std::pair<std::string, std::size_t>> matched_terms;

    friend bool operator==(const ScreenFlags&, const ScreenFlags&) = default;
};

/// Applies the keyword rules to one text. Words are maximal runs of ASCII
/// letters and digits.
inline ScreenFlags keyword_screen(std::string_view text, const KeywordRules& rules) {
    ScreenFlags flags;
    std::unordered_map<std::string, std::size_t> slot;

    auto consider = [&](std::string_view word) {
        std::string lower(word);
        for (auto& c : lower) {
            if (c >= 'A' && c <= 'Z') {
                c = static_cast<char>(c - 'A' + 'a');
            }
        }
        bool hit = std::any_of(rules.exact_tokens.begin(), rules.exact_tokens.end(), [&](const std::string& t) { return t == word; }) ||
                   std::any_of(rules.prefix_patterns.begin(), rules.prefix_patterns.end(),
                               [&](const std::string& p) { return lower.starts_with(p); });
        if (!hit) {
            return;
        }
        std::string surface(word);
        auto [it, inserted] = slot.emplace(surface, flags.matched_terms.size());
        if (inserted) {
            flags.matched_terms.emplace_back(std::move(surface), 1);
        } else {
            ++flags.matched_terms[it->second].second;
        }
    };

    std::size_t start = 0;
    bool in_word = false;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const bool alnum = i < text.size() && detail::is_ascii_alnum(static_cast<unsigned char>(text[i]));
        if (alnum && !in_word) {
            start = i;
            in_word = true;
        } else if (!alnum && in_word) {
            consider(text.substr(start, i - start));
            in_word = false;
        }
    }
    flags.ethics_mention = !flags.matched_terms.empty();
    return flags;
}

/// Screens every document over title, abstract and full body text; the gray
/// flag is copied from the manifest.
inline std::vector<ScreenFlags> screen_corpus(const std::vector<Document>& docs, const KeywordRules& rules = {}) {
    rules.validate();
    std::vector<ScreenFlags> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) {
        ScreenFlags flags = keyword_screen(modeling_text(doc, true), rules);
        flags.doc_id = doc.id;
        flags.gray = doc.gray_flag;
        out.push_back(std::move(flags));
    }
    return out;
}

struct FlagRow {
    std::string doc_id;
    bool gray = false;
    bool ethics_mention = false;
};

struct ScreenSummary {
    std::size_t gray_count = 0;
    std::size_t ethics_count = 0;
    std::size_t intersection_count = 0;
    std::size_t union_count = 0;
    /// One row per corpus document, corpus order.
    std::vector<FlagRow> table;

    /// Documents that are gray, mention ethics, or both; corpus order.
    std::vector<std::string> union_ids() const {
        std::vector<std::string> ids;
        for (const auto& row : table) {
            if (row.gray || row.ethics_mention) {
                ids.push_back(row.doc_id);
            }
        }
        return ids;
    }

    bool inclusion_exclusion_holds() const {
        return union_count + intersection_count == gray_count + ethics_count &&
               intersection_count <= std::min(gray_count, ethics_count);
    }

    nlohmann::json to_json() const {
        return {{"version", 1},
                {"gray_count", gray_count},
                {"ethics_count", ethics_count},
                {"intersection_count", intersection_count},
                {"union_count", union_count}};
    }
};

inline ScreenSummary combine_flags(const std::set<std::string>& gray_ids,
                                   const std::set<std::string>& ethics_ids,
                                   const std::vector<Document>& corpus) {
    std::set<std::string> known;
    for (const auto& doc : corpus) {
        known.insert(doc.id);
    }
    for (const auto* ids : {&gray_ids, &ethics_ids}) {
        for (const auto& id : *ids) {
            if (!known.contains(id)) {
                throw ValidationError("unknown document id '" + id + "' in screening flags");
            }
        }
    }

    ScreenSummary s;
    s.table.reserve(corpus.size());
    for (const auto& doc : corpus) {
        FlagRow row{doc.id, gray_ids.contains(doc.id), ethics_ids.contains(doc.id)};
        s.gray_count += row.gray;
        s.ethics_count += row.ethics_mention;
        s.intersection_count += row.gray && row.ethics_mention;
        s.union_count += row.gray || row.ethics_mention;
        s.table.push_back(std::move(row));
    }
    if (!s.inclusion_exclusion_holds()) {
        throw std::logic_error("screen summary violates inclusion-exclusion");
    }
    return s;
}

inline ScreenSummary combine_flags(const std::vector<ScreenFlags>& flags, const std::vector<Document>& corpus) {
    std::set<std::string> gray;
    std::set<std::string> ethics;
    for (const auto& f : flags) {
        if (f.gray) {
            gray.insert(f.doc_id);
        }
        if (f.ethics_mention) {
            ethics.insert(f.doc_id);
        }
    }
    return combine_flags(gray, ethics, corpus);
}

// CSV: doc_id,gray,ethics_mention,matched_terms ("term:count;term:count")

inline std::string flags_to_csv(const std::vector<ScreenFlags>& flags) {
    std::string out = detail::csv_row({"doc_id", "gray", "ethics_mention", "matched_terms"});
    for (const auto& f : flags) {
        std::string terms;
        for (const auto& [term, count] : f.matched_terms) {
            if (!terms.empty()) {
                terms += ';';
            }
            terms += term + ":" + std::to_string(count);
        }
        out += detail::csv_row({f.doc_id, f.gray ? "true" : "false", f.ethics_mention ? "true" : "false", terms});
    }
    return out;
}

inline std::vector<ScreenFlags> flags_from_csv(std::string_view text) {
    auto rows = detail::parse_csv(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"doc_id", "gray", "ethics_mention", "matched_terms"}) {
        throw ValidationError("flag table must start with header doc_id,gray,ethics_mention,matched_terms");
    }
    auto parse_bool = [](const std::string& v) {
        if (v == "true") {
            return true;
        }
        if (v == "false") {
            return false;
        }
        throw ValidationError("expected true/false in flag table, got '" + v + "'");
    };
    std::vector<ScreenFlags> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4) {
            throw ValidationError("flag table row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields");
        }
        ScreenFlags f;
        f.doc_id = row[0];
        f.gray = parse_bool(row[1]);
        f.ethics_mention = parse_bool(row[2]);
        for (const auto& item : detail::split(row[3], ';')) {
            const auto colon = item.rfind(':');
            if (colon == std::string::npos) {
                throw ValidationError("malformed matched term '" + item + "'");
            }
            std::size_t count = 0;
            const char* first = item.data() + colon + 1;
            const char* last = item.data() + item.size();
            auto [ptr, ec] = std::from_chars(first, last, count);
            if (ec != std::errc() || ptr != last || count == 0) {
                throw ValidationError("malformed matched term count in '" + item + "'");
            }
            f.matched_terms.emplace_back(item.substr(0, colon), count);
        }
        if (f.ethics_mention != !f.matched_terms.empty()) {
            throw ValidationError("row for '" + f.doc_id + "': ethics_mention disagrees with matched_terms");
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace ethics_triage

#endif
