#ifndef ETHICS_TRIAGE_CLASSIFY_HPP
#define ETHICS_TRIAGE_CLASSIFY_HPP

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "detail/csv.hpp"
#include "error.hpp"
#include "topics.hpp"

namespace ethics_triage {

struct AssignRules {
    /// Minimum probability for the runner-up topic to count (inclusive).
    double second_topic_threshold = 0.1;

    void validate() const {
        if (!(second_topic_threshold >= 0.0 && second_topic_threshold <= 1.0)) {
            throw ValidationError("second_topic_threshold must lie in [0, 1]");
        }
    }
};

struct TopicAssignment {
    int primary = 0;
    std::optional<int> secondary;

    friend bool operator==(const TopicAssignment&, const TopicAssignment&) = default;
};

struct Assignment {
    std::string doc_id;
    int primary_topic = 0;
    std::optional<int> secondary_topic;
    std::set<std::string> categories;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Highest-probability topic, plus the runner-up when its probability reaches
/// the threshold. Ties go to the lower index.
inline TopicAssignment assign_topics(std::span<const double> theta_row, const AssignRules& rules = {}) {
    rules.validate();
    if (theta_row.empty()) {
        throw ValidationError("cannot assign topics from an empty distribution");
    }
    double sum = 0.0;
    for (double p : theta_row) {
        if (!(p >= 0.0)) {
            throw ValidationError("topic distribution has a negative or NaN entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ValidationError("topic distribution sums to " + std::to_string(sum) + ", expected 1");
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < theta_row.size(); ++i) {
        if (theta_row[i] > theta_row[best]) {
            best = i;
        }
    }
    std::optional<std::size_t> second;
    for (std::size_t i = 0; i < theta_row.size(); ++i) {
        if (i != best && (!second || theta_row[i] > theta_row[*second])) {
            second = i;
        }
    }

    TopicAssignment out{static_cast<int>(best), std::nullopt};
    if (second && theta_row[*second] >= rules.second_topic_threshold) {
        out.secondary = static_cast<int>(*second);
    }
    return out;
}

/// Categories of the assigned topics; unmapped topics contribute
/// "uncategorized".
inline std::set<std::string> assign_categories(const TopicAssignment& topics, const CategoryMap& map, std::size_t num_topics) {
    auto check = [&](int t) {
        if (t < 0 || static_cast<std::size_t>(t) >= num_topics) {
            throw ValidationError("topic " + std::to_string(t) + " out of range [0, " + std::to_string(num_topics) + ")");
        }
    };
    check(topics.primary);
    std::set<std::string> out{map.category_of(topics.primary)};
    if (topics.secondary) {
        check(*topics.secondary);
        out.insert(map.category_of(*topics.secondary));
    }
    return out;
}

/// Classifies the given documents by their trained theta rows.
inline std::vector<Assignment> classify_documents(const TopicModel& model,
                                                  const std::vector<std::string>& doc_ids,
                                                  const CategoryMap& map,
                                                  const AssignRules& rules = {}) {
    map.require_valid(model.num_topics());
    std::map<std::string_view, std::size_t> rows;
    for (std::size_t i = 0; i < model.doc_ids.size(); ++i) {
        rows.emplace(model.doc_ids[i], i);
    }
    std::vector<Assignment> out;
    out.reserve(doc_ids.size());
    for (const auto& id : doc_ids) {
        auto it = rows.find(id);
        if (it == rows.end()) {
            throw ValidationError("document '" + id + "' is not part of the topic model");
        }
        const auto topics = assign_topics(model.theta.row(it->second), rules);
        out.push_back({id, topics.primary, topics.secondary, assign_categories(topics, map, model.num_topics())});
    }
    return out;
}

/// Documents per category. A document counts once toward every category it
/// belongs to.
inline std::map<std::string, std::size_t> category_counts(const std::vector<Assignment>& assignments) {
    std::map<std::string, std::size_t> counts;
    for (const auto& a : assignments) {
        for (const auto& c : a.categories) {
            ++counts[c];
        }
    }
    return counts;
}

inline nlohmann::json counts_to_json(const std::map<std::string, std::size_t>& counts) {
    return {{"version", 1}, {"counts", counts}};
}

// CSV: doc_id,primary_topic,secondary_topic,categories

inline std::string assignments_to_csv(const std::vector<Assignment>& assignments) {
    std::string out = detail::csv_row({"doc_id", "primary_topic", "secondary_topic", "categories"});
    for (const auto& a : assignments) {
        std::string cats;
        for (const auto& c : a.categories) {
            if (!cats.empty()) {
                cats += ';';
            }
            cats += c;
        }
        out += detail::csv_row({a.doc_id, std::to_string(a.primary_topic),
                                a.secondary_topic ? std::to_string(*a.secondary_topic) : std::string(), cats});
    }
    return out;
}

inline std::vector<Assignment> assignments_from_csv(std::string_view text) {
    auto rows = detail::parse_csv(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"doc_id", "primary_topic", "secondary_topic", "categories"}) {
        throw ValidationError("assignment table must start with header doc_id,primary_topic,secondary_topic,categories");
    }
    auto parse_int = [](const std::string& v) {
        int x = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw ValidationError("expected an integer topic id, got '" + v + "'");
        }
        return x;
    };
    std::vector<Assignment> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4) {
            throw ValidationError("assignment row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields");
        }
        Assignment a;
        a.doc_id = row[0];
        a.primary_topic = parse_int(row[1]);
        if (!row[2].empty()) {
            a.secondary_topic = parse_int(row[2]);
        }
        for (auto& c : detail::split(row[3], ';')) {
            a.categories.insert(std::move(c));
        }
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace ethics_triage

#endif
