#ifndef ETHICS_TRIAGE_GUIDELINE_SESSION_HPP
#define ETHICS_TRIAGE_GUIDELINE_SESSION_HPP

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "../error.hpp"
#include "tree.hpp"

namespace ethics_triage::guideline {

/// The chosen label was not one of the node's answers.
class UnknownAnswerError : public ValidationError {
public:
    UnknownAnswerError(const std::string& label, std::vector<std::string> valid)
        : ValidationError("unknown answer \"" + label + "\"; valid answers: " + join(valid)), valid_(std::move(valid)) {}

    const std::vector<std::string>& valid_labels() const noexcept { return valid_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) {
            s += (s.empty() ? "\"" : ", \"") + x + "\"";
        }
        return s;
    }
    std::vector<std::string> valid_;
};

/// Operation not allowed in the session's current state.
class SessionStateError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct PathStep {
    std::string prompt;
    std::string answer;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// A walk through one tree. Sessions are values: answer() and undo() return
/// new sessions and leave the argument untouched.
struct Session {
    std::shared_ptr<const GuidelineTree> tree;
    std::vector<PathStep> path;
    /// A choice node awaiting an answer, or the reached leaf. Never a condition.
    const Node* current = nullptr;
    /// True once any condition node has been passed.
    bool provisional = false;
    /// Notes of the condition nodes passed, in order.
    std::vector<std::string> conditions;

    const std::string& tree_name() const { return tree->name; }
    bool terminal() const noexcept { return current && current->is_leaf(); }

    const Verdict* verdict() const noexcept {
        auto* leaf = current ? std::get_if<Leaf>(&current->value) : nullptr;
        return leaf ? &leaf->verdict : nullptr;
    }

    const std::string& prompt() const { return current->text(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        if (auto* bs = current ? current->choices() : nullptr) {
            for (const auto& b : *bs) {
                out.push_back(b.label);
            }
        }
        return out;
    }

    friend bool operator==(const Session& a, const Session& b) {
        return a.tree == b.tree && a.path == b.path && a.current == b.current && a.provisional == b.provisional &&
               a.conditions == b.conditions;
    }
};

namespace detail {

inline void settle(Session& s, const Node* node) {
    while (node && node->is_condition()) {
        const auto& c = std::get<Condition>(node->value);
        s.provisional = true;
        s.conditions.push_back(c.note);
        node = c.child.get();
    }
    if (!node) {
        throw ValidationError("guideline \"" + s.tree->name + "\" has a missing node");
    }
    s.current = node;
}

} // namespace detail

inline Session start_session(std::shared_ptr<const GuidelineTree> tree) {
    if (!tree || !tree->root) {
        throw ValidationError("cannot start a session on an empty guideline");
    }
    Session s;
    s.tree = std::move(tree);
    detail::settle(s, s.tree->root.get());
    return s;
}

inline Session start_session(const GuidelineTree& tree) {
    return start_session(std::make_shared<const GuidelineTree>(tree));
}

inline Session answer(const Session& session, std::string_view label) {
    if (session.terminal()) {
        throw SessionStateError("session for \"" + session.tree_name() + "\" has already reached a verdict");
    }
    const auto& branches = *session.current->choices();
    for (const auto& b : branches) {
        if (b.label == label) {
            Session next = session;
            next.path.push_back({session.current->text(), b.label});
            detail::settle(next, b.child.get());
            return next;
        }
    }
    throw UnknownAnswerError(std::string(label), session.labels());
}

/// Replays an answer script from the root.
inline Session replay(std::shared_ptr<const GuidelineTree> tree, const std::vector<std::string>& labels) {
    Session s = start_session(std::move(tree));
    for (const auto& l : labels) {
        s = answer(s, l);
    }
    return s;
}

/// Drops the last answer; the result equals replaying the shorter script.
inline Session undo(const Session& session) {
    if (session.path.empty()) {
        throw SessionStateError("nothing to undo");
    }
    std::vector<std::string> labels;
    labels.reserve(session.path.size() - 1);
    for (std::size_t i = 0; i + 1 < session.path.size(); ++i) {
        labels.push_back(session.path[i].answer);
    }
    return replay(session.tree, labels);
}

inline nlohmann::json to_json(const Verdict& v) {
    return {{"kind", to_string(v.kind)}, {"rationale", v.rationale}, {"citations", v.citations}};
}

/// Wire form: {version, tree, path, provisional, conditions, node | verdict}.
inline nlohmann::json to_json(const Session& s) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& step : s.path) {
        path.push_back({{"prompt", step.prompt}, {"answer", step.answer}});
    }
    nlohmann::json j = {{"version", 1},
                        {"tree", s.tree_name()},
                        {"path", path},
                        {"provisional", s.provisional},
                        {"conditions", s.conditions},
                        {"terminal", s.terminal()}};
    if (const Verdict* v = s.verdict()) {
        j["verdict"] = to_json(*v);
    } else {
        j["node"] = {{"type", std::holds_alternative<Xor>(s.current->value) ? "xor" : "question"},
                     {"prompt", s.prompt()},
                     {"labels", s.labels()}};
    }
    return j;
}

/// Rebuilds a session from its wire form by replaying the recorded answers.
inline Session session_from_json(const nlohmann::json& j, const std::vector<GuidelineTree>& trees) {
    if (!j.is_object() || !j.contains("tree") || !j["tree"].is_string() || !j.contains("path") || !j["path"].is_array()) {
        throw ValidationError("session JSON needs 'tree' and 'path'");
    }
    const auto* tree = find_tree(trees, j["tree"].get<std::string>());
    if (!tree) {
        throw ValidationError("unknown guideline \"" + j["tree"].get<std::string>() + "\"");
    }
    Session s = start_session(*tree);
    for (const auto& step : j["path"]) {
        if (!step.is_object() || !step.contains("answer") || !step["answer"].is_string()) {
            throw ValidationError("session path entries need an 'answer'");
        }
        if (step.contains("prompt") && !s.terminal() && step["prompt"] != s.prompt()) {
            throw ValidationError("session path does not match guideline \"" + tree->name + "\"");
        }
        s = answer(s, step["answer"].get<std::string>());
    }
    return s;
}

} // namespace ethics_triage::guideline

#endif
