#ifndef ETHICS_TRIAGE_GUIDELINE_TREE_HPP
#define ETHICS_TRIAGE_GUIDELINE_TREE_HPP

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "../error.hpp"

namespace ethics_triage::guideline {

enum class VerdictKind { Prohibits, Permits, Demands, Tbd };

inline constexpr const char* to_string(VerdictKind kind) {
    switch (kind) {
    case VerdictKind::Prohibits: return "PROHIBITS";
    case VerdictKind::Permits: return "PERMITS";
    case VerdictKind::Demands: return "DEMANDS";
    case VerdictKind::Tbd: return "TBD";
    }
    return "?";
}

inline std::optional<VerdictKind> verdict_kind_from_string(std::string_view s) {
    if (s == "PROHIBITS") return VerdictKind::Prohibits;
    if (s == "PERMITS") return VerdictKind::Permits;
    if (s == "DEMANDS") return VerdictKind::Demands;
    if (s == "TBD") return VerdictKind::Tbd;
    return std::nullopt;
}

/// Aggregation rank: PROHIBITS > TBD > DEMANDS > PERMITS.
inline constexpr int severity(VerdictKind kind) {
    switch (kind) {
    case VerdictKind::Permits: return 0;
    case VerdictKind::Demands: return 1;
    case VerdictKind::Tbd: return 2;
    case VerdictKind::Prohibits: return 3;
    }
    return 3;
}

inline constexpr VerdictKind most_severe(VerdictKind a, VerdictKind b) {
    return severity(a) >= severity(b) ? a : b;
}

struct Verdict {
    VerdictKind kind = VerdictKind::Tbd;
    std::string rationale;
    std::vector<std::string> citations;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct SourcePos {
    std::size_t line = 0;
    std::size_t column = 0;

    std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Branch {
    std::string label;
    NodePtr child;
};

/// Single-choice question.
struct Question {
    std::string prompt;
    std::vector<Branch> branches;
};

/// Mutually exclusive alternatives; at least two branches.
struct Xor {
    std::string prompt;
    std::vector<Branch> branches;
};

/// Provisional gate: the child is entered automatically and the outcome is
/// marked provisional.
struct Condition {
    std::string note;
    NodePtr child;
};

struct Leaf {
    Verdict verdict;
};

struct Node {
    std::variant<Question, Xor, Condition, Leaf> value;
    SourcePos pos;

    bool is_leaf() const noexcept { return std::holds_alternative<Leaf>(value); }
    bool is_condition() const noexcept { return std::holds_alternative<Condition>(value); }

    /// Branches of a Question or Xor node, nullptr otherwise.
    const std::vector<Branch>* choices() const noexcept {
        if (auto* q = std::get_if<Question>(&value)) return &q->branches;
        if (auto* x = std::get_if<Xor>(&value)) return &x->branches;
        return nullptr;
    }

    /// Prompt of a choice node, note of a condition, rationale of a leaf.
    const std::string& text() const noexcept {
        return std::visit(
            [](const auto& n) -> const std::string& {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Condition>) {
                    return n.note;
                } else if constexpr (std::is_same_v<T, Leaf>) {
                    return n.verdict.rationale;
                } else {
                    return n.prompt;
                }
            },
            value);
    }
};

inline NodePtr make_leaf(VerdictKind kind, std::string rationale = {}, std::vector<std::string> citations = {}, SourcePos pos = {}) {
    return std::make_shared<const Node>(Node{Leaf{Verdict{kind, std::move(rationale), std::move(citations)}}, pos});
}

inline NodePtr make_question(std::string prompt, std::vector<Branch> branches, SourcePos pos = {}) {
    return std::make_shared<const Node>(Node{Question{std::move(prompt), std::move(branches)}, pos});
}

inline NodePtr make_xor(std::string prompt, std::vector<Branch> branches, SourcePos pos = {}) {
    return std::make_shared<const Node>(Node{Xor{std::move(prompt), std::move(branches)}, pos});
}

inline NodePtr make_condition(std::string note, NodePtr child, SourcePos pos = {}) {
    return std::make_shared<const Node>(Node{Condition{std::move(note), std::move(child)}, pos});
}

/// Equality of shape and content; source positions are ignored.
inline bool structurally_equal(const Node& a, const Node& b);

inline bool structurally_equal(const NodePtr& a, const NodePtr& b) {
    if (!a || !b) {
        return !a && !b;
    }
    return structurally_equal(*a, *b);
}

namespace detail {
inline bool branches_equal(const std::vector<Branch>& a, const std::vector<Branch>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].label != b[i].label || !structurally_equal(a[i].child, b[i].child)) {
            return false;
        }
    }
    return true;
}
} // namespace detail

inline bool structurally_equal(const Node& a, const Node& b) {
    if (a.value.index() != b.value.index()) {
        return false;
    }
    if (auto* q = std::get_if<Question>(&a.value)) {
        const auto& r = std::get<Question>(b.value);
        return q->prompt == r.prompt && detail::branches_equal(q->branches, r.branches);
    }
    if (auto* x = std::get_if<Xor>(&a.value)) {
        const auto& r = std::get<Xor>(b.value);
        return x->prompt == r.prompt && detail::branches_equal(x->branches, r.branches);
    }
    if (auto* c = std::get_if<Condition>(&a.value)) {
        const auto& r = std::get<Condition>(b.value);
        return c->note == r.note && structurally_equal(c->child, r.child);
    }
    return std::get<Leaf>(a.value).verdict == std::get<Leaf>(b.value).verdict;
}

/// One main class of the guideline.
struct GuidelineTree {
    std::string name;
    NodePtr root;
    /// Documentation only; not used during traversal.
    std::vector<std::string> subclasses;
    SourcePos pos;

    friend bool operator==(const GuidelineTree& a, const GuidelineTree& b) {
        return a.name == b.name && a.subclasses == b.subclasses && structurally_equal(a.root, b.root);
    }
};

inline const GuidelineTree* find_tree(const std::vector<GuidelineTree>& trees, std::string_view name) {
    auto it = std::find_if(trees.begin(), trees.end(), [&](const GuidelineTree& t) { return t.name == name; });
    return it == trees.end() ? nullptr : &*it;
}

/// Every root-to-leaf answer script of a tree (conditions need no answer).
inline std::vector<std::vector<std::string>> enumerate_scripts(const GuidelineTree& tree) {
    std::vector<std::vector<std::string>> scripts;
    std::vector<std::string> current;
    auto walk = [&](auto&& self, const Node* node) -> void {
        while (node && node->is_condition()) {
            node = std::get<Condition>(node->value).child.get();
        }
        if (!node) {
            return;
        }
        if (node->is_leaf()) {
            scripts.push_back(current);
            return;
        }
        for (const auto& b : *node->choices()) {
            current.push_back(b.label);
            self(self, b.child.get());
            current.pop_back();
        }
    };
    walk(walk, tree.root.get());
    return scripts;
}

/// Number of leaves in a subtree.
inline std::size_t count_leaves(const Node* node) {
    if (!node) {
        return 0;
    }
    if (node->is_leaf()) {
        return 1;
    }
    if (auto* c = std::get_if<Condition>(&node->value)) {
        return count_leaves(c->child.get());
    }
    std::size_t n = 0;
    for (const auto& b : *node->choices()) {
        n += count_leaves(b.child.get());
    }
    return n;
}

} // namespace ethics_triage::guideline

#endif
