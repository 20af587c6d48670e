#ifndef ETHICS_TRIAGE_GUIDELINE_LINT_HPP
#define ETHICS_TRIAGE_GUIDELINE_LINT_HPP

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "tree.hpp"

namespace ethics_triage::guideline {

struct Finding {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    std::string tree;
    SourcePos location;
    std::string message;

    std::string str() const {
        return location.str() + ": " + (severity == Severity::Error ? "error" : "warning") + ": [" + tree + "] " + message;
    }
};

struct LintOptions {
    /// Trees deeper than this many decisions get a warning.
    std::size_t max_depth = 50;
};

namespace detail {

class Linter {
public:
    Linter(const GuidelineTree& tree, std::vector<Finding>& out) : tree_(tree), out_(out) {}

    /// Returns the depth (edges on the longest root-to-leaf path).
    std::size_t visit(const Node* node, SourcePos parent_pos) {
        if (!node) {
            error(parent_pos, "missing child node");
            return 0;
        }
        if (auto* c = std::get_if<Condition>(&node->value)) {
            if (c->note.empty()) {
                error(node->pos, "condition has an empty note");
            }
            return 1 + visit(c->child.get(), node->pos);
        }
        if (node->is_leaf()) {
            return 0;
        }
        const auto& branches = *node->choices();
        const bool is_xor = std::holds_alternative<Xor>(node->value);
        if (node->text().empty()) {
            error(node->pos, std::string(is_xor ? "xor" : "question") + " has an empty prompt");
        }
        if (is_xor && branches.size() < 2) {
            error(node->pos, "xor needs at least two answers, has " + std::to_string(branches.size()));
        } else if (branches.empty()) {
            error(node->pos, "question has no answers");
        }
        std::set<std::string> seen;
        std::set<std::string> reported;
        std::size_t depth = 0;
        for (const auto& b : branches) {
            if (b.label.empty()) {
                error(node->pos, "empty answer label");
            }
            if (!seen.insert(b.label).second && reported.insert(b.label).second) {
                error(node->pos, "duplicate answer label \"" + b.label + "\"");
            }
            depth = std::max(depth, 1 + visit(b.child.get(), node->pos));
        }
        return depth;
    }

    void error(SourcePos pos, std::string message) {
        out_.push_back({Finding::Severity::Error, tree_.name, pos, std::move(message)});
    }

private:
    const GuidelineTree& tree_;
    std::vector<Finding>& out_;
};

} // namespace detail

/// Structural checks; an empty result means the trees are valid. Only
/// warnings do not block use.
inline std::vector<Finding> validate(const std::vector<GuidelineTree>& trees, const LintOptions& options = {}) {
    std::vector<Finding> findings;
    std::set<std::string> names;
    for (const auto& tree : trees) {
        detail::Linter linter(tree, findings);
        if (tree.name.empty()) {
            linter.error(tree.pos, "guideline name is empty");
        } else if (!names.insert(tree.name).second) {
            linter.error(tree.pos, "duplicate guideline name \"" + tree.name + "\"");
        }
        const std::size_t depth = linter.visit(tree.root.get(), tree.pos);
        if (depth > options.max_depth) {
            findings.push_back({Finding::Severity::Warning, tree.name, tree.pos,
                                "tree depth " + std::to_string(depth) + " exceeds " + std::to_string(options.max_depth)});
        }
    }
    return findings;
}

inline bool has_errors(const std::vector<Finding>& findings) {
    return std::any_of(findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Finding::Severity::Error; });
}

inline nlohmann::json to_json(const Finding& f) {
    return {{"severity", f.severity == Finding::Severity::Error ? "error" : "warning"},
            {"tree", f.tree},
            {"line", f.location.line},
            {"column", f.location.column},
            {"message", f.message}};
}

} // namespace ethics_triage::guideline

#endif
