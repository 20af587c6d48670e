#ifndef ETHICS_TRIAGE_GUIDELINE_RENDER_HPP
#define ETHICS_TRIAGE_GUIDELINE_RENDER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "tree.hpp"

namespace ethics_triage::guideline {

namespace detail {

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline const char* leaf_keyword(VerdictKind kind) {
    switch (kind) {
    case VerdictKind::Prohibits: return "prohibit";
    case VerdictKind::Permits: return "permit";
    case VerdictKind::Demands: return "demand";
    case VerdictKind::Tbd: return "tbd";
    }
    return "tbd";
}

// Writes `node` starting at the current column; nested lines are indented by
// `indent` levels.
inline void render_node(std::string& out, const Node& node, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (auto* leaf = std::get_if<Leaf>(&node.value)) {
        out += leaf_keyword(leaf->verdict.kind);
        if (!leaf->verdict.rationale.empty()) {
            out += ' ';
            out += quote(leaf->verdict.rationale);
        }
        for (const auto& c : leaf->verdict.citations) {
            out += " @ ";
            out += quote(c);
        }
        return;
    }
    if (auto* cond = std::get_if<Condition>(&node.value)) {
        out += "condition ";
        out += quote(cond->note);
        out += " -> ";
        render_node(out, *cond->child, indent);
        return;
    }
    out += std::holds_alternative<Xor>(node.value) ? "xor " : "question ";
    out += quote(node.text());
    out += " {\n";
    for (const auto& b : *node.choices()) {
        out += pad + "  answer " + quote(b.label) + " -> ";
        render_node(out, *b.child, indent + 1);
        out += '\n';
    }
    out += pad + "}";
}

} // namespace detail

/// Canonical source text; parse_guideline(render_guideline(t)) == t.
inline std::string render_guideline(const std::vector<GuidelineTree>& trees) {
    std::string out;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        const auto& tree = trees[i];
        if (i) {
            out += '\n';
        }
        out += "guideline " + detail::quote(tree.name) + " {\n";
        for (const auto& s : tree.subclasses) {
            out += "  subclass " + detail::quote(s) + "\n";
        }
        out += "  ";
        detail::render_node(out, *tree.root, 1);
        out += "\n}\n";
    }
    return out;
}

} // namespace ethics_triage::guideline

#endif
