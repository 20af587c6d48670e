#ifndef ETHICS_TRIAGE_GUIDELINE_REPORT_HPP
#define ETHICS_TRIAGE_GUIDELINE_REPORT_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "session.hpp"
#include "tree.hpp"

namespace ethics_triage::guideline {

struct Outcome {
    std::string tree_name;
    Verdict verdict;
    bool provisional = false;
    std::vector<PathStep> transcript;
    std::vector<std::string> conditions;
    /// Rationales of DEMANDS verdicts reached.
    std::vector<std::string> obligations;

    /// Provisional outcomes count as at least TBD.
    VerdictKind effective_kind() const {
        return provisional ? most_severe(verdict.kind, VerdictKind::Tbd) : verdict.kind;
    }
};

struct Report {
    std::vector<Outcome> outcomes;
    VerdictKind overall = VerdictKind::Permits;

    std::vector<std::string> obligations() const {
        std::vector<std::string> all;
        for (const auto& o : outcomes) {
            all.insert(all.end(), o.obligations.begin(), o.obligations.end());
        }
        return all;
    }
};

inline Outcome outcome_of(const Session& s) {
    const Verdict* v = s.verdict();
    if (!v) {
        throw SessionStateError("session for \"" + s.tree_name() + "\" has not reached a verdict");
    }
    Outcome o{s.tree_name(), *v, s.provisional, s.path, s.conditions, {}};
    if (v->kind == VerdictKind::Demands) {
        o.obligations.push_back(v->rationale);
    }
    return o;
}

/// Per-tree outcomes plus the most severe effective verdict (PERMITS when
/// there are no sessions).
inline Report report(const std::vector<Session>& sessions) {
    Report r;
    for (const auto& s : sessions) {
        r.outcomes.push_back(outcome_of(s));
        r.overall = most_severe(r.overall, r.outcomes.back().effective_kind());
    }
    return r;
}

/// Concatenation of two reports; overall is recombined.
inline Report merge(const Report& a, const Report& b) {
    Report r = a;
    r.outcomes.insert(r.outcomes.end(), b.outcomes.begin(), b.outcomes.end());
    r.overall = most_severe(a.overall, b.overall);
    return r;
}

inline nlohmann::json to_json(const Report& r) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::json transcript = nlohmann::json::array();
        for (const auto& step : o.transcript) {
            transcript.push_back({{"prompt", step.prompt}, {"answer", step.answer}});
        }
        outcomes.push_back({{"tree", o.tree_name},
                            {"verdict", to_json(o.verdict)},
                            {"provisional", o.provisional},
                            {"effective", to_string(o.effective_kind())},
                            {"transcript", transcript},
                            {"conditions", o.conditions},
                            {"obligations", o.obligations}});
    }
    return {{"version", 1}, {"overall", to_string(r.overall)}, {"outcomes", outcomes}, {"obligations", r.obligations()}};
}

} // namespace ethics_triage::guideline

#endif
