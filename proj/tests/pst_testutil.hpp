#pragma once

// Test-only helpers: a canonical random PST generator with its label
// emitter (round-trip oracle), and an exhaustive trace-interleaving oracle
// for behavioral profiles. Kept independent of the implementation paths
// they check.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgtc/assembler.hpp"
#include "mgtc/evaluator.hpp"
#include "mgtc/rng.hpp"

namespace mgtc_test {

using mgtc::ActionNode;
using mgtc::Pst;
using mgtc::Rng;
using mgtc::Sentence;
using mgtc::SentenceSemantic;
using mgtc::SentenceType;
using mgtc::WordTag;

// ---- canonical PST generator ----
// Shape invariants mirrored from the parser's output: root is a Seq whose
// children are leaves or gateways; a gateway has >= 2 branches; a branch is
// a single element, an empty Seq, or a Seq of >= 2 elements.

struct PstGen {
    Rng rng;
    int next_action = 0;
    int actions_left;
    int max_depth;

    PstGen(uint64_t seed, int max_actions, int max_depth_)
        : rng(seed), actions_left(max_actions), max_depth(max_depth_) {}

    ActionNode fresh_action() {
        ActionNode a;
        a.name = "act" + std::to_string(next_action);
        if (rng.uniform() < 0.6) a.object = "obj" + std::to_string(next_action);
        if (rng.uniform() < 0.3) a.role = "agent";
        ++next_action;
        --actions_left;
        return a;
    }

    Pst element(int depth) {
        if (depth < max_depth && actions_left >= 2 && rng.uniform() < 0.35) return gateway(depth);
        return Pst::leaf(fresh_action());
    }

    Pst branch(int depth) {
        double r = rng.uniform();
        if (r < 0.1 || actions_left <= 0) return Pst::seq({});  // empty branch
        if (r < 0.6 || actions_left < 2) return element(depth);
        std::vector<Pst> elems;
        int n = 2 + static_cast<int>(rng.below(2));
        for (int i = 0; i < n && actions_left > 0; ++i) elems.push_back(element(depth));
        if (elems.size() == 1) return std::move(elems[0]);
        return Pst::seq(std::move(elems));
    }

    Pst gateway(int depth) {
        int n = 2 + static_cast<int>(rng.below(2));
        std::vector<Pst> branches;
        for (int i = 0; i < n; ++i) branches.push_back(branch(depth + 1));
        return rng.uniform() < 0.5 ? Pst::xor_(std::move(branches)) : Pst::and_(std::move(branches));
    }

    Pst root() {
        std::vector<Pst> elems;
        while (actions_left > 0) {
            elems.push_back(element(0));
            if (rng.uniform() < 0.25) break;
        }
        return Pst::seq(std::move(elems));
    }
};

inline Pst random_pst(uint64_t seed, int max_actions, int max_depth = 3) {
    PstGen gen(seed, max_actions, max_depth);
    return gen.root();
}

// ---- label emission (inverse of the parser, explicit-bracket form) ----

inline Sentence statement_sentence(SentenceSemantic sem) {
    Sentence s;
    s.s_type = SentenceType::STATEMENT;
    s.s_semantic = sem;
    switch (sem) {
        case SentenceSemantic::CONCURRENT: s.tokens = {"do", "these", "together"}; break;
        case SentenceSemantic::OPTIONAL: s.tokens = {"choose", "one", "option"}; break;
        case SentenceSemantic::BLOCK_BEGIN: s.tokens = {"first", "branch", "starts"}; break;
        case SentenceSemantic::BLOCK_END: s.tokens = {"branch", "ends", "here"}; break;
        case SentenceSemantic::SUCCESSIVE: s.tokens = {"then", "continue", "on"}; break;
    }
    for (const auto& t : s.tokens) s.text += (s.text.empty() ? "" : " ") + t;
    return s;
}

inline Sentence action_sentence(const ActionNode& a) {
    Sentence s;
    s.s_type = SentenceType::ACTION;
    if (!a.role.empty()) {
        s.tokens.push_back(a.role);
        s.word_tags.push_back(WordTag::ROLE);
    }
    s.tokens.push_back(a.name);
    s.word_tags.push_back(WordTag::ACTION_NAME);
    if (!a.object.empty()) {
        s.tokens.push_back("the");
        s.word_tags.push_back(WordTag::OTHER);
        s.tokens.push_back(a.object);
        s.word_tags.push_back(WordTag::OBJECT);
    }
    for (const auto& t : s.tokens) s.text += (s.text.empty() ? "" : " ") + t;
    return s;
}

inline void emit_element(const Pst& e, std::vector<Sentence>& out);

inline void emit_branch(const Pst& b, std::vector<Sentence>& out) {
    out.push_back(statement_sentence(SentenceSemantic::BLOCK_BEGIN));
    if (b.kind == Pst::Kind::Seq) {
        for (const auto& c : b.children) emit_element(c, out);
    } else {
        emit_element(b, out);
    }
    out.push_back(statement_sentence(SentenceSemantic::BLOCK_END));
}

inline void emit_element(const Pst& e, std::vector<Sentence>& out) {
    switch (e.kind) {
        case Pst::Kind::Leaf:
            out.push_back(action_sentence(e.action));
            break;
        case Pst::Kind::Xor:
        case Pst::Kind::And:
            out.push_back(statement_sentence(e.kind == Pst::Kind::Xor ? SentenceSemantic::OPTIONAL
                                                                      : SentenceSemantic::CONCURRENT));
            for (const auto& b : e.children) emit_branch(b, out);
            break;
        case Pst::Kind::Seq:
            for (const auto& c : e.children) emit_element(c, out);
            break;
    }
}

inline std::vector<Sentence> emit_labels(const Pst& root, uint64_t noop_seed = 0,
                                         bool sprinkle_noops = false) {
    Rng rng(noop_seed);
    std::vector<Sentence> out;
    for (const auto& c : root.children) {
        if (sprinkle_noops && rng.uniform() < 0.3)
            out.push_back(statement_sentence(SentenceSemantic::SUCCESSIVE));
        emit_element(c, out);
    }
    if (sprinkle_noops && rng.uniform() < 0.3)
        out.push_back(statement_sentence(SentenceSemantic::SUCCESSIVE));
    return out;
}

// ---- exhaustive trace oracle ----

using Trace = std::vector<int>;

inline std::vector<Trace> merge_pair(const Trace& a, const Trace& b) {
    if (a.empty()) return {b};
    if (b.empty()) return {a};
    std::vector<Trace> out;
    Trace ta(a.begin() + 1, a.end());
    for (auto& m : merge_pair(ta, b)) {
        Trace t = {a[0]};
        t.insert(t.end(), m.begin(), m.end());
        out.push_back(std::move(t));
    }
    Trace tb(b.begin() + 1, b.end());
    for (auto& m : merge_pair(a, tb)) {
        Trace t = {b[0]};
        t.insert(t.end(), m.begin(), m.end());
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<Trace> all_traces(const Pst& n, int& next_id) {
    switch (n.kind) {
        case Pst::Kind::Leaf:
            return {{next_id++}};
        case Pst::Kind::Seq: {
            std::vector<Trace> acc = {{}};
            for (const auto& c : n.children) {
                auto sub = all_traces(c, next_id);
                std::vector<Trace> merged;
                for (const auto& x : acc)
                    for (const auto& y : sub) {
                        Trace t = x;
                        t.insert(t.end(), y.begin(), y.end());
                        merged.push_back(std::move(t));
                    }
                acc = std::move(merged);
            }
            return acc;
        }
        case Pst::Kind::Xor: {
            std::vector<Trace> acc;
            for (const auto& c : n.children) {
                auto sub = all_traces(c, next_id);
                acc.insert(acc.end(), sub.begin(), sub.end());
            }
            return acc;
        }
        case Pst::Kind::And: {
            std::vector<Trace> acc = {{}};
            for (const auto& c : n.children) {
                auto sub = all_traces(c, next_id);
                std::vector<Trace> merged;
                for (const auto& x : acc)
                    for (const auto& y : sub)
                        for (auto& m : merge_pair(x, y)) merged.push_back(std::move(m));
                acc = std::move(merged);
            }
            return acc;
        }
    }
    return {{}};
}

enum class TraceRel { Before, After, Exclusive, Interleaving };

// classification by co-occurrence and order across all traces
inline TraceRel trace_relation(const std::vector<Trace>& traces, int a, int b) {
    bool saw_ab = false, saw_ba = false;
    for (const auto& t : traces) {
        int pa = -1, pb = -1;
        for (size_t i = 0; i < t.size(); ++i) {
            if (t[i] == a) pa = static_cast<int>(i);
            if (t[i] == b) pb = static_cast<int>(i);
        }
        if (pa < 0 || pb < 0) continue;
        (pa < pb ? saw_ab : saw_ba) = true;
    }
    if (!saw_ab && !saw_ba) return TraceRel::Exclusive;
    if (saw_ab && saw_ba) return TraceRel::Interleaving;
    return saw_ab ? TraceRel::Before : TraceRel::After;
}

// Full agreement check between the profile derivation and the trace oracle;
// returns the number of disagreeing pairs (0 = agreement).
inline int profile_oracle_mismatches(const Pst& pst) {
    std::vector<const Pst*> leaves;
    pst.collect_leaves(leaves);
    std::vector<std::string> keys;
    for (const Pst* l : leaves) keys.push_back(mgtc::normalize_action_key(l->action));

    int next_id = 0;
    auto traces = all_traces(pst, next_id);
    auto profile = mgtc::behavioral_profile(pst);

    int mismatches = 0;
    const int n = static_cast<int>(leaves.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            TraceRel expect = trace_relation(traces, i, j);
            auto ij = profile.relation(keys[static_cast<size_t>(i)], keys[static_cast<size_t>(j)]);
            auto ji = profile.relation(keys[static_cast<size_t>(j)], keys[static_cast<size_t>(i)]);
            bool ok = false;
            switch (expect) {
                case TraceRel::Exclusive:
                    ok = ij == mgtc::Relation::Exclusive && ji == mgtc::Relation::Exclusive;
                    break;
                case TraceRel::Interleaving:
                    ok = ij == mgtc::Relation::Interleaving && ji == mgtc::Relation::Interleaving;
                    break;
                case TraceRel::Before:
                    ok = ij == mgtc::Relation::StrictOrder && !ji.has_value();
                    break;
                case TraceRel::After:
                    ok = ji == mgtc::Relation::StrictOrder && !ij.has_value();
                    break;
            }
            if (!ok) ++mismatches;
        }
    return mismatches;
}

}  // namespace mgtc_test
