#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mgtc/corpus.hpp"

namespace mgtc {

// One executable step with its extracted arguments.
struct ActionNode {
    int sentence_index = -1;
    std::string role;    // may be empty
    std::string name;    // empty only on a diagnosed malformed action
    std::string object;  // may be empty

    bool operator==(const ActionNode& o) const {
        return role == o.role && name == o.name && object == o.object;
    }
};

// Block-structured process tree: sequences, exclusive/concurrent blocks,
// action leaves.
struct Pst {
    enum class Kind { Seq, Xor, And, Leaf };
    Kind kind = Kind::Seq;
    std::vector<Pst> children;  // Seq/Xor/And
    ActionNode action;          // Leaf

    static Pst seq(std::vector<Pst> ch = {}) { return Pst{Kind::Seq, std::move(ch), {}}; }
    static Pst xor_(std::vector<Pst> ch) { return Pst{Kind::Xor, std::move(ch), {}}; }
    static Pst and_(std::vector<Pst> ch) { return Pst{Kind::And, std::move(ch), {}}; }
    static Pst leaf(ActionNode a) { return Pst{Kind::Leaf, {}, std::move(a)}; }

    bool is_leaf() const { return kind == Kind::Leaf; }
    int count_actions() const;
    void collect_leaves(std::vector<const Pst*>& out) const;

    // structural equality on shape and action arguments (sentence indices ignored)
    bool same_structure(const Pst& o) const;
};

struct Diagnostic {
    enum class Severity { Warning, Error };
    int sentence_index = -1;
    Severity severity = Severity::Warning;
    std::string message;
};

struct ParseResult {
    Pst root;  // always a Seq
    std::vector<Diagnostic> diagnostics;

    bool has_errors() const {
        for (const auto& d : diagnostics)
            if (d.severity == Diagnostic::Severity::Error) return true;
        return false;
    }
};

// First contiguous run of each tag becomes the argument; extra runs emit a
// warning, a missing ACTION_NAME run emits "action without name".
ActionNode extract_args(const Sentence& s, int sentence_index, std::vector<Diagnostic>* diags = nullptr);

// Parses an alpha-labeled sentence stream into a PST.
//
//   Process := Elem*
//   Elem    := Action | Gateway | successive-statement (no-op)
//   Gateway := (optional|concurrent) Branch+
//   Branch  := block-begin Elem* block-end
//            | (without explicit blocks) each ACTION sentence of the
//              immediately following run becomes a single-action branch
//
// Lenient mode recovers from label noise (unmatched block-ends close the
// innermost construct, stray block-begins open plain sequential sub-blocks);
// strict mode throws on any ERROR diagnostic.
ParseResult parse_labels(const std::vector<Sentence>& sentences, bool strict = false);

// Flat node/edge workflow graph derived from a PST.
struct ProcessModel {
    enum class NodeType { Start, End, Action, XorSplit, XorJoin, AndSplit, AndJoin };
    struct Node {
        int id = 0;
        NodeType type = NodeType::Action;
        ActionNode action;  // Action nodes only
    };
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> edges;

    int start_id() const;
    int end_id() const;
};

// Seq -> chain, Xor/And -> split + branches + matching join, with unique
// start/end nodes.
ProcessModel pst_to_graph(const Pst& pst);

// Deterministic Graphviz rendering: actions as boxes, gateways as diamonds
// labeled x/+.
std::string to_dot(const ProcessModel& model);

// Nested-JSON serialization of a PST (golden files, `render` subcommand).
std::string pst_to_json(const Pst& pst);
Pst pst_from_json(const std::string& text);

}  // namespace mgtc
