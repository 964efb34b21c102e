#include "mgtc/assembler.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace mgtc {

using nlohmann::json;

int Pst::count_actions() const {
    if (is_leaf()) return 1;
    int n = 0;
    for (const auto& c : children) n += c.count_actions();
    return n;
}

void Pst::collect_leaves(std::vector<const Pst*>& out) const {
    if (is_leaf()) {
        out.push_back(this);
        return;
    }
    for (const auto& c : children) c.collect_leaves(out);
}

bool Pst::same_structure(const Pst& o) const {
    if (kind != o.kind) return false;
    if (is_leaf()) return action == o.action;
    if (children.size() != o.children.size()) return false;
    for (size_t i = 0; i < children.size(); ++i)
        if (!children[i].same_structure(o.children[i])) return false;
    return true;
}

// ---- argument extraction ----

namespace {

// first maximal run of `tag`; true if a later disjoint run exists
std::pair<std::string, bool> first_run(const Sentence& s, WordTag tag) {
    std::string run;
    bool in_run = false, done = false, extra = false;
    for (size_t i = 0; i < s.tokens.size(); ++i) {
        if (s.word_tags[i] == tag) {
            if (done) {
                extra = true;
                break;
            }
            if (!run.empty()) run += " ";
            run += s.tokens[i];
            in_run = true;
        } else if (in_run) {
            in_run = false;
            done = true;
        }
    }
    return {run, extra};
}

}  // namespace

ActionNode extract_args(const Sentence& s, int sentence_index, std::vector<Diagnostic>* diags) {
    ActionNode a;
    a.sentence_index = sentence_index;
    auto warn = [&](const std::string& msg) {
        if (diags) diags->push_back({sentence_index, Diagnostic::Severity::Warning, msg});
    };
    struct Slot {
        WordTag tag;
        std::string* field;
        const char* label;
    };
    Slot slots[] = {{WordTag::ROLE, &a.role, "role"},
                    {WordTag::ACTION_NAME, &a.name, "name"},
                    {WordTag::OBJECT, &a.object, "object"}};
    for (auto& slot : slots) {
        auto [run, extra] = first_run(s, slot.tag);
        *slot.field = run;
        if (extra) warn(std::string("multiple ") + slot.label + " runs; keeping the first");
    }
    if (a.name.empty()) warn("action without name");
    return a;
}

// ---- label-stream parser ----

namespace {

struct Frame {
    enum class K { Root, Block, Branch, Gateway };
    K k = K::Root;
    int open_index = -1;
    std::vector<Pst> elems;  // containers
    // gateway state
    Pst::Kind gw_kind = Pst::Kind::Xor;
    std::vector<Pst> branches;
    enum class GMode { Undecided, Implicit, Explicit };
    GMode gmode = GMode::Undecided;

    bool is_container() const { return k != K::Gateway; }
};

struct Parser {
    std::vector<Frame> stack;
    std::vector<Diagnostic> diags;

    Parser() { stack.push_back(Frame{}); }

    Frame& top() { return stack.back(); }
    Frame& container_below() { return stack[stack.size() - 2]; }

    void warn(int idx, const std::string& msg) {
        diags.push_back({idx, Diagnostic::Severity::Warning, msg});
    }
    void error(int idx, const std::string& msg) {
        diags.push_back({idx, Diagnostic::Severity::Error, msg});
    }

    // A pending gateway self-closes as soon as anything it cannot absorb
    // arrives. Zero branches is an error (dropped); one branch collapses to
    // plain sequence.
    void finalize_gateway() {
        Frame g = std::move(top());
        stack.pop_back();
        Frame& parent = top();
        if (g.branches.empty()) {
            error(g.open_index, "gateway with no branches");
        } else if (g.branches.size() == 1) {
            warn(g.open_index, "degenerate gateway with a single branch; collapsed to sequence");
            parent.elems.push_back(std::move(g.branches[0]));
        } else {
            parent.elems.push_back(Pst{g.gw_kind, std::move(g.branches), {}});
        }
    }

    void close_pending_gateways() {
        while (top().k == Frame::K::Gateway) finalize_gateway();
    }

    static Pst pack(std::vector<Pst> elems) {
        if (elems.size() == 1) return std::move(elems[0]);
        return Pst::seq(std::move(elems));
    }

    void close_branch() {
        Frame b = std::move(top());
        stack.pop_back();
        Frame& g = top();
        g.branches.push_back(pack(std::move(b.elems)));
        g.gmode = Frame::GMode::Explicit;
    }

    void close_block() {
        Frame b = std::move(top());
        stack.pop_back();
        if (b.elems.empty()) return;  // empty stray block contributes nothing
        top().elems.push_back(pack(std::move(b.elems)));
    }

    void on_action(const Sentence& s, int idx) {
        Pst leaf = Pst::leaf(extract_args(s, idx, &diags));
        if (top().k == Frame::K::Gateway) {
            Frame& g = top();
            if (g.gmode == Frame::GMode::Explicit) {
                // explicit branch list interrupted by a bare action
                finalize_gateway();
                top().elems.push_back(std::move(leaf));
            } else {
                g.gmode = Frame::GMode::Implicit;
                g.branches.push_back(std::move(leaf));
            }
        } else {
            top().elems.push_back(std::move(leaf));
        }
    }

    void on_statement(const Sentence& s, int idx) {
        switch (*s.s_semantic) {
            case SentenceSemantic::SUCCESSIVE:
                // plain ordering: contributes no structure, but ends any
                // pending gateway's branch run
                close_pending_gateways();
                break;
            case SentenceSemantic::OPTIONAL:
            case SentenceSemantic::CONCURRENT: {
                close_pending_gateways();
                Frame g;
                g.k = Frame::K::Gateway;
                g.open_index = idx;
                g.gw_kind = *s.s_semantic == SentenceSemantic::OPTIONAL ? Pst::Kind::Xor : Pst::Kind::And;
                stack.push_back(std::move(g));
                break;
            }
            case SentenceSemantic::BLOCK_BEGIN: {
                if (top().k == Frame::K::Gateway && top().gmode != Frame::GMode::Implicit) {
                    Frame b;
                    b.k = Frame::K::Branch;
                    b.open_index = idx;
                    stack.push_back(std::move(b));
                } else {
                    close_pending_gateways();
                    warn(idx, "block begin outside a gateway; treated as a sequential sub-block");
                    Frame b;
                    b.k = Frame::K::Block;
                    b.open_index = idx;
                    stack.push_back(std::move(b));
                }
                break;
            }
            case SentenceSemantic::BLOCK_END: {
                close_pending_gateways();
                if (top().k == Frame::K::Branch)
                    close_branch();
                else if (top().k == Frame::K::Block)
                    close_block();
                else
                    error(idx, "unmatched block end (no open block)");
                break;
            }
        }
    }

    ParseResult finish() {
        while (stack.size() > 1) {
            if (top().k == Frame::K::Gateway) {
                finalize_gateway();
            } else if (top().k == Frame::K::Branch) {
                warn(top().open_index, "unclosed branch block at end of document");
                close_branch();
            } else {
                warn(top().open_index, "unclosed block at end of document");
                close_block();
            }
        }
        ParseResult r;
        r.root = Pst::seq(std::move(top().elems));
        r.diagnostics = std::move(diags);
        return r;
    }
};

}  // namespace

ParseResult parse_labels(const std::vector<Sentence>& sentences, bool strict) {
    Parser p;
    for (size_t i = 0; i < sentences.size(); ++i) {
        const Sentence& s = sentences[i];
        const int idx = static_cast<int>(i);
        if (s.s_type == SentenceType::ACTION) {
            if (s.word_tags.size() != s.tokens.size())
                throw ValidationError("parse_labels: sentence " + std::to_string(i) +
                                      ": ACTION sentence without word tags");
            p.on_action(s, idx);
        } else {
            if (!s.s_semantic)
                throw ValidationError("parse_labels: sentence " + std::to_string(i) +
                                      ": STATEMENT sentence without a semantic label");
            p.on_statement(s, idx);
        }
    }
    ParseResult r = p.finish();
    if (strict && r.has_errors()) {
        for (const auto& d : r.diagnostics)
            if (d.severity == Diagnostic::Severity::Error)
                throw ValidationError("parse error at sentence " + std::to_string(d.sentence_index) + ": " +
                                      d.message);
    }
    return r;
}

// ---- graph construction ----

int ProcessModel::start_id() const {
    for (const auto& n : nodes)
        if (n.type == NodeType::Start) return n.id;
    throw ValidationError("process model has no start node");
}

int ProcessModel::end_id() const {
    for (const auto& n : nodes)
        if (n.type == NodeType::End) return n.id;
    throw ValidationError("process model has no end node");
}

namespace {

struct GraphBuilder {
    ProcessModel m;

    int add(ProcessModel::NodeType t, ActionNode a = {}) {
        int id = static_cast<int>(m.nodes.size());
        m.nodes.push_back({id, t, std::move(a)});
        return id;
    }

    void edge(int a, int b) { m.edges.emplace_back(a, b); }

    // entry/exit of the subgraph; nullopt for empty subtrees
    std::optional<std::pair<int, int>> build(const Pst& n) {
        using NT = ProcessModel::NodeType;
        switch (n.kind) {
            case Pst::Kind::Leaf: {
                int id = add(NT::Action, n.action);
                return {{id, id}};
            }
            case Pst::Kind::Seq: {
                std::optional<std::pair<int, int>> acc;
                for (const auto& c : n.children) {
                    auto r = build(c);
                    if (!r) continue;
                    if (acc) {
                        edge(acc->second, r->first);
                        acc->second = r->second;
                    } else {
                        acc = r;
                    }
                }
                return acc;
            }
            case Pst::Kind::Xor:
            case Pst::Kind::And: {
                const bool is_xor = n.kind == Pst::Kind::Xor;
                int split = add(is_xor ? NT::XorSplit : NT::AndSplit);
                std::vector<std::optional<std::pair<int, int>>> parts;
                for (const auto& c : n.children) parts.push_back(build(c));
                int join = add(is_xor ? NT::XorJoin : NT::AndJoin);
                for (const auto& r : parts) {
                    if (r) {
                        edge(split, r->first);
                        edge(r->second, join);
                    } else {
                        edge(split, join);
                    }
                }
                return {{split, join}};
            }
        }
        return std::nullopt;
    }
};

}  // namespace

ProcessModel pst_to_graph(const Pst& pst) {
    GraphBuilder b;
    int start = b.add(ProcessModel::NodeType::Start);
    auto body = b.build(pst);
    int end = b.add(ProcessModel::NodeType::End);
    if (body) {
        b.edge(start, body->first);
        b.edge(body->second, end);
    } else {
        b.edge(start, end);
    }
    return std::move(b.m);
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string action_label(const ActionNode& a) {
    std::string label;
    if (!a.role.empty()) label += a.role + ": ";
    label += a.name.empty() ? "?" : a.name;
    if (!a.object.empty()) label += " " + a.object;
    return label;
}

}  // namespace

std::string to_dot(const ProcessModel& model) {
    using NT = ProcessModel::NodeType;
    std::ostringstream os;
    os << "digraph process {\n  rankdir=LR;\n";
    for (const auto& n : model.nodes) {
        os << "  n" << n.id << " [";
        switch (n.type) {
            case NT::Start: os << "shape=circle, label=\"start\""; break;
            case NT::End: os << "shape=doublecircle, label=\"end\""; break;
            case NT::Action: os << "shape=box, label=\"" << dot_escape(action_label(n.action)) << "\""; break;
            case NT::XorSplit:
            case NT::XorJoin: os << "shape=diamond, label=\"x\""; break;
            case NT::AndSplit:
            case NT::AndJoin: os << "shape=diamond, label=\"+\""; break;
        }
        os << "];\n";
    }
    for (const auto& [a, b] : model.edges) os << "  n" << a << " -> n" << b << ";\n";
    os << "}\n";
    return os.str();
}

// ---- PST json ----

namespace {

json pst_to_json_obj(const Pst& p) {
    json j;
    switch (p.kind) {
        case Pst::Kind::Seq: j["kind"] = "seq"; break;
        case Pst::Kind::Xor: j["kind"] = "xor"; break;
        case Pst::Kind::And: j["kind"] = "and"; break;
        case Pst::Kind::Leaf: {
            j["kind"] = "action";
            j["role"] = p.action.role;
            j["name"] = p.action.name;
            j["object"] = p.action.object;
            j["sentence"] = p.action.sentence_index;
            return j;
        }
    }
    json ch = json::array();
    for (const auto& c : p.children) ch.push_back(pst_to_json_obj(c));
    j["children"] = ch;
    return j;
}

Pst pst_from_json_obj(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "action") {
        ActionNode a;
        a.role = j.value("role", "");
        a.name = j.value("name", "");
        a.object = j.value("object", "");
        a.sentence_index = j.value("sentence", -1);
        return Pst::leaf(std::move(a));
    }
    std::vector<Pst> children;
    for (const auto& c : j.at("children")) children.push_back(pst_from_json_obj(c));
    if (kind == "seq") return Pst::seq(std::move(children));
    if (kind == "xor") return Pst::xor_(std::move(children));
    if (kind == "and") return Pst::and_(std::move(children));
    throw FormatError("pst json: unknown kind " + kind);
}

}  // namespace

std::string pst_to_json(const Pst& pst) { return pst_to_json_obj(pst).dump(2); }

Pst pst_from_json(const std::string& text) {
    try {
        return pst_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("pst json: ") + e.what());
    }
}

}  // namespace mgtc
