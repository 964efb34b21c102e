#include "mgtc/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <set>
#include <sstream>

namespace mgtc {

// ---- behavioral profile ----

std::string normalize_action_key(const ActionNode& a) {
    auto norm = [](const std::string& s) {
        std::string out;
        bool space = false;
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                space = !out.empty();
            } else {
                if (space) out.push_back(' ');
                space = false;
                out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        }
        return out;
    };
    std::string key = norm(a.name);
    std::string obj = norm(a.object);
    if (!obj.empty()) key += " " + obj;
    return key;
}

std::optional<Relation> BehavioralProfile::relation(const std::string& a, const std::string& b) const {
    if (a == b) return std::nullopt;
    const bool fwd = a < b;
    auto it = rels.find(fwd ? std::make_pair(a, b) : std::make_pair(b, a));
    if (it == rels.end()) return std::nullopt;
    switch (it->second) {
        case Stored::Exclusive: return Relation::Exclusive;
        case Stored::Interleaving: return Relation::Interleaving;
        case Stored::OrderFwd: return fwd ? std::optional<Relation>(Relation::StrictOrder) : std::nullopt;
        case Stored::OrderRev: return fwd ? std::nullopt : std::optional<Relation>(Relation::StrictOrder);
    }
    return std::nullopt;
}

void BehavioralProfile::set_order(const std::string& before, const std::string& after) {
    if (before < after)
        rels[{before, after}] = Stored::OrderFwd;
    else
        rels[{after, before}] = Stored::OrderRev;
}

void BehavioralProfile::set_symmetric(const std::string& a, const std::string& b, Relation r) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    rels[key] = r == Relation::Exclusive ? Stored::Exclusive : Stored::Interleaving;
}

namespace {

std::vector<std::string> leaf_keys(const Pst& pst) {
    std::vector<const Pst*> leaves;
    pst.collect_leaves(leaves);
    std::vector<std::string> keys;
    std::map<std::string, int> seen;
    for (const Pst* l : leaves) {
        std::string key = normalize_action_key(l->action);
        int n = ++seen[key];
        if (n > 1) key += "#" + std::to_string(n);
        keys.push_back(std::move(key));
    }
    return keys;
}

// in-order leaf indices per subtree; cross-child pairs get the relation of
// their lowest common ancestor
void walk(const Pst& n, int& next, std::vector<int>& mine, const std::vector<std::string>& keys,
          BehavioralProfile& prof) {
    if (n.is_leaf()) {
        mine.push_back(next++);
        return;
    }
    std::vector<std::vector<int>> per_child;
    for (const auto& c : n.children) {
        std::vector<int> sub;
        walk(c, next, sub, keys, prof);
        per_child.push_back(std::move(sub));
    }
    for (size_t i = 0; i < per_child.size(); ++i)
        for (size_t j = i + 1; j < per_child.size(); ++j)
            for (int a : per_child[i])
                for (int b : per_child[j]) {
                    const std::string& ka = keys[static_cast<size_t>(a)];
                    const std::string& kb = keys[static_cast<size_t>(b)];
                    switch (n.kind) {
                        case Pst::Kind::Seq: prof.set_order(ka, kb); break;
                        case Pst::Kind::Xor: prof.set_symmetric(ka, kb, Relation::Exclusive); break;
                        case Pst::Kind::And: prof.set_symmetric(ka, kb, Relation::Interleaving); break;
                        case Pst::Kind::Leaf: break;
                    }
                }
    for (auto& sub : per_child)
        for (int x : sub) mine.push_back(x);
}

}  // namespace

BehavioralProfile behavioral_profile(const Pst& pst) {
    BehavioralProfile prof;
    prof.actions = leaf_keys(pst);
    int next = 0;
    std::vector<int> all;
    walk(pst, next, all, prof.actions, prof);
    return prof;
}

SimilarityScore behavior_similarity(const Pst& extracted, const Pst& gold) {
    BehavioralProfile pa = behavioral_profile(extracted);
    BehavioralProfile pb = behavioral_profile(gold);

    SimilarityScore s;
    s.actions_a = static_cast<int>(pa.actions.size());
    s.actions_b = static_cast<int>(pb.actions.size());
    std::set<std::string> keys_a(pa.actions.begin(), pa.actions.end());
    std::set<std::string> keys_b(pb.actions.begin(), pb.actions.end());
    for (const auto& k : keys_a)
        if (keys_b.count(k)) ++s.matched_actions;

    s.relations_a = static_cast<int>(pa.rels.size());
    s.relations_b = static_cast<int>(pb.rels.size());
    for (const auto& [pair, rel] : pa.rels) {
        auto it = pb.rels.find(pair);
        if (it != pb.rels.end() && it->second == rel) ++s.matched_relations;
    }

    if (s.relations_a + s.relations_b > 0) {
        s.value = 2.0 * s.matched_relations / static_cast<double>(s.relations_a + s.relations_b);
    } else if (s.actions_a + s.actions_b > 0) {
        // relation-free models: fall back to action-set agreement
        s.value = 2.0 * s.matched_actions / static_cast<double>(s.actions_a + s.actions_b);
    } else {
        s.value = 1.0;  // two empty models are identical
    }
    return s;
}

// ---- paired t-test ----

namespace {

// continued fraction for the regularized incomplete beta (Lentz)
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("paired t-test: score lists differ in length");
    const size_t n = a.size();
    if (n < 2) throw ValidationError("paired t-test: need at least 2 paired scores");

    double mean = 0.0;
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);

    TTestResult r;
    r.df = static_cast<int>(n) - 1;
    if (var == 0.0) {
        r.exact_tie = true;
        if (mean == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    r.t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(r.df);
    r.p = incomplete_beta(df / 2.0, 0.5, df / (df + r.t * r.t));
    return r;
}

// ---- k-fold ----

namespace {

void accumulate(std::vector<double>& vals, double v) {
    if (v >= 0) vals.push_back(v);
}

std::pair<double, double> mean_std(const std::vector<double>& vals) {
    if (vals.empty()) return {-1, -1};
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

KfoldResult kfold_evaluate(const std::vector<Document>& docs, int folds, uint64_t seed,
                           const TrainEvalFn& train_fn, int jobs) {
    auto fold_docs = kfold_split(docs, folds, seed);
    KfoldResult res;
    res.folds = folds;
    res.per_fold.resize(static_cast<size_t>(folds));

    auto run_fold = [&](int f) {
        std::vector<Document> train, test;
        for (int i = 0; i < folds; ++i) {
            auto& dst = i == f ? test : train;
            for (const auto& d : fold_docs[static_cast<size_t>(i)]) dst.push_back(d);
        }
        res.per_fold[static_cast<size_t>(f)] = train_fn(train, test);
    };

    if (jobs > 1) {
        std::vector<std::future<void>> futs;
        for (int f = 0; f < folds; ++f) futs.push_back(std::async(std::launch::async, run_fold, f));
        for (auto& fu : futs) fu.get();
    } else {
        for (int f = 0; f < folds; ++f) run_fold(f);
    }

    std::vector<double> v1, v2, v3, vb;
    for (const auto& s : res.per_fold) {
        accumulate(v1, s.st1);
        accumulate(v2, s.st2);
        accumulate(v3, s.st3);
        accumulate(vb, s.behavior);
    }
    std::tie(res.mean.st1, res.stddev.st1) = mean_std(v1);
    std::tie(res.mean.st2, res.stddev.st2) = mean_std(v2);
    std::tie(res.mean.st3, res.stddev.st3) = mean_std(v3);
    std::tie(res.mean.behavior, res.stddev.behavior) = mean_std(vb);
    return res;
}

// ---- prediction-side extraction ----

Sentence predict_labels(const Sentence& input, const Vocab& vocab, CoarseModel& coarse, FineModel& fine) {
    Sentence out;
    out.text = input.text;
    out.tokens = input.tokens;
    std::vector<int> ids = token_ids(vocab, input.tokens);
    if (coarse.predict_st1(ids) == 1) {
        out.s_type = SentenceType::STATEMENT;
        out.s_semantic = static_cast<SentenceSemantic>(coarse.predict_st2(ids));
    } else {
        out.s_type = SentenceType::ACTION;
        for (int t : fine.predict_st3(ids)) out.word_tags.push_back(static_cast<WordTag>(t));
    }
    return out;
}

double pme_behavior_similarity(const std::vector<Document>& docs, const Vocab& vocab,
                               CoarseModel& coarse, FineModel& fine) {
    if (docs.empty()) return -1;
    double total = 0.0;
    for (const auto& doc : docs) {
        std::vector<Sentence> predicted;
        predicted.reserve(doc.sentences.size());
        for (const auto& s : doc.sentences) predicted.push_back(predict_labels(s, vocab, coarse, fine));
        Pst extracted = parse_labels(predicted, false).root;
        Pst gold = parse_labels(doc.sentences, false).root;
        total += behavior_similarity(extracted, gold).value;
    }
    return 100.0 * total / static_cast<double>(docs.size());
}

std::string report_table(const SubtaskScores& model, const SubtaskScores* baseline) {
    std::ostringstream os;
    auto cell = [](double v) {
        if (v < 0) return std::string("     -");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%6.2f", v);
        return std::string(buf);
    };
    os << "Task              ST1     ST2     ST3     PME\n";
    os << "model          " << cell(model.st1) << "  " << cell(model.st2) << "  " << cell(model.st3)
       << "  " << cell(model.behavior) << "\n";
    if (baseline)
        os << "majority-class " << cell(baseline->st1) << "  " << cell(baseline->st2) << "  "
           << cell(baseline->st3) << "  " << cell(baseline->behavior) << "\n";
    return os.str();
}

}  // namespace mgtc
