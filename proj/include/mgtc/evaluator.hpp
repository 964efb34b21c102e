#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgtc/assembler.hpp"
#include "mgtc/trainer.hpp"

namespace mgtc {

enum class Relation { StrictOrder, Exclusive, Interleaving };

// Pairwise ordering relations between action leaves, keyed by normalized
// "name object" strings (repeated keys get #2, #3... suffixes in document
// order). Exclusive/interleaving are symmetric; strict order is directional.
struct BehavioralProfile {
    enum class Stored { OrderFwd, OrderRev, Exclusive, Interleaving };

    std::vector<std::string> actions;  // document order
    std::map<std::pair<std::string, std::string>, Stored> rels;  // key: lexicographically ordered pair

    // Relation of the ordered pair (a, b); StrictOrder means a strictly
    // before b. Unrelated or unknown pairs give nullopt.
    std::optional<Relation> relation(const std::string& a, const std::string& b) const;

    void set_order(const std::string& before, const std::string& after);
    void set_symmetric(const std::string& a, const std::string& b, Relation r);
};

std::string normalize_action_key(const ActionNode& a);

// Leaves under a common Seq ancestor are strictly ordered; distinct Xor
// branches are exclusive; distinct And branches interleave.
BehavioralProfile behavioral_profile(const Pst& pst);

struct SimilarityScore {
    double value = 0.0;
    int matched_relations = 0, relations_a = 0, relations_b = 0;
    int matched_actions = 0, actions_a = 0, actions_b = 0;
};

// F1 over the union of pairwise relations; actions match by normalized key.
// Models without any relation pair fall back to F1 over action keys.
SimilarityScore behavior_similarity(const Pst& extracted, const Pst& gold);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
    bool exact_tie = false;  // zero variance of differences
};

// Two-tailed paired t-test; p from the Student-t CDF.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b), exposed for the t CDF.
double incomplete_beta(double a, double b, double x);

struct SubtaskScores {
    double st1 = -1, st2 = -1, st3 = -1, behavior = -1;
};

using TrainEvalFn =
    std::function<SubtaskScores(const std::vector<Document>& train, const std::vector<Document>& test)>;

struct KfoldResult {
    int folds = 0;
    SubtaskScores mean, stddev;
    std::vector<SubtaskScores> per_fold;
};

// Fresh model per fold, deterministic fold assignment under seed; folds may
// run in parallel with jobs > 1.
KfoldResult kfold_evaluate(const std::vector<Document>& docs, int folds, uint64_t seed,
                           const TrainEvalFn& train_fn, int jobs = 1);

// Predicted alpha labels for one sentence (ST1 gate decides whether ST2 or
// ST3 runs, mirroring extraction).
Sentence predict_labels(const Sentence& input, const Vocab& vocab, CoarseModel& coarse, FineModel& fine);

// Mean behavior similarity between prediction-derived and gold-label PSTs.
double pme_behavior_similarity(const std::vector<Document>& docs, const Vocab& vocab,
                               CoarseModel& coarse, FineModel& fine);

std::string report_table(const SubtaskScores& model, const SubtaskScores* baseline = nullptr);

}  // namespace mgtc
