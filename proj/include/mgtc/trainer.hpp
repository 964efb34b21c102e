#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mgtc/corpus.hpp"
#include "mgtc/model.hpp"

namespace mgtc {

struct TrainConfig {
    HyperParams hp;
    double dev_fraction = 0.1;  // document-level dev slice for best-model selection
    int eval_every = 50;
    bool timing = false;             // include wall-clock millis in the log
    std::string embeddings;          // optional pretrained vector file
    bool embeddings_trainable = true;
};

struct TrainLogRow {
    int iteration = 0;
    char phase = 'c';  // 'c' coarse, 'f' fine
    double loss = 0.0;
    double st1_acc = -1, st2_acc = -1, st3_acc = -1;  // dev metrics at eval points
    long long millis = -1;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    long long phase_millis = 0;
};

std::string train_log_csv(const TrainLog& log, bool timing);

struct EvalMetrics {
    double st1_acc = -1, st2_acc = -1, st3_acc = -1;
    int64_t sentences = 0, statements = 0, action_words = 0;
};

struct CoarseTrainResult {
    CoarseModel model;
    ParamStore best_params;
    double best_dev = -1;
    TrainLog log;
};

struct FineTrainResult {
    FineModel model;
    ParamStore best_params;
    double best_dev = -1;
    TrainLog log;
};

// Adam over the coarse loss on shuffled mini-batches; deterministic under
// cfg.hp.seed. Best-dev parameters are snapshotted at eval points.
CoarseTrainResult train_coarse(const std::vector<Document>& docs, const Vocab& vocab,
                               const TrainConfig& cfg);

// Transfer + freeze, then Adam over the fine loss on ACTION sentences.
FineTrainResult train_fine(const std::vector<Document>& docs, const Vocab& vocab,
                           const TrainConfig& cfg, CoarseModel coarse);

// ST1 accuracy over all sentences, ST2 over gold STATEMENTs, ST3 word
// accuracy over gold ACTION sentences (skipped when `fine` is null).
EvalMetrics evaluate(const std::vector<Document>& docs, const Vocab& vocab, CoarseModel& coarse,
                     FineModel* fine = nullptr);

// Majority-class reference row for the same splits.
EvalMetrics majority_baseline(const std::vector<Document>& train_docs,
                              const std::vector<Document>& test_docs);

// ---- checkpoint sidecar ----
// Hyperparameters + vocabulary travel next to the weights so evaluation can
// refuse mismatched pairs.

struct ModelConfig {
    HyperParams hp;
    std::string phase;  // "coarse" | "fine"
    bool embeddings_trainable = true;
    std::vector<std::string> vocab_tokens;
    uint64_t vocab_hash = 0;
};

void save_model_config(const std::string& path, const ModelConfig& cfg);
ModelConfig load_model_config(const std::string& path);
Vocab vocab_from_config(const ModelConfig& cfg);

CoarseModel build_coarse_from(const ModelConfig& cfg, const ParamStore& weights);
FineModel build_fine_from(const ModelConfig& cfg, const ParamStore& weights);

}  // namespace mgtc
