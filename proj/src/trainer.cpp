#include "mgtc/trainer.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mgtc/adam.hpp"
#include "mgtc/embeddings.hpp"

namespace mgtc {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

SentenceExample make_example(const Sentence& s, const Vocab& vocab) {
    SentenceExample ex;
    ex.tokens = token_ids(vocab, s.tokens);
    ex.type = s.s_type;
    if (s.s_semantic) ex.semantic = static_cast<int>(*s.s_semantic);
    for (WordTag t : s.word_tags) ex.tags.push_back(static_cast<int>(t));
    return ex;
}

static std::vector<SentenceExample> collect_examples(const std::vector<Document>& docs, const Vocab& vocab,
                                                     bool actions_only) {
    std::vector<SentenceExample> out;
    for (const auto& d : docs)
        for (const auto& s : d.sentences) {
            if (actions_only && s.s_type != SentenceType::ACTION) continue;
            out.push_back(make_example(s, vocab));
        }
    return out;
}

static void carve_dev(const std::vector<Document>& docs, double dev_fraction, uint64_t seed,
                      std::vector<Document>& train, std::vector<Document>& dev) {
    size_t n_dev = static_cast<size_t>(static_cast<double>(docs.size()) * dev_fraction);
    if (n_dev == 0 || n_dev >= docs.size()) {
        train = docs;
        dev = docs;  // tiny corpora: select-best degenerates to train metric
        return;
    }
    std::vector<size_t> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed ^ 0xdecaf);
    rng.shuffle(order);
    for (size_t i = 0; i < order.size(); ++i)
        (i < n_dev ? dev : train).push_back(docs[order[i]]);
}

std::string train_log_csv(const TrainLog& log, bool timing) {
    std::ostringstream os;
    os << "iteration,phase,loss,st1_acc,st2_acc,st3_acc,millis\n";
    auto acc = [&](double v) -> std::string {
        if (v < 0) return "";
        std::ostringstream s;
        s << v;
        return s.str();
    };
    for (const auto& r : log.rows) {
        os << r.iteration << "," << (r.phase == 'c' ? "coarse" : "fine") << "," << r.loss << ","
           << acc(r.st1_acc) << "," << acc(r.st2_acc) << "," << acc(r.st3_acc) << ",";
        if (timing && r.millis >= 0) os << r.millis;
        os << "\n";
    }
    return os.str();
}

EvalMetrics evaluate(const std::vector<Document>& docs, const Vocab& vocab, CoarseModel& coarse,
                     FineModel* fine) {
    EvalMetrics m;
    int64_t st1_hit = 0, st2_hit = 0, st3_hit = 0;
    for (const auto& d : docs)
        for (const auto& s : d.sentences) {
            SentenceExample ex = make_example(s, vocab);
            ++m.sentences;
            const int gold_type = s.s_type == SentenceType::ACTION ? 0 : 1;
            if (coarse.predict_st1(ex.tokens) == gold_type) ++st1_hit;
            if (s.s_type == SentenceType::STATEMENT) {
                ++m.statements;
                if (coarse.predict_st2(ex.tokens) == ex.semantic) ++st2_hit;
            } else if (fine) {
                auto tags = fine->predict_st3(ex.tokens);
                for (size_t j = 0; j < ex.tags.size(); ++j) {
                    ++m.action_words;
                    if (tags[j] == ex.tags[j]) ++st3_hit;
                }
            }
        }
    if (m.sentences) m.st1_acc = 100.0 * static_cast<double>(st1_hit) / static_cast<double>(m.sentences);
    if (m.statements) m.st2_acc = 100.0 * static_cast<double>(st2_hit) / static_cast<double>(m.statements);
    if (fine && m.action_words)
        m.st3_acc = 100.0 * static_cast<double>(st3_hit) / static_cast<double>(m.action_words);
    return m;
}

EvalMetrics majority_baseline(const std::vector<Document>& train_docs,
                              const std::vector<Document>& test_docs) {
    int64_t type_count[2] = {0, 0};
    int64_t sem_count[kNumSemantics] = {0};
    int64_t tag_count[kNumWordTags] = {0};
    for (const auto& d : train_docs)
        for (const auto& s : d.sentences) {
            ++type_count[s.s_type == SentenceType::ACTION ? 0 : 1];
            if (s.s_semantic) ++sem_count[static_cast<int>(*s.s_semantic)];
            for (WordTag t : s.word_tags) ++tag_count[static_cast<int>(t)];
        }
    const int maj_type = type_count[1] > type_count[0] ? 1 : 0;
    int maj_sem = 0, maj_tag = 0;
    for (int i = 1; i < kNumSemantics; ++i)
        if (sem_count[i] > sem_count[maj_sem]) maj_sem = i;
    for (int i = 1; i < kNumWordTags; ++i)
        if (tag_count[i] > tag_count[maj_tag]) maj_tag = i;

    EvalMetrics m;
    int64_t st1_hit = 0, st2_hit = 0, st3_hit = 0;
    for (const auto& d : test_docs)
        for (const auto& s : d.sentences) {
            ++m.sentences;
            if ((s.s_type == SentenceType::ACTION ? 0 : 1) == maj_type) ++st1_hit;
            if (s.s_type == SentenceType::STATEMENT) {
                ++m.statements;
                if (static_cast<int>(*s.s_semantic) == maj_sem) ++st2_hit;
            } else {
                for (WordTag t : s.word_tags) {
                    ++m.action_words;
                    if (static_cast<int>(t) == maj_tag) ++st3_hit;
                }
            }
        }
    if (m.sentences) m.st1_acc = 100.0 * static_cast<double>(st1_hit) / static_cast<double>(m.sentences);
    if (m.statements) m.st2_acc = 100.0 * static_cast<double>(st2_hit) / static_cast<double>(m.statements);
    if (m.action_words) m.st3_acc = 100.0 * static_cast<double>(st3_hit) / static_cast<double>(m.action_words);
    return m;
}

namespace {

// One mini-batch pass: shuffle order once per epoch, slice batches of
// hp.batch, run Adam on the summed loss.
template <typename LossFn, typename DevFn>
void run_phase(std::vector<SentenceExample>& examples, const HyperParams& hp, char phase,
               const LossFn& batch_loss, const DevFn& dev_metric, int eval_every, bool timing,
               ParamStore& store, ParamStore& best_params, double& best_dev, TrainLog& log) {
    if (examples.empty()) throw ValidationError("training: no sentences in the training split");
    AdamState adam;
    adam.lr = hp.lr;
    Rng shuffle_rng(hp.seed ^ 0x5eed);
    std::vector<size_t> order(examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    size_t cursor = order.size();  // trigger shuffle on first use

    const auto t0 = Clock::now();
    for (int iter = 1; iter <= hp.iterations; ++iter) {
        std::vector<SentenceExample> batch;
        for (int b = 0; b < hp.batch; ++b) {
            if (cursor == order.size()) {
                shuffle_rng.shuffle(order);
                cursor = 0;
            }
            batch.push_back(examples[order[cursor++]]);
        }
        Tape tape;
        auto loss = batch_loss(tape, batch);
        store.zero_grads();
        tape.backward(loss);
        adam_step(store, adam);

        TrainLogRow row;
        row.iteration = iter;
        row.phase = phase;
        row.loss = static_cast<double>(tape.scalar(loss));
        if (timing)
            row.millis = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
        if (eval_every > 0 && (iter % eval_every == 0 || iter == hp.iterations)) {
            double dev = dev_metric(row);
            if (dev > best_dev) {
                best_dev = dev;
                best_params = store;
            }
        }
        log.rows.push_back(row);
    }
    log.phase_millis = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

}  // namespace

CoarseTrainResult train_coarse(const std::vector<Document>& docs, const Vocab& vocab,
                               const TrainConfig& cfg) {
    if (docs.empty()) throw ValidationError("train-coarse: empty corpus");
    cfg.hp.validate();

    std::vector<Document> train_docs, dev_docs;
    carve_dev(docs, cfg.dev_fraction, cfg.hp.seed, train_docs, dev_docs);

    CoarseTrainResult res{CoarseModel::build(cfg.hp, vocab.size(), cfg.embeddings_trainable), {}, -1, {}};
    if (!cfg.embeddings.empty()) {
        auto& matrix = res.model.store.at(res.model.embedding.name).value;
        load_text_embeddings(cfg.embeddings, vocab, matrix);
    }

    auto examples = collect_examples(train_docs, vocab, false);
    auto loss_fn = [&](Tape& tape, const std::vector<SentenceExample>& batch) {
        return res.model.coarse_loss(tape, batch);
    };
    auto dev_fn = [&](TrainLogRow& row) {
        EvalMetrics m = evaluate(dev_docs, vocab, res.model);
        row.st1_acc = m.st1_acc;
        row.st2_acc = m.st2_acc;
        return (std::max(m.st1_acc, 0.0) + std::max(m.st2_acc, 0.0)) / 2.0;
    };
    run_phase(examples, cfg.hp, 'c', loss_fn, dev_fn, cfg.eval_every, cfg.timing, res.model.store,
              res.best_params, res.best_dev, res.log);
    if (res.best_dev < 0) res.best_params = res.model.store;
    return res;
}

FineTrainResult train_fine(const std::vector<Document>& docs, const Vocab& vocab,
                           const TrainConfig& cfg, CoarseModel coarse) {
    if (docs.empty()) throw ValidationError("train-fine: empty corpus");
    cfg.hp.validate();

    std::vector<Document> train_docs, dev_docs;
    carve_dev(docs, cfg.dev_fraction, cfg.hp.seed, train_docs, dev_docs);

    FineTrainResult res{transfer_and_freeze(std::move(coarse)), {}, -1, {}};
    auto examples = collect_examples(train_docs, vocab, true);
    if (examples.empty()) throw ValidationError("train-fine: no ACTION sentences in the training split");

    auto loss_fn = [&](Tape& tape, const std::vector<SentenceExample>& batch) {
        return res.model.fine_loss(tape, batch);
    };
    auto dev_fn = [&](TrainLogRow& row) {
        EvalMetrics m = evaluate(dev_docs, vocab, res.model.coarse, &res.model);
        row.st3_acc = m.st3_acc;
        return std::max(m.st3_acc, 0.0);
    };
    run_phase(examples, cfg.hp, 'f', loss_fn, dev_fn, cfg.eval_every, cfg.timing, res.model.store(),
              res.best_params, res.best_dev, res.log);
    if (res.best_dev < 0) res.best_params = res.model.store();
    return res;
}

// ---- config sidecar ----

static json hp_to_json(const HyperParams& hp) {
    json j;
    j["embed_dim"] = hp.embed_dim;
    j["hid"] = hp.hid;
    j["window_sizes"] = hp.window_sizes;
    j["filters_per_size"] = hp.filters_per_size;
    j["mlp_layers"] = hp.mlp_layers;
    j["mlp_hidden"] = hp.mlp_hidden;
    j["lambda1"] = hp.lambda1;
    j["lambda2"] = hp.lambda2;
    j["batch"] = hp.batch;
    j["lr"] = hp.lr;
    j["iterations"] = hp.iterations;
    j["seed"] = hp.seed;
    j["summary"] = hp.summary == SummaryMode::FinalStates ? "final" : "mean";
    j["st3_uses_hidden"] = hp.st3_uses_hidden;
    j["freeze_shared"] = hp.freeze_shared;
    return j;
}

static HyperParams hp_from_json(const json& j) {
    HyperParams hp;
    hp.embed_dim = j.at("embed_dim").get<int>();
    hp.hid = j.at("hid").get<int>();
    hp.window_sizes = j.at("window_sizes").get<std::vector<int>>();
    hp.filters_per_size = j.at("filters_per_size").get<int>();
    hp.mlp_layers = j.at("mlp_layers").get<int>();
    hp.mlp_hidden = j.at("mlp_hidden").get<int>();
    hp.lambda1 = j.at("lambda1").get<double>();
    hp.lambda2 = j.at("lambda2").get<double>();
    hp.batch = j.at("batch").get<int>();
    hp.lr = j.at("lr").get<double>();
    hp.iterations = j.at("iterations").get<int>();
    hp.seed = j.at("seed").get<uint64_t>();
    hp.summary = j.at("summary").get<std::string>() == "mean" ? SummaryMode::MeanHidden
                                                              : SummaryMode::FinalStates;
    hp.st3_uses_hidden = j.at("st3_uses_hidden").get<bool>();
    hp.freeze_shared = j.at("freeze_shared").get<bool>();
    return hp;
}

void save_model_config(const std::string& path, const ModelConfig& cfg) {
    json j;
    j["hyperparams"] = hp_to_json(cfg.hp);
    j["phase"] = cfg.phase;
    j["embeddings_trainable"] = cfg.embeddings_trainable;
    j["vocab"] = cfg.vocab_tokens;
    j["vocab_hash"] = cfg.vocab_hash;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot write model config: " + path);
    f << j.dump(2) << "\n";
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open model config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw FormatError("bad model config " + path + ": " + e.what());
    }
    ModelConfig cfg;
    cfg.hp = hp_from_json(j.at("hyperparams"));
    cfg.phase = j.at("phase").get<std::string>();
    cfg.embeddings_trainable = j.at("embeddings_trainable").get<bool>();
    cfg.vocab_tokens = j.at("vocab").get<std::vector<std::string>>();
    cfg.vocab_hash = j.at("vocab_hash").get<uint64_t>();
    Vocab v = vocab_from_config(cfg);
    if (v.hash() != cfg.vocab_hash)
        throw ValidationError("model config " + path + ": vocab hash mismatch (corrupted sidecar?)");
    return cfg;
}

Vocab vocab_from_config(const ModelConfig& cfg) {
    Vocab v;
    v.tokens = cfg.vocab_tokens;
    for (int i = 0; i < static_cast<int>(v.tokens.size()); ++i) v.index[v.tokens[static_cast<size_t>(i)]] = i;
    return v;
}

CoarseModel build_coarse_from(const ModelConfig& cfg, const ParamStore& weights) {
    CoarseModel m = CoarseModel::build(cfg.hp, static_cast<int>(cfg.vocab_tokens.size()),
                                       cfg.embeddings_trainable);
    load_values_into(m.store, weights);
    return m;
}

FineModel build_fine_from(const ModelConfig& cfg, const ParamStore& weights) {
    if (cfg.phase != "fine")
        throw ValidationError("checkpoint is not a fine-phase checkpoint (phase=" + cfg.phase + ")");
    CoarseModel base = CoarseModel::build(cfg.hp, static_cast<int>(cfg.vocab_tokens.size()),
                                          cfg.embeddings_trainable);
    FineModel fine = transfer_and_freeze(std::move(base));
    load_values_into(fine.store(), weights);
    return fine;
}

}  // namespace mgtc
