#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mgtc/corpus.hpp"
#include "mgtc/layers.hpp"
#include "mgtc/param_store.hpp"
#include "mgtc/tape.hpp"

namespace mgtc {

struct HyperParams {
    int embed_dim = 100;
    int hid = 64;
    std::vector<int> window_sizes = {1, 2, 3};
    int filters_per_size = 32;
    int mlp_layers = 2;  // linear layers per head; 1 = plain softmax regression
    int mlp_hidden = 64;
    double lambda1 = 0.5;
    double lambda2 = 0.5;
    int batch = 32;
    double lr = 1e-4;
    int iterations = 1000;
    uint64_t seed = 0;
    SummaryMode summary = SummaryMode::FinalStates;
    bool st3_uses_hidden = false;  // word feature z_w: embedding row, or Bi-LSTM state
    bool freeze_shared = false;    // fine phase: freeze everything carried over

    void validate() const {
        if (std::fabs(lambda1 + lambda2 - 1.0) > 1e-9 || lambda1 < 0 || lambda2 < 0)
            throw ValidationError("hyperparams: lambda1 + lambda2 must equal 1 with both >= 0");
        if (embed_dim <= 0 || hid <= 0 || filters_per_size <= 0 || mlp_hidden <= 0)
            throw ValidationError("hyperparams: dimensions must be positive");
        if (mlp_layers < 1) throw ValidationError("hyperparams: mlp_layers must be >= 1");
        if (window_sizes.empty()) throw ValidationError("hyperparams: need at least one window size");
        for (int w : window_sizes)
            if (w < 1) throw ValidationError("hyperparams: window sizes must be >= 1");
        if (batch < 1 || iterations < 0) throw ValidationError("hyperparams: bad batch/iterations");
    }
};

// A tokenized sentence with label ids, the unit both losses consume.
struct SentenceExample {
    std::vector<int> tokens;
    SentenceType type = SentenceType::ACTION;
    int semantic = -1;      // STATEMENT only, index into SentenceSemantic
    std::vector<int> tags;  // ACTION only, per-token WordTag index
};

SentenceExample make_example(const Sentence& s, const Vocab& vocab);

constexpr int kSt1Classes = 2;  // ACTION=0, STATEMENT=1

template <typename T>
struct St1Out {
    Var<T> logits;
    Var<T> hidden;    // z_s: the head's last hidden activation
    Var<T> features;  // z_c: shared sentence features
};

// Shared Bi-LSTM + n-gram conv trunk with the two sentence-level heads.
// ST1 and ST2 read the same shared parameters; ST2 additionally sees the
// gated ST1 hidden feature.
template <typename T>
struct CoarseModelT {
    HyperParams hp;
    ParamStoreT<T> store;
    EmbeddingTableT<T> embedding;
    BiLstmT<T> encoder;
    ConvFilterBankT<T> conv;
    GateFusionT<T> conv_gate;
    MlpHeadT<T> st1_head;
    GateFusionT<T> st1_gate;
    MlpHeadT<T> st2_head;

    static CoarseModelT build(const HyperParams& hp, int vocab_size, bool embeddings_trainable = true) {
        hp.validate();
        CoarseModelT m;
        m.hp = hp;
        m.store.rng_seed = hp.seed;
        Rng rng(hp.seed);
        m.embedding = EmbeddingTableT<T>::create(m.store, vocab_size, hp.embed_dim, Vocab::kOov,
                                                 embeddings_trainable, rng);
        m.encoder = BiLstmT<T>::create(m.store, "encoder", hp.embed_dim, hp.hid, rng);
        m.conv = ConvFilterBankT<T>::create(m.store, "conv", hp.window_sizes, hp.filters_per_size,
                                            hp.embed_dim, rng);
        m.conv_gate = GateFusionT<T>::create(m.store, "fuse.conv_gate", m.conv.out_dim(), rng);
        const int feat_dim = 2 * hp.hid + m.conv.out_dim();
        std::vector<int> hidden(static_cast<size_t>(hp.mlp_layers - 1), hp.mlp_hidden);
        m.st1_head = MlpHeadT<T>::create(m.store, "st1", feat_dim, hidden, kSt1Classes, rng);
        m.st1_gate = GateFusionT<T>::create(m.store, "fuse.st1_gate", m.st1_head.last_hidden_dim(), rng);
        m.st2_head = MlpHeadT<T>::create(m.store, "st2", feat_dim + m.st1_head.last_hidden_dim(), hidden,
                                         kNumSemantics, rng);
        return m;
    }

    // z_c = [z_T, g(z) (*) z]: Bi-LSTM summary concatenated with the gated
    // pooled conv features.
    Var<T> shared_features(TapeT<T>& tape, const std::vector<int>& tokens) {
        if (tokens.empty()) throw ValidationError("model: empty sentence");
        auto xs = embedding.embed(tape, store, tokens);
        auto enc = encoder.encode(tape, store, xs, hp.summary);
        Var<T> z = conv.apply(tape, store, xs);
        return tape.concat({enc.summary, conv_gate.apply(tape, store, z)});
    }

    St1Out<T> forward_st1(TapeT<T>& tape, const std::vector<int>& tokens) {
        Var<T> z_c = shared_features(tape, tokens);
        auto head = st1_head.forward(tape, store, z_c);
        return St1Out<T>{head.logits, head.last_hidden, z_c};
    }

    // ST2 input = [z_c, g(z_s) (*) z_s] from the same sentence's ST1 pass.
    Var<T> forward_st2(TapeT<T>& tape, const St1Out<T>& st1) {
        Var<T> gated = st1_gate.apply(tape, store, st1.hidden);
        return st2_head.forward(tape, store, tape.concat({st1.features, gated})).logits;
    }

    // J = lambda1 * sum CE(ST1) + lambda2 * sum CE(ST2 | gold STATEMENT).
    // A zero lambda drops its term entirely so the untouched head provably
    // receives no gradient.
    Var<T> coarse_loss(TapeT<T>& tape, const std::vector<SentenceExample>& batch) {
        if (batch.empty()) throw ValidationError("coarse_loss: empty batch");
        std::vector<Var<T>> st1_terms, st2_terms;
        for (const auto& ex : batch) {
            auto st1 = forward_st1(tape, ex.tokens);
            const int type_idx = ex.type == SentenceType::ACTION ? 0 : 1;
            st1_terms.push_back(tape.ce_loss(st1.logits, type_idx));
            if (ex.type == SentenceType::STATEMENT && hp.lambda2 > 0.0) {
                if (ex.semantic < 0 || ex.semantic >= kNumSemantics)
                    throw ValidationError("coarse_loss: STATEMENT sentence lacks a semantic label");
                st2_terms.push_back(tape.ce_loss(forward_st2(tape, st1), ex.semantic));
            }
        }
        std::vector<Var<T>> parts;
        if (hp.lambda1 > 0.0)
            parts.push_back(tape.scale(tape.add_list(st1_terms), static_cast<T>(hp.lambda1)));
        if (!st2_terms.empty())
            parts.push_back(tape.scale(tape.add_list(st2_terms), static_cast<T>(hp.lambda2)));
        if (parts.empty()) return tape.input(TensorT<T>::scalar(T(0)));
        return parts.size() == 1 ? parts[0] : tape.add(parts[0], parts[1]);
    }

    int predict_st1(const std::vector<int>& tokens) {
        TapeT<T> tape;
        return argmax(tape.val(forward_st1(tape, tokens).logits));
    }

    int predict_st2(const std::vector<int>& tokens) {
        TapeT<T> tape;
        auto st1 = forward_st1(tape, tokens);
        return argmax(tape.val(forward_st2(tape, st1)));
    }

    static int argmax(const TensorT<T>& v) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(v.numel()); ++i)
            if (v.at(i) > v.at(best)) best = i;
        return best;
    }
};

// Word-level stage on top of a transferred coarse model. The ST3 input for
// word j is [z_s, g(z_w) (*) z_w] with z_w the word embedding row (or its
// Bi-LSTM state when configured).
template <typename T>
struct FineModelT {
    CoarseModelT<T> coarse;
    GateFusionT<T> word_gate;
    MlpHeadT<T> st3_head;

    ParamStoreT<T>& store() { return coarse.store; }
    const ParamStoreT<T>& store() const { return coarse.store; }

    struct St3Out {
        std::vector<Var<T>> word_logits;
        St1Out<T> st1;
    };

    int word_feature_dim() const {
        return coarse.hp.st3_uses_hidden ? 2 * coarse.hp.hid : coarse.hp.embed_dim;
    }

    St3Out forward_st3(TapeT<T>& tape, const std::vector<int>& tokens) {
        auto& c = coarse;
        if (tokens.empty()) throw ValidationError("model: empty sentence");
        auto xs = c.embedding.embed(tape, c.store, tokens);
        auto enc = c.encoder.encode(tape, c.store, xs, c.hp.summary);
        Var<T> z = c.conv.apply(tape, c.store, xs);
        Var<T> z_c = tape.concat({enc.summary, c.conv_gate.apply(tape, c.store, z)});
        auto head = c.st1_head.forward(tape, c.store, z_c);
        St1Out<T> st1{head.logits, head.last_hidden, z_c};

        St3Out out;
        out.st1 = st1;
        for (size_t j = 0; j < tokens.size(); ++j) {
            Var<T> z_w = c.hp.st3_uses_hidden ? enc.h[j] : xs[j];
            Var<T> gated = word_gate.apply(tape, c.store, z_w);
            out.word_logits.push_back(st3_head.forward(tape, c.store, tape.concat({st1.hidden, gated})).logits);
        }
        return out;
    }

    // J = sum over words of CE against the 4-way gold tag.
    Var<T> fine_loss(TapeT<T>& tape, const std::vector<SentenceExample>& batch) {
        if (batch.empty()) throw ValidationError("fine_loss: empty batch");
        std::vector<Var<T>> terms;
        for (const auto& ex : batch) {
            if (ex.type != SentenceType::ACTION || ex.tags.size() != ex.tokens.size())
                throw ValidationError("fine_loss: batch must contain tagged ACTION sentences only");
            auto out = forward_st3(tape, ex.tokens);
            for (size_t j = 0; j < ex.tokens.size(); ++j)
                terms.push_back(tape.ce_loss(out.word_logits[j], ex.tags[j]));
        }
        return tape.add_list(terms);
    }

    std::vector<int> predict_st3(const std::vector<int>& tokens) {
        TapeT<T> tape;
        auto out = forward_st3(tape, tokens);
        std::vector<int> tags;
        for (auto& l : out.word_logits) tags.push_back(CoarseModelT<T>::argmax(tape.val(l)));
        return tags;
    }
};

// Coarse-to-fine handover: shared and ST1 parameters keep their trained
// values (and stay trainable unless freeze_shared), the ST2 head is frozen,
// and the word gate + ST3 head start fresh.
template <typename T>
FineModelT<T> transfer_and_freeze(CoarseModelT<T> coarse) {
    if (coarse.store.size() == 0) throw ValidationError("transfer: coarse model is uninitialized");
    FineModelT<T> fine;
    fine.coarse = std::move(coarse);
    auto& hp = fine.coarse.hp;
    Rng rng(hp.seed ^ 0x9e3779b97f4a7c15ull);
    const int zw_dim = fine.word_feature_dim();
    fine.word_gate = GateFusionT<T>::create(fine.coarse.store, "fine.word_gate", zw_dim, rng);
    std::vector<int> hidden(static_cast<size_t>(hp.mlp_layers - 1), hp.mlp_hidden);
    fine.st3_head = MlpHeadT<T>::create(fine.coarse.store, "st3",
                                        fine.coarse.st1_head.last_hidden_dim() + zw_dim, hidden,
                                        kNumWordTags, rng);
    fine.coarse.store.set_trainable_by_prefix("st2.", false);
    if (hp.freeze_shared) {
        for (const char* prefix : {"embedding.", "encoder.", "conv.", "fuse.", "st1."})
            fine.coarse.store.set_trainable_by_prefix(prefix, false);
    }
    return fine;
}

using CoarseModel = CoarseModelT<float>;
using FineModel = FineModelT<float>;

}  // namespace mgtc
