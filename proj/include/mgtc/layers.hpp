#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mgtc/param_store.hpp"
#include "mgtc/rng.hpp"
#include "mgtc/tape.hpp"

namespace mgtc {

// Xavier-uniform weight init; biases start at zero (forget gates get +1).
template <typename T>
TensorT<T> xavier_init(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
    TensorT<T> t(std::move(shape));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
    return t;
}

template <typename T>
using Var = typename TapeT<T>::Var;

// ---- embedding ----

template <typename T>
struct EmbeddingTableT {
    std::string name = "embedding.matrix";
    int vocab_size = 0;
    int dim = 0;
    int oov_index = 1;

    static EmbeddingTableT create(ParamStoreT<T>& store, int vocab_size, int dim, int oov_index,
                                  bool trainable, Rng& rng) {
        EmbeddingTableT e;
        e.vocab_size = vocab_size;
        e.dim = dim;
        e.oov_index = oov_index;
        store.add(e.name, xavier_init<T>({vocab_size, dim}, vocab_size, dim, rng), trainable);
        return e;
    }

    // One row var per token; out-of-range indices land on the oov row.
    std::vector<Var<T>> embed(TapeT<T>& tape, ParamStoreT<T>& store, const std::vector<int>& tokens) const {
        Var<T> matrix = tape.param(store.at(name));
        std::vector<Var<T>> rows;
        rows.reserve(tokens.size());
        for (int tok : tokens) {
            int idx = (tok >= 0 && tok < vocab_size) ? tok : oov_index;
            rows.push_back(tape.row(matrix, idx));
        }
        return rows;
    }
};

// ---- LSTM ----

template <typename T>
struct LstmCellT {
    std::string prefix;  // e.g. "encoder.fwd"
    int dim = 0, hid = 0;

    static LstmCellT create(ParamStoreT<T>& store, const std::string& prefix, int dim, int hid, Rng& rng) {
        LstmCellT c;
        c.prefix = prefix;
        c.dim = dim;
        c.hid = hid;
        for (const char* g : {"i", "f", "o", "c"}) {
            store.add(prefix + ".U_" + g, xavier_init<T>({dim, hid}, dim, hid, rng));
            store.add(prefix + ".W_" + g, xavier_init<T>({hid, hid}, hid, hid, rng));
            TensorT<T> b({hid});
            if (g[0] == 'f') b.fill(T(1));  // open forget gates at init
            store.add(prefix + ".b_" + g, b);
        }
        return c;
    }

    struct Gates {
        Var<T> U_i, W_i, b_i, U_f, W_f, b_f, U_o, W_o, b_o, U_c, W_c, b_c;
    };

    Gates bind(TapeT<T>& tape, ParamStoreT<T>& store) const {
        auto p = [&](const std::string& n) { return tape.param(store.at(prefix + "." + n)); };
        return Gates{p("U_i"), p("W_i"), p("b_i"), p("U_f"), p("W_f"), p("b_f"),
                     p("U_o"), p("W_o"), p("b_o"), p("U_c"), p("W_c"), p("b_c")};
    }

    // i = sig(x U_i + h W_i + b_i); f,o analogous;
    // c = f*c_prev + i*tanh(x U_c + h W_c + b_c); h = o*tanh(c)
    std::pair<Var<T>, Var<T>> step(TapeT<T>& tape, const Gates& g, Var<T> x, Var<T> h_prev,
                                   Var<T> c_prev) const {
        auto lin = [&](Var<T> U, Var<T> W, Var<T> b) {
            return tape.add(tape.add(tape.vecmat(x, U), tape.vecmat(h_prev, W)), b);
        };
        Var<T> i = tape.sigmoid(lin(g.U_i, g.W_i, g.b_i));
        Var<T> f = tape.sigmoid(lin(g.U_f, g.W_f, g.b_f));
        Var<T> o = tape.sigmoid(lin(g.U_o, g.W_o, g.b_o));
        Var<T> c_tilde = tape.tanh_(lin(g.U_c, g.W_c, g.b_c));
        Var<T> c = tape.add(tape.mul(f, c_prev), tape.mul(i, c_tilde));
        Var<T> h = tape.mul(o, tape.tanh_(c));
        return {h, c};
    }
};

enum class SummaryMode { FinalStates, MeanHidden };

// ---- Bi-LSTM encoder ----

template <typename T>
struct BiLstmT {
    LstmCellT<T> fwd, bwd;
    int hid = 0;

    static BiLstmT create(ParamStoreT<T>& store, const std::string& prefix, int dim, int hid, Rng& rng) {
        BiLstmT b;
        b.fwd = LstmCellT<T>::create(store, prefix + ".fwd", dim, hid, rng);
        b.bwd = LstmCellT<T>::create(store, prefix + ".bwd", dim, hid, rng);
        b.hid = hid;
        return b;
    }

    struct Encoded {
        std::vector<Var<T>> h;  // per position, [2*hid]
        Var<T> summary;         // [2*hid]
    };

    Encoded encode(TapeT<T>& tape, ParamStoreT<T>& store, const std::vector<Var<T>>& xs,
                   SummaryMode mode = SummaryMode::FinalStates) const {
        if (xs.empty()) throw ValidationError("bilstm: empty sequence");
        const int n = static_cast<int>(xs.size());
        auto fg = fwd.bind(tape, store);
        auto bg = bwd.bind(tape, store);
        std::vector<Var<T>> hf(n), hb(n);
        Var<T> h = tape.input(TensorT<T>({hid}));
        Var<T> c = tape.input(TensorT<T>({hid}));
        for (int t = 0; t < n; ++t) {
            auto [nh, nc] = fwd.step(tape, fg, xs[static_cast<size_t>(t)], h, c);
            hf[static_cast<size_t>(t)] = nh;
            h = nh;
            c = nc;
        }
        Var<T> rh = tape.input(TensorT<T>({hid}));
        Var<T> rc = tape.input(TensorT<T>({hid}));
        for (int t = n - 1; t >= 0; --t) {
            auto [nh, nc] = bwd.step(tape, bg, xs[static_cast<size_t>(t)], rh, rc);
            hb[static_cast<size_t>(t)] = nh;
            rh = nh;
            rc = nc;
        }
        Encoded out;
        out.h.resize(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t)
            out.h[static_cast<size_t>(t)] = tape.concat({hf[static_cast<size_t>(t)], hb[static_cast<size_t>(t)]});
        if (mode == SummaryMode::FinalStates) {
            // final state of each direction: forward at n, backward at 1
            out.summary = tape.concat({hf.back(), hb.front()});
        } else {
            out.summary = tape.scale(tape.add_list(out.h), T(1) / static_cast<T>(n));
        }
        return out;
    }
};

// ---- multiscale n-gram convolution ----

template <typename T>
struct ConvFilterBankT {
    std::string prefix = "conv";
    std::vector<int> window_sizes;
    int filters_per_size = 0;
    int k = 0;  // input vector width

    static ConvFilterBankT create(ParamStoreT<T>& store, const std::string& prefix,
                                  std::vector<int> window_sizes, int filters_per_size, int k, Rng& rng) {
        ConvFilterBankT b;
        b.prefix = prefix;
        b.window_sizes = std::move(window_sizes);
        b.filters_per_size = filters_per_size;
        b.k = k;
        for (int h : b.window_sizes) {
            store.add(prefix + ".w" + std::to_string(h),
                      xavier_init<T>({h * k, filters_per_size}, h * k, filters_per_size, rng));
            store.add(prefix + ".b" + std::to_string(h), TensorT<T>({filters_per_size}));
        }
        return b;
    }

    int out_dim() const { return static_cast<int>(window_sizes.size()) * filters_per_size; }

    // Per window: sigmoid(w . window + b), then max over positions per
    // filter. Sequences shorter than a window are right-padded with zero
    // vectors so at least one window exists.
    Var<T> apply(TapeT<T>& tape, ParamStoreT<T>& store, const std::vector<Var<T>>& xs) const {
        std::vector<Var<T>> pooled;
        int max_h = 0;
        for (int h : window_sizes) max_h = std::max(max_h, h);
        std::vector<Var<T>> padded = xs;
        while (static_cast<int>(padded.size()) < max_h) padded.push_back(tape.input(TensorT<T>({k})));
        for (int h : window_sizes) {
            Var<T> w = tape.param(store.at(prefix + ".w" + std::to_string(h)));
            Var<T> b = tape.param(store.at(prefix + ".b" + std::to_string(h)));
            const int n = static_cast<int>(padded.size());
            std::vector<Var<T>> acts;
            for (int i = 0; i + h <= n; ++i) {
                std::vector<Var<T>> win(padded.begin() + i, padded.begin() + i + h);
                Var<T> flat = h == 1 ? win[0] : tape.concat(win);
                acts.push_back(tape.sigmoid(tape.add(tape.vecmat(flat, w), b)));
            }
            pooled.push_back(tape.vmax(acts));
        }
        return pooled.size() == 1 ? pooled[0] : tape.concat(pooled);
    }
};

// ---- gate attention ----

template <typename T>
struct GateFusionT {
    std::string prefix;
    int dim = 0;

    static GateFusionT create(ParamStoreT<T>& store, const std::string& prefix, int dim, Rng& rng) {
        GateFusionT g;
        g.prefix = prefix;
        g.dim = dim;
        store.add(prefix + ".W", xavier_init<T>({dim, dim}, dim, dim, rng));
        store.add(prefix + ".b", TensorT<T>({dim}));
        return g;
    }

    // g = sigmoid(z W + b); returns g (*) z
    Var<T> apply(TapeT<T>& tape, ParamStoreT<T>& store, Var<T> z) const {
        Var<T> w = tape.param(store.at(prefix + ".W"));
        Var<T> b = tape.param(store.at(prefix + ".b"));
        Var<T> g = tape.sigmoid(tape.add(tape.vecmat(z, w), b));
        return tape.mul(g, z);
    }
};

// ---- MLP head ----

template <typename T>
struct MlpHeadT {
    std::string prefix;
    std::vector<int> dims;  // in, hidden..., out

    static MlpHeadT create(ParamStoreT<T>& store, const std::string& prefix, int in_dim,
                           const std::vector<int>& hidden_dims, int out_classes, Rng& rng) {
        if (out_classes < 2) throw ValidationError("mlp head: out_classes must be >= 2");
        MlpHeadT m;
        m.prefix = prefix;
        m.dims.push_back(in_dim);
        for (int h : hidden_dims) m.dims.push_back(h);
        m.dims.push_back(out_classes);
        for (size_t l = 0; l + 1 < m.dims.size(); ++l) {
            store.add(prefix + ".W_" + std::to_string(l + 1),
                      xavier_init<T>({m.dims[l], m.dims[l + 1]}, m.dims[l], m.dims[l + 1], rng));
            store.add(prefix + ".b_" + std::to_string(l + 1), TensorT<T>({m.dims[l + 1]}));
        }
        return m;
    }

    int out_classes() const { return dims.back(); }
    int last_hidden_dim() const { return dims[dims.size() - 2]; }

    struct Out {
        Var<T> logits;
        Var<T> last_hidden;  // input to the output layer (the input itself if no hidden layers)
    };

    // ReLU between layers, none after the last; softmax is the caller's job.
    Out forward(TapeT<T>& tape, ParamStoreT<T>& store, Var<T> v) const {
        Var<T> cur = v;
        const size_t layers = dims.size() - 1;
        for (size_t l = 0; l < layers; ++l) {
            Var<T> w = tape.param(store.at(prefix + ".W_" + std::to_string(l + 1)));
            Var<T> b = tape.param(store.at(prefix + ".b_" + std::to_string(l + 1)));
            Var<T> z = tape.add(tape.vecmat(cur, w), b);
            if (l + 1 < layers) {
                cur = tape.relu(z);
            } else {
                return Out{z, cur};
            }
        }
        throw ShapeError("mlp head: no layers configured");
    }
};

}  // namespace mgtc
