#pragma once

#include <functional>
#include <vector>

#include "mgtc/param_store.hpp"
#include "mgtc/tensor.hpp"

namespace mgtc {

// Reverse-mode tape over the fixed op set the architecture needs. Ops append
// nodes in topological order; backward() sweeps them in reverse. Parameter
// leaves accumulate into Parameter::grad when trainable.
template <typename T>
class TapeT {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var input(TensorT<T> v) { return push(std::move(v), {}, nullptr); }

    Var param(ParameterT<T>& p) { return push(p.value, {}, &p); }

    const TensorT<T>& val(Var v) const { return node(v).val; }
    const TensorT<T>& grad_of(Var v) const { return node(v).grad; }

    T scalar(Var v) const {
        const auto& t = val(v);
        if (t.numel() != 1) throw ShapeError("tape: scalar() on tensor " + t.shape_str());
        return t.data[0];
    }

    // y = x^T A for x:[m], A:[m x n]
    Var vecmat(Var x, Var a) {
        const auto& xv = val(x);
        const auto& av = val(a);
        if (xv.ndim() != 1 || av.ndim() != 2 || xv.shape[0] != av.rows())
            throw ShapeError("vecmat: incompatible " + xv.shape_str() + " and " + av.shape_str());
        const int m = av.rows(), n = av.cols();
        TensorT<T> y({n});
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += static_cast<double>(xv.at(i)) * av.at(i, j);
            y.at(j) = static_cast<T>(acc);
        }
        Var out = push(std::move(y), {x, a}, nullptr);
        backfn(out, [this, out, x, a] {
            const auto& g = node(out).grad;
            const auto& xv = node(x).val;
            const auto& av = node(a).val;
            auto& gx = node(x).grad;
            auto& ga = node(a).grad;
            const int m = av.rows(), n = av.cols();
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    acc += static_cast<double>(g.at(j)) * av.at(i, j);
                    ga.at(i, j) += xv.at(i) * g.at(j);
                }
                gx.at(i) += static_cast<T>(acc);
            }
        });
        return out;
    }

    Var matmul(Var a, Var b) {
        TensorT<T> c = mgtc::matmul(val(a), val(b));
        Var out = push(std::move(c), {a, b}, nullptr);
        backfn(out, [this, out, a, b] {
            const auto& g = node(out).grad;
            const auto& av = node(a).val;
            const auto& bv = node(b).val;
            auto& ga = node(a).grad;
            auto& gb = node(b).grad;
            const int m = av.rows(), k = av.cols(), n = bv.cols();
            for (int i = 0; i < m; ++i)
                for (int p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) {
                        acc += static_cast<double>(g.at(i, j)) * bv.at(p, j);
                        gb.at(p, j) += av.at(i, p) * g.at(i, j);
                    }
                    ga.at(i, p) += static_cast<T>(acc);
                }
        });
        return out;
    }

    Var add(Var a, Var b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        if (!av.same_shape(bv))
            throw ShapeError("add: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        TensorT<T> y = av;
        for (int64_t i = 0; i < y.numel(); ++i) y.data[i] += bv.data[i];
        Var out = push(std::move(y), {a, b}, nullptr);
        backfn(out, [this, out, a, b] {
            const auto& g = node(out).grad;
            auto& ga = node(a).grad;
            auto& gb = node(b).grad;
            for (int64_t i = 0; i < g.numel(); ++i) {
                ga.data[i] += g.data[i];
                gb.data[i] += g.data[i];
            }
        });
        return out;
    }

    Var add_list(const std::vector<Var>& xs) {
        if (xs.empty()) throw ShapeError("add_list: empty");
        TensorT<T> y = val(xs[0]);
        for (size_t i = 1; i < xs.size(); ++i) {
            const auto& v = val(xs[i]);
            if (!v.same_shape(y)) throw ShapeError("add_list: shape mismatch");
            for (int64_t j = 0; j < y.numel(); ++j) y.data[j] += v.data[j];
        }
        Var out = push(std::move(y), xs, nullptr);
        backfn(out, [this, out, xs] {
            const auto& g = node(out).grad;
            for (Var x : xs) {
                auto& gx = node(x).grad;
                for (int64_t j = 0; j < g.numel(); ++j) gx.data[j] += g.data[j];
            }
        });
        return out;
    }

    Var mul(Var a, Var b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        if (!av.same_shape(bv))
            throw ShapeError("mul: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        TensorT<T> y = av;
        for (int64_t i = 0; i < y.numel(); ++i) y.data[i] *= bv.data[i];
        Var out = push(std::move(y), {a, b}, nullptr);
        backfn(out, [this, out, a, b] {
            const auto& g = node(out).grad;
            const auto& av = node(a).val;
            const auto& bv = node(b).val;
            auto& ga = node(a).grad;
            auto& gb = node(b).grad;
            for (int64_t i = 0; i < g.numel(); ++i) {
                ga.data[i] += g.data[i] * bv.data[i];
                gb.data[i] += g.data[i] * av.data[i];
            }
        });
        return out;
    }

    Var scale(Var x, T c) {
        TensorT<T> y = val(x);
        for (auto& v : y.data) v *= c;
        Var out = push(std::move(y), {x}, nullptr);
        backfn(out, [this, out, x, c] {
            const auto& g = node(out).grad;
            auto& gx = node(x).grad;
            for (int64_t i = 0; i < g.numel(); ++i) gx.data[i] += c * g.data[i];
        });
        return out;
    }

    Var sigmoid(Var x) {
        TensorT<T> y = val(x);
        for (auto& v : y.data) v = sigmoid_scalar(v);
        Var out = push(std::move(y), {x}, nullptr);
        backfn(out, [this, out, x] {
            const auto& g = node(out).grad;
            const auto& y = node(out).val;
            auto& gx = node(x).grad;
            for (int64_t i = 0; i < g.numel(); ++i) gx.data[i] += g.data[i] * y.data[i] * (T(1) - y.data[i]);
        });
        return out;
    }

    Var tanh_(Var x) {
        TensorT<T> y = val(x);
        for (auto& v : y.data) v = std::tanh(v);
        Var out = push(std::move(y), {x}, nullptr);
        backfn(out, [this, out, x] {
            const auto& g = node(out).grad;
            const auto& y = node(out).val;
            auto& gx = node(x).grad;
            for (int64_t i = 0; i < g.numel(); ++i) gx.data[i] += g.data[i] * (T(1) - y.data[i] * y.data[i]);
        });
        return out;
    }

    Var relu(Var x) {
        TensorT<T> y = val(x);
        for (auto& v : y.data) v = v > T(0) ? v : T(0);
        Var out = push(std::move(y), {x}, nullptr);
        backfn(out, [this, out, x] {
            const auto& g = node(out).grad;
            const auto& xv = node(x).val;
            auto& gx = node(x).grad;
            for (int64_t i = 0; i < g.numel(); ++i)
                if (xv.data[i] > T(0)) gx.data[i] += g.data[i];
        });
        return out;
    }

    // row i of a 2-D tensor as a vector
    Var row(Var m, int i) {
        const auto& mv = val(m);
        if (mv.ndim() != 2 || i < 0 || i >= mv.rows())
            throw ShapeError("row: index " + std::to_string(i) + " out of range for " + mv.shape_str());
        const int c = mv.cols();
        TensorT<T> y({c});
        for (int j = 0; j < c; ++j) y.at(j) = mv.at(i, j);
        Var out = push(std::move(y), {m}, nullptr);
        backfn(out, [this, out, m, i] {
            const auto& g = node(out).grad;
            auto& gm = node(m).grad;
            const int c = node(m).val.cols();
            for (int j = 0; j < c; ++j) gm.at(i, j) += g.at(j);
        });
        return out;
    }

    Var concat(const std::vector<Var>& xs) {
        if (xs.empty()) throw ShapeError("concat: empty");
        int total = 0;
        for (Var x : xs) {
            if (val(x).ndim() != 1) throw ShapeError("concat: expects vectors");
            total += val(x).shape[0];
        }
        TensorT<T> y({total});
        int off = 0;
        for (Var x : xs) {
            const auto& v = val(x);
            for (int i = 0; i < v.shape[0]; ++i) y.at(off + i) = v.at(i);
            off += v.shape[0];
        }
        Var out = push(std::move(y), xs, nullptr);
        backfn(out, [this, out, xs] {
            const auto& g = node(out).grad;
            int off = 0;
            for (Var x : xs) {
                auto& gx = node(x).grad;
                const int n = node(x).val.shape[0];
                for (int i = 0; i < n; ++i) gx.at(i) += g.at(off + i);
                off += n;
            }
        });
        return out;
    }

    // elementwise max over same-shaped vectors; ties go to the earliest input
    Var vmax(const std::vector<Var>& xs) {
        if (xs.empty()) throw ShapeError("vmax: empty");
        const auto& first = val(xs[0]);
        TensorT<T> y = first;
        std::vector<int> argmax(static_cast<size_t>(first.numel()), 0);
        for (size_t k = 1; k < xs.size(); ++k) {
            const auto& v = val(xs[k]);
            if (!v.same_shape(first)) throw ShapeError("vmax: shape mismatch");
            for (int64_t i = 0; i < y.numel(); ++i)
                if (v.data[i] > y.data[i]) {
                    y.data[i] = v.data[i];
                    argmax[static_cast<size_t>(i)] = static_cast<int>(k);
                }
        }
        Var out = push(std::move(y), xs, nullptr);
        backfn(out, [this, out, xs, argmax] {
            const auto& g = node(out).grad;
            for (int64_t i = 0; i < g.numel(); ++i)
                node(xs[static_cast<size_t>(argmax[static_cast<size_t>(i)])]).grad.data[i] += g.data[i];
        });
        return out;
    }

    Var sum_all(Var x) {
        double acc = 0.0;
        for (T v : val(x).data) acc += static_cast<double>(v);
        Var out = push(TensorT<T>::scalar(static_cast<T>(acc)), {x}, nullptr);
        backfn(out, [this, out, x] {
            const T g = node(out).grad.data[0];
            auto& gx = node(x).grad;
            for (auto& v : gx.data) v += g;
        });
        return out;
    }

    // Fused stabilized softmax + cross entropy against a gold class index.
    Var ce_loss(Var logits, int gold) {
        const auto& l = val(logits);
        if (l.ndim() != 1 || gold < 0 || gold >= l.shape[0])
            throw ShapeError("ce_loss: bad gold index " + std::to_string(gold) + " for " + l.shape_str());
        T mx = l.data[0];
        for (T v : l.data) mx = std::max(mx, v);
        double z = 0.0;
        for (T v : l.data) z += std::exp(static_cast<double>(v - mx));
        double logp = static_cast<double>(l.at(gold) - mx) - std::log(z);
        Var out = push(TensorT<T>::scalar(static_cast<T>(-logp)), {logits}, nullptr);
        backfn(out, [this, out, logits, gold, mx, z] {
            const T g = node(out).grad.data[0];
            const auto& l = node(logits).val;
            auto& gl = node(logits).grad;
            for (int i = 0; i < l.shape[0]; ++i) {
                T p = static_cast<T>(std::exp(static_cast<double>(l.at(i) - mx)) / z);
                gl.at(i) += g * (p - (i == gold ? T(1) : T(0)));
            }
        });
        return out;
    }

    // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse; trainable
    // parameter leaves then receive their accumulated gradients.
    void backward(Var loss) {
        if (!loss.valid() || loss.id >= static_cast<int>(nodes_.size()))
            throw ValidationError("tape: backward called without a recorded forward pass");
        if (node(loss).val.numel() != 1) throw ShapeError("tape: backward target must be scalar");
        node(loss).grad.data[0] = T(1);
        for (int i = loss.id; i >= 0; --i)
            if (nodes_[static_cast<size_t>(i)].back) nodes_[static_cast<size_t>(i)].back();
        for (auto& n : nodes_)
            if (n.param && n.param->trainable)
                for (int64_t i = 0; i < n.grad.numel(); ++i) n.param->grad.data[i] += n.grad.data[i];
    }

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        TensorT<T> val;
        TensorT<T> grad;
        std::function<void()> back;
        ParameterT<T>* param = nullptr;
    };

    std::vector<Node> nodes_;

    Node& node(Var v) { return nodes_.at(static_cast<size_t>(v.id)); }
    const Node& node(Var v) const { return nodes_.at(static_cast<size_t>(v.id)); }

    Var push(TensorT<T> val, const std::vector<Var>& parents, ParameterT<T>* p) {
        (void)parents;
        check_finite(val, "tape op");
        Node n;
        n.grad = TensorT<T>(val.shape);
        n.val = std::move(val);
        n.param = p;
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void backfn(Var v, std::function<void()> f) { node(v).back = std::move(f); }
};

using Tape = TapeT<float>;

}  // namespace mgtc
