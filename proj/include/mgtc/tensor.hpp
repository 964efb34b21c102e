#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mgtc/errors.hpp"

namespace mgtc {

// Dense row-major tensor. Storage type is float in production; the double
// instantiation backs the finite-difference harness.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), T(0));
    }

    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<int64_t>(data.size()) != numel_of(shape))
            throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str());
    }

    static int64_t numel_of(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("tensor: non-positive dimension " + std::to_string(d));
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<int> s) { return TensorT(std::move(s)); }

    static TensorT full(std::vector<int> s, T v) {
        TensorT t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static TensorT vec(std::vector<T> d) {
        int n = static_cast<int>(d.size());
        return TensorT({n}, std::move(d));
    }

    static TensorT scalar(T v) { return TensorT({1}, {v}); }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }

    T& at(int i) { return data[static_cast<size_t>(i)]; }
    T at(int i) const { return data[static_cast<size_t>(i)]; }
    T& at(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }
    T at(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
        os << "]";
        return os.str();
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using Tensor = TensorT<float>;

template <typename T>
void check_finite(const TensorT<T>& t, const char* where) {
    if (!t.all_finite()) throw ShapeError(std::string("non-finite values produced by ") + where);
}

// ---- elementary ops (reductions accumulate in double) ----

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2)
        throw ShapeError("matmul: expected 2-D operands, got " + a.shape_str() + " and " + b.shape_str());
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    TensorT<T> c({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += static_cast<double>(a.at(i, p)) * b.at(p, j);
            c.at(i, j) = static_cast<T>(acc);
        }
    check_finite(c, "matmul");
    return c;
}

enum class Activation { Sigmoid, Tanh, Relu };

template <typename T>
inline T sigmoid_scalar(T x) {
    // split on sign to avoid exp overflow
    if (x >= 0) {
        T e = std::exp(-x);
        return T(1) / (T(1) + e);
    }
    T e = std::exp(x);
    return e / (T(1) + e);
}

template <typename T>
TensorT<T> activate(const TensorT<T>& x, Activation kind) {
    TensorT<T> y = x;
    switch (kind) {
        case Activation::Sigmoid:
            for (auto& v : y.data) v = sigmoid_scalar(v);
            break;
        case Activation::Tanh:
            for (auto& v : y.data) v = std::tanh(v);
            break;
        case Activation::Relu:
            for (auto& v : y.data) v = v > T(0) ? v : T(0);
            break;
    }
    check_finite(y, "activate");
    return y;
}

// Max-subtraction stabilized softmax over a 1-D tensor.
template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
    if (logits.numel() < 1) throw ShapeError("softmax: empty input");
    T mx = logits.data[0];
    for (T v : logits.data) mx = std::max(mx, v);
    TensorT<T> p = logits;
    double sum = 0.0;
    for (auto& v : p.data) {
        v = std::exp(v - mx);
        sum += static_cast<double>(v);
    }
    for (auto& v : p.data) v = static_cast<T>(v / sum);
    check_finite(p, "softmax");
    return p;
}

// -sum(y * log(p)) with a 1e-12 floor inside the log. y must be one-hot.
template <typename T>
double cross_entropy(const TensorT<T>& p, const TensorT<T>& y_onehot) {
    if (!p.same_shape(y_onehot))
        throw ShapeError("cross_entropy: shape mismatch " + p.shape_str() + " vs " + y_onehot.shape_str());
    int ones = 0;
    for (T v : y_onehot.data) {
        if (v == T(1))
            ++ones;
        else if (v != T(0))
            throw ValidationError("cross_entropy: y is not one-hot");
    }
    if (ones != 1) throw ValidationError("cross_entropy: y is not one-hot");
    double loss = 0.0;
    for (int64_t i = 0; i < p.numel(); ++i) {
        if (y_onehot.data[static_cast<size_t>(i)] == T(1)) {
            double pi = std::max(static_cast<double>(p.data[static_cast<size_t>(i)]), 1e-12);
            loss -= std::log(pi);
        }
    }
    return loss;
}

template <typename T>
TensorT<T> onehot(int index, int classes) {
    TensorT<T> y({classes});
    y.at(index) = T(1);
    return y;
}

}  // namespace mgtc
