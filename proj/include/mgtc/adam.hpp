#pragma once

#include <cmath>
#include <unordered_map>

#include "mgtc/param_store.hpp"

namespace mgtc {

template <typename T>
struct AdamStateT {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int64_t step = 0;
    std::unordered_map<std::string, TensorT<T>> m, v;
};

using AdamState = AdamStateT<float>;

// Standard Adam with bias correction. Only trainable parameters move; moments
// are allocated lazily on first update.
template <typename T>
void adam_step(ParamStoreT<T>& store, AdamStateT<T>& state) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& p : store.params()) {
        if (!p.trainable) continue;
        if (!p.grad.same_shape(p.value))
            throw ShapeError("adam: grad shape mismatch for " + p.name);
        auto mit = state.m.find(p.name);
        if (mit == state.m.end()) {
            mit = state.m.emplace(p.name, TensorT<T>(p.value.shape)).first;
            state.v.emplace(p.name, TensorT<T>(p.value.shape));
        }
        auto& m = mit->second;
        auto& v = state.v.at(p.name);
        if (!m.same_shape(p.value)) throw ShapeError("adam: moment shape mismatch for " + p.name);
        for (int64_t i = 0; i < p.value.numel(); ++i) {
            const double g = static_cast<double>(p.grad.data[i]);
            const double mi = state.beta1 * m.data[i] + (1.0 - state.beta1) * g;
            const double vi = state.beta2 * v.data[i] + (1.0 - state.beta2) * g * g;
            m.data[i] = static_cast<T>(mi);
            v.data[i] = static_cast<T>(vi);
            const double update = state.lr * (mi / bc1) / (std::sqrt(vi / bc2) + state.epsilon);
            p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) - update);
        }
        check_finite(p.value, "adam update");
    }
}

}  // namespace mgtc
