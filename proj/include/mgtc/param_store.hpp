#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgtc/errors.hpp"
#include "mgtc/rng.hpp"
#include "mgtc/tensor.hpp"

namespace mgtc {

template <typename T>
struct ParameterT {
    std::string name;
    TensorT<T> value;
    TensorT<T> grad;  // same shape, zero-initialized
    bool trainable = true;
};

// Ordered collection of named parameters. Iteration follows insertion order,
// which makes checkpoints and Adam sweeps deterministic.
template <typename T>
class ParamStoreT {
public:
    uint64_t rng_seed = 0;

    ParameterT<T>& add(const std::string& name, TensorT<T> value, bool trainable = true) {
        if (index_.count(name)) throw ValidationError("param store: duplicate parameter name " + name);
        index_[name] = params_.size();
        params_.push_back(ParameterT<T>{name, value, TensorT<T>(value.shape), trainable});
        return params_.back();
    }

    ParameterT<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ValidationError("param store: unknown parameter " + name);
        return params_[it->second];
    }
    const ParameterT<T>& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ValidationError("param store: unknown parameter " + name);
        return params_[it->second];
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<ParameterT<T>>& params() { return params_; }
    const std::vector<ParameterT<T>>& params() const { return params_; }
    size_t size() const { return params_.size(); }

    void zero_grads() {
        for (auto& p : params_) p.grad.fill(T(0));
    }

    // Marks every parameter whose name starts with `prefix`.
    int set_trainable_by_prefix(const std::string& prefix, bool trainable) {
        int n = 0;
        for (auto& p : params_)
            if (p.name.rfind(prefix, 0) == 0) {
                p.trainable = trainable;
                ++n;
            }
        return n;
    }

    int64_t total_scalars() const {
        int64_t n = 0;
        for (auto& p : params_) n += p.value.numel();
        return n;
    }

private:
    std::vector<ParameterT<T>> params_;
    std::unordered_map<std::string, size_t> index_;
};

using Parameter = ParameterT<float>;
using ParamStore = ParamStoreT<float>;

// ---- checkpoint io ----
// Layout: magic "MGTC", version u32, rng_seed u64, entry count u32, then a
// manifest of (name, dtype, trainable, shape) records, then raw little-endian
// f32 payloads in manifest order.

namespace ckpt_detail {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& out, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(out, v);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    explicit Reader(const std::string& b) : buf(b) {}
    void need(size_t n) const {
        if (pos + n > buf.size()) throw FormatError("checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf[pos++]);
    }
    float f32() {
        uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace ckpt_detail

inline constexpr uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const ParamStore& store, const std::string& path) {
    using namespace ckpt_detail;
    std::string out;
    out += "MGTC";
    put_u32(out, kCheckpointVersion);
    put_u64(out, store.rng_seed);
    put_u32(out, static_cast<uint32_t>(store.size()));
    for (const auto& p : store.params()) {
        put_u32(out, static_cast<uint32_t>(p.name.size()));
        out += p.name;
        out.push_back(0);  // dtype: f32
        put_u32(out, static_cast<uint32_t>(p.value.shape.size()));
        for (int d : p.value.shape) put_u32(out, static_cast<uint32_t>(d));
        out.push_back(p.trainable ? 1 : 0);
    }
    for (const auto& p : store.params())
        for (float v : p.value.data) put_f32(out, v);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("checkpoint: cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FormatError("checkpoint: write failed: " + path);
}

inline ParamStore load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("checkpoint: cannot open: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    ckpt_detail::Reader r(buf);
    if (r.bytes(4) != "MGTC") throw FormatError("checkpoint: bad magic (not an MGTC checkpoint): " + path);
    uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    ParamStore store;
    store.rng_seed = r.u64();
    uint32_t count = r.u32();
    struct Entry {
        std::string name;
        bool trainable;
        std::vector<int> shape;
    };
    std::vector<Entry> manifest;
    manifest.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Entry e;
        uint32_t len = r.u32();
        e.name = r.bytes(len);
        uint8_t dtype = r.u8();
        if (dtype != 0) throw FormatError("checkpoint: unknown dtype for " + e.name);
        uint32_t ndim = r.u32();
        for (uint32_t d = 0; d < ndim; ++d) e.shape.push_back(static_cast<int>(r.u32()));
        e.trainable = r.u8() != 0;
        manifest.push_back(std::move(e));
    }
    for (auto& e : manifest) {
        TensorT<float> t(e.shape);
        for (auto& v : t.data) v = r.f32();
        store.add(e.name, std::move(t), e.trainable);
    }
    if (r.pos != buf.size()) throw FormatError("checkpoint: trailing bytes after payload");
    return store;
}

// Copies values from `src` into `dst` by name, verifying shapes. Used when a
// freshly built model adopts checkpointed weights.
inline void load_values_into(ParamStore& dst, const ParamStore& src) {
    for (auto& p : dst.params()) {
        if (!src.has(p.name)) throw ValidationError("checkpoint: missing parameter " + p.name);
        const auto& s = src.at(p.name);
        if (s.value.shape != p.value.shape)
            throw ValidationError("checkpoint: shape mismatch for parameter " + p.name + ": expected " +
                                  p.value.shape_str() + ", file has " + s.value.shape_str());
        p.value = s.value;
        p.trainable = s.trainable;
    }
}

}  // namespace mgtc
