// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcrmf/autograd.hpp"
#include "gcrmf/errors.hpp"
#include "gcrmf/rng.hpp"
#include "gcrmf/tensor.hpp"

namespace gcrmf {

// uniform in [-bound, bound) from raw 53-bit mantissas; avoids
// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform_signed(std::mt19937_64& rng, double bound) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
    return (2.0 * u - 1.0) * bound;
}

inline Tensor xavier_mat(int rows, int cols, std::mt19937_64& rng) {
    Tensor t = Tensor::zeros_mat(rows, cols);
    const double bound = std::sqrt(6.0 / (cols + rows));
    for (int i = 0; i < t.size(); ++i) t[i] = uniform_signed(rng, bound);
    return t;
}

inline Tensor xavier_vec(int n, std::mt19937_64& rng) {
    Tensor t = Tensor::zeros_vec(n);
    const double bound = std::sqrt(6.0 / (n + 1));
    for (int i = 0; i < t.size(); ++i) t[i] = uniform_signed(rng, bound);
    return t;
}

enum class InitScheme { XavierUniform, Zeros };

inline Tensor seeded_init_vec(int n, InitScheme scheme, std::uint64_t seed) {
    if (scheme == InitScheme::Zeros) return Tensor::zeros_vec(n);
    auto rng = make_rng(seed);
    return xavier_vec(n, rng);
}

inline Tensor seeded_init_mat(int rows, int cols, InitScheme scheme, std::uint64_t seed) {
    if (scheme == InitScheme::Zeros) return Tensor::zeros_mat(rows, cols);
    auto rng = make_rng(seed);
    return xavier_mat(rows, cols, rng);
}

// Named parameter tensors plus their accumulated gradients. Iteration order
// is the lexicographic name order of std::map, which keeps every consumer
// (optimizer, checkpoints, logging) deterministic.
class ParamStore {
public:
    void add(const std::string& name, Tensor value, bool trainable = true) {
        if (values_.count(name)) throw StateError("param already registered: " + name);
        value.require_finite("param " + name);
        values_.emplace(name, std::move(value));
        trainable_[name] = trainable;
    }

    bool has(const std::string& name) const { return values_.count(name) != 0; }

    const Tensor& value(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw StateError("unknown param: " + name);
        return it->second;
    }

    Tensor& value(const std::string& name) {
        auto it = values_.find(name);
        if (it == values_.end()) throw StateError("unknown param: " + name);
        return it->second;
    }

    bool trainable(const std::string& name) const {
        auto it = trainable_.find(name);
        if (it == trainable_.end()) throw StateError("unknown param: " + name);
        return it->second;
    }

    void set_trainable(const std::string& name, bool on) {
        if (!values_.count(name)) throw StateError("unknown param: " + name);
        trainable_[name] = on;
    }

    bool has_grad(const std::string& name) const { return grads_.count(name) != 0; }

    Tensor& grad(const std::string& name) {
        auto it = grads_.find(name);
        if (it == grads_.end()) {
            it = grads_.emplace(name, value(name).zeros_like()).first;
        }
        return it->second;
    }

    void zero_grads() { grads_.clear(); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(values_.size());
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

    std::size_t count() const { return values_.size(); }

    std::uint64_t rng_seed() const { return rng_seed_; }
    void set_rng_seed(std::uint64_t s) { rng_seed_ = s; }

    // Per-parameter generator: independent of registration order, stable
    // under adding unrelated parameters.
    std::mt19937_64 param_rng(const std::string& name) const {
        return make_rng(mix_seed(rng_seed_, {fnv1a64(name)}));
    }

    // ---- checkpoint ------------------------------------------------------

    static constexpr const char* kMagic = "GCRMF-CKPT-1";

    nlohmann::json to_json() const {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [name, t] : values_) {
            if (!t.all_finite())
                throw NumericError("checkpoint: non-finite value in param " + name);
            nlohmann::json entry;
            entry["rank"] = t.rank();
            entry["rows"] = t.rows();
            entry["cols"] = t.cols();
            entry["trainable"] = trainable_.at(name);
            entry["values"] = t.raw();
            params[name] = std::move(entry);
        }
        nlohmann::json j;
        j["format"] = kMagic;
        j["rng_seed"] = rng_seed_;
        j["params"] = std::move(params);
        return j;
    }

    static ParamStore from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("format") || j["format"] != kMagic)
            throw FormatError("checkpoint: missing or unexpected format header");
        ParamStore s;
        s.rng_seed_ = j.value("rng_seed", std::uint64_t{0});
        if (!j.contains("params") || !j["params"].is_object())
            throw FormatError("checkpoint: missing params object");
        for (const auto& [name, entry] : j["params"].items()) {
            const int rank = entry.at("rank").get<int>();
            const int rows = entry.at("rows").get<int>();
            const int cols = entry.at("cols").get<int>();
            std::vector<double> vals = entry.at("values").get<std::vector<double>>();
            Tensor t;
            if (rank == 1) {
                if (cols != 1 || rows != static_cast<int>(vals.size()))
                    throw FormatError("checkpoint: bad shape for param " + name);
                t = Tensor::vec(std::move(vals));
            } else if (rank == 2) {
                t = Tensor::mat(rows, cols, std::move(vals));
            } else {
                throw FormatError("checkpoint: bad rank for param " + name);
            }
            s.add(name, std::move(t), entry.value("trainable", true));
        }
        return s;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
        out << to_json().dump(2) << '\n';
        if (!out) throw DataError("checkpoint: write failed: " + path);
    }

    static ParamStore load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("checkpoint: cannot open: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("checkpoint: invalid JSON: ") + e.what());
        }
        return from_json(j);
    }

private:
    std::map<std::string, Tensor> values_;
    std::map<std::string, bool> trainable_;
    std::map<std::string, Tensor> grads_;
    std::uint64_t rng_seed_ = 0;
};

// Binds store parameters into a tape as leaves, one leaf per name, and
// copies the tape gradients back after backward(). Forward-only tapes can
// bind too; harvest() is then a no-op.
class ParamBinding {
public:
    ParamBinding(ParamStore& store, Tape& tape) : store_(store), tape_(tape) {}

    Var operator()(const std::string& name) {
        auto it = bound_.find(name);
        if (it != bound_.end()) return it->second;
        Var v = tape_.leaf(store_.value(name));
        bound_.emplace(name, v);
        return v;
    }

    void harvest() {
        if (!tape_.grad_enabled()) return;
        for (const auto& [name, var] : bound_) {
            const Tensor& g = tape_.grad(var);
            Tensor& dst = store_.grad(name);
            for (int i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
    }

private:
    ParamStore& store_;
    Tape& tape_;
    std::map<std::string, Var> bound_;
};

} // namespace gcrmf
