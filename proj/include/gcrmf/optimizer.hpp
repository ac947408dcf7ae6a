// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "gcrmf/errors.hpp"
#include "gcrmf/params.hpp"
#include "gcrmf/tensor.hpp"

namespace gcrmf {

enum class OptKind { SGD, Adam };

// SGD / Adam over the trainable parameters of a ParamStore. step() consumes
// the accumulated gradients and zeroes them; a trainable parameter with no
// gradient at step time means the training loop forgot to run backward, so
// it is an error rather than a silent no-op.
class Optimizer {
public:
    explicit Optimizer(OptKind kind, double lr = 1e-3, double beta1 = 0.9,
                       double beta2 = 0.999, double eps = 1e-8)
        : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    static Optimizer sgd(double lr) { return Optimizer(OptKind::SGD, lr); }
    static Optimizer adam(double lr = 1e-3) { return Optimizer(OptKind::Adam, lr); }

    OptKind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    std::int64_t step_count() const { return t_; }

    void step(ParamStore& store) {
        for (const std::string& name : store.names()) {
            if (store.trainable(name) && !store.has_grad(name))
                throw StateError("optimizer: missing gradient for trainable param " + name);
        }
        if (kind_ == OptKind::Adam) ++t_;
        for (const std::string& name : store.names()) {
            if (!store.trainable(name)) continue;
            Tensor& w = store.value(name);
            const Tensor& g = store.grad(name);
            if (!g.all_finite()) throw NumericError("optimizer: non-finite gradient for " + name);
            if (kind_ == OptKind::SGD) {
                for (int i = 0; i < w.size(); ++i) w[i] -= lr_ * g[i];
            } else {
                Tensor& m = moment(m_, store, name);
                Tensor& v = moment(v_, store, name);
                const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
                const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
                for (int i = 0; i < w.size(); ++i) {
                    m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
                    v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
                    const double mhat = m[i] / c1;
                    const double vhat = v[i] / c2;
                    w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
                }
            }
            if (!w.all_finite()) throw NumericError("optimizer: non-finite update for " + name);
        }
        store.zero_grads();
    }

private:
    Tensor& moment(std::map<std::string, Tensor>& m, ParamStore& store, const std::string& name) {
        auto it = m.find(name);
        if (it == m.end()) it = m.emplace(name, store.value(name).zeros_like()).first;
        if (!it->second.same_shape(store.value(name)))
            throw DimensionError("optimizer: moment shape does not match param " + name);
        return it->second;
    }

    OptKind kind_;
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::int64_t t_ = 0;
    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
};

} // namespace gcrmf
