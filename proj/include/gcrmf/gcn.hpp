// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/optimizer.hpp"
#include "gcrmf/params.hpp"
#include "gcrmf/rng.hpp"

namespace gcrmf {

struct GcnConfig {
    int hidden = 16;
    int epochs = 200;
    double lr = 0.01;
    std::uint64_t seed = 42;

    void validate() const {
        if (hidden < 1) throw ConfigError("gcn: hidden must be >= 1");
        if (epochs < 0) throw ConfigError("gcn: epochs must be >= 0");
        if (lr <= 0.0) throw ConfigError("gcn: lr must be positive");
    }
};

// Two-layer semi-supervised graph convolution over the undirected,
// self-looped, symmetrically normalized adjacency of a window. Parallel
// edges accumulate weight. Gradients are closed-form (the network is small
// and fixed), accumulated into a ParamStore so the shared Adam optimizer can
// take the steps.
class GcnBaseline {
public:
    GcnBaseline(const GraphView& view, GcnConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        n_ = view.node_count();
        if (n_ == 0) throw DataError("gcn: empty graph");
        f_ = view.feature_dim();
        h_ = cfg_.hidden;

        // raw undirected multiplicity + identity
        std::vector<std::map<int, double>> w(static_cast<std::size_t>(n_));
        for (const Edge& e : view.graph().edges()) {
            if (!view.contains(e)) continue;
            if (e.src == e.dst) {
                w[static_cast<std::size_t>(e.src)][e.src] += 1.0;
            } else {
                w[static_cast<std::size_t>(e.src)][e.dst] += 1.0;
                w[static_cast<std::size_t>(e.dst)][e.src] += 1.0;
            }
        }
        for (int v = 0; v < n_; ++v) w[static_cast<std::size_t>(v)][v] += 1.0;

        std::vector<double> deg(static_cast<std::size_t>(n_), 0.0);
        for (int v = 0; v < n_; ++v)
            for (const auto& [u, c] : w[static_cast<std::size_t>(v)])
                deg[static_cast<std::size_t>(v)] += c;

        adj_.resize(static_cast<std::size_t>(n_));
        for (int v = 0; v < n_; ++v)
            for (const auto& [u, c] : w[static_cast<std::size_t>(v)])
                adj_[static_cast<std::size_t>(v)].emplace_back(
                    u, c / std::sqrt(deg[static_cast<std::size_t>(v)] *
                                     deg[static_cast<std::size_t>(u)]));

        x_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(f_));
        for (int v = 0; v < n_; ++v) {
            const Tensor& feat = view.node(v).features;
            for (int k = 0; k < f_; ++k)
                x_[static_cast<std::size_t>(v) * f_ + k] = feat[k];
        }

        store_.set_rng_seed(cfg_.seed);
        store_.add("gcn.w1", seeded_init_mat(h_, f_, InitScheme::XavierUniform,
                                             mix_seed(cfg_.seed, {fnv1a64("gcn.w1")})));
        store_.add("gcn.b1", Tensor::zeros_vec(h_));
        store_.add("gcn.w2", seeded_init_vec(h_, InitScheme::XavierUniform,
                                             mix_seed(cfg_.seed, {fnv1a64("gcn.w2")})));
        store_.add("gcn.b2", Tensor::scalar(0.0));
    }

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    double loss(const std::vector<std::pair<NodeId, int>>& labeled) const {
        Forward fw = run_forward();
        return labeled_loss(fw, labeled, nullptr);
    }

    double loss_and_grads(const std::vector<std::pair<NodeId, int>>& labeled) {
        Forward fw = run_forward();
        std::vector<double> dz2(static_cast<std::size_t>(n_), 0.0);
        const double value = labeled_loss(fw, labeled, &dz2);
        backward(fw, dz2);
        return value;
    }

    void train(const std::vector<std::pair<NodeId, int>>& labeled) {
        check_labels(labeled);
        trace_.clear();
        Optimizer opt = Optimizer::adam(cfg_.lr);
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            const double value = loss_and_grads(labeled);
            if (!std::isfinite(value)) throw NumericError("gcn: non-finite training loss");
            trace_.push_back(value);
            opt.step(store_);
        }
    }

    const std::vector<double>& training_losses() const { return trace_; }

    std::vector<double> scores() const {
        Forward fw = run_forward();
        std::vector<double> p(static_cast<std::size_t>(n_));
        for (int v = 0; v < n_; ++v) {
            p[static_cast<std::size_t>(v)] = sigmoid(fw.z2[static_cast<std::size_t>(v)]);
            if (!std::isfinite(p[static_cast<std::size_t>(v)]))
                throw NumericError("gcn: non-finite score");
        }
        return p;
    }

private:
    struct Forward {
        std::vector<double> z1; // n x h, pre-activation
        std::vector<double> h1; // n x h
        std::vector<double> z2; // n
    };

    static double sigmoid(double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    void check_labels(const std::vector<std::pair<NodeId, int>>& labeled) const {
        if (labeled.empty()) throw StateError("gcn: no labeled training nodes");
        bool pos = false, neg = false;
        for (const auto& [id, y] : labeled) {
            if (id < 0 || id >= n_) throw DomainError("gcn: labeled node out of range");
            if (y != 0 && y != 1) throw DomainError("gcn: label must be 0 or 1");
            (y == 1 ? pos : neg) = true;
        }
        if (!pos || !neg) throw StateError("gcn: training labels contain a single class");
    }

    // out[v] = sum_u adj[v][u] * in[u], columns = cols
    void adj_apply(const std::vector<double>& in, std::vector<double>& out, int cols) const {
        out.assign(static_cast<std::size_t>(n_) * cols, 0.0);
        for (int v = 0; v < n_; ++v)
            for (const auto& [u, a] : adj_[static_cast<std::size_t>(v)])
                for (int k = 0; k < cols; ++k)
                    out[static_cast<std::size_t>(v) * cols + k] +=
                        a * in[static_cast<std::size_t>(u) * cols + k];
    }

    Forward run_forward() const {
        const Tensor& w1 = store_.value("gcn.w1");
        const Tensor& b1 = store_.value("gcn.b1");
        const Tensor& w2 = store_.value("gcn.w2");
        const double b2 = store_.value("gcn.b2")[0];

        std::vector<double> m1(static_cast<std::size_t>(n_) * h_, 0.0);
        for (int v = 0; v < n_; ++v)
            for (int k = 0; k < h_; ++k) {
                double s = 0.0;
                for (int j = 0; j < f_; ++j)
                    s += w1.at(k, j) * x_[static_cast<std::size_t>(v) * f_ + j];
                m1[static_cast<std::size_t>(v) * h_ + k] = s;
            }

        Forward fw;
        adj_apply(m1, fw.z1, h_);
        fw.h1.resize(fw.z1.size());
        for (std::size_t i = 0; i < fw.z1.size(); ++i) {
            fw.z1[i] += b1[static_cast<int>(i % static_cast<std::size_t>(h_))];
            fw.h1[i] = fw.z1[i] > 0.0 ? fw.z1[i] : 0.0;
        }

        std::vector<double> s2(static_cast<std::size_t>(n_), 0.0);
        for (int v = 0; v < n_; ++v) {
            double s = 0.0;
            for (int k = 0; k < h_; ++k) s += w2[k] * fw.h1[static_cast<std::size_t>(v) * h_ + k];
            s2[static_cast<std::size_t>(v)] = s;
        }
        adj_apply(s2, fw.z2, 1);
        for (double& z : fw.z2) z += b2;
        return fw;
    }

    // Weighted mean BCE over labeled nodes; the minority (illicit) class is
    // up-weighted by neg/pos. When dz2 is given, fills d(loss)/d(z2).
    double labeled_loss(const Forward& fw, const std::vector<std::pair<NodeId, int>>& labeled,
                        std::vector<double>* dz2) const {
        check_labels(labeled);
        int pos = 0, neg = 0;
        for (const auto& [id, y] : labeled) (y == 1 ? pos : neg) += 1;
        const double pos_weight = static_cast<double>(neg) / static_cast<double>(pos);

        double total_w = 0.0;
        for (const auto& [id, y] : labeled) total_w += (y == 1 ? pos_weight : 1.0);

        constexpr double kGuard = 1e-12;
        double value = 0.0;
        for (const auto& [id, y] : labeled) {
            const double wi = (y == 1 ? pos_weight : 1.0);
            const double p = sigmoid(fw.z2[static_cast<std::size_t>(id)]);
            const double pc = std::min(1.0 - kGuard, std::max(kGuard, p));
            value += wi * -(y == 1 ? std::log(pc) : std::log(1.0 - pc));
            if (dz2) (*dz2)[static_cast<std::size_t>(id)] += wi * (p - y) / total_w;
        }
        return value / total_w;
    }

    void backward(const Forward& fw, const std::vector<double>& dz2) {
        // z2 = A (H1 w2) + b2 with symmetric A, so the adjoint reuses A
        std::vector<double> g2;
        adj_apply(dz2, g2, 1);

        const Tensor& w2 = store_.value("gcn.w2");
        Tensor& gw2 = store_.grad("gcn.w2");
        Tensor& gb2 = store_.grad("gcn.b2");
        for (const double d : dz2) gb2.raw()[0] += d;

        std::vector<double> dz1(static_cast<std::size_t>(n_) * h_, 0.0);
        for (int v = 0; v < n_; ++v) {
            const double gv = g2[static_cast<std::size_t>(v)];
            for (int k = 0; k < h_; ++k) {
                const std::size_t i = static_cast<std::size_t>(v) * h_ + k;
                gw2.raw()[static_cast<std::size_t>(k)] += gv * fw.h1[i];
                if (fw.z1[i] > 0.0) dz1[i] = gv * w2[k];
            }
        }

        Tensor& gb1 = store_.grad("gcn.b1");
        for (int v = 0; v < n_; ++v)
            for (int k = 0; k < h_; ++k)
                gb1.raw()[static_cast<std::size_t>(k)] += dz1[static_cast<std::size_t>(v) * h_ + k];

        std::vector<double> g1;
        adj_apply(dz1, g1, h_);
        Tensor& gw1 = store_.grad("gcn.w1");
        for (int v = 0; v < n_; ++v)
            for (int k = 0; k < h_; ++k) {
                const double gvk = g1[static_cast<std::size_t>(v) * h_ + k];
                if (gvk == 0.0) continue;
                for (int j = 0; j < f_; ++j)
                    gw1.at(k, j) += gvk * x_[static_cast<std::size_t>(v) * f_ + j];
            }
    }

    GcnConfig cfg_;
    int n_ = 0, f_ = 0, h_ = 0;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<double> x_;
    ParamStore store_;
    std::vector<double> trace_;
};

inline std::vector<double> gcn_train_and_score(const GraphView& view,
                                               const std::vector<std::pair<NodeId, int>>& labeled,
                                               const GcnConfig& cfg) {
    GcnBaseline model(view, cfg);
    model.train(labeled);
    return model.scores();
}

} // namespace gcrmf
