// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gcrmf/autograd.hpp"
#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/params.hpp"

namespace gcrmf {

inline constexpr int kCategoryCount = 4;

struct EncoderConfig {
    int layer_count = 2;
    int hidden_dim = 32;
    double leaky_slope = 0.2;
    // false drops the recency channel entirely; numerically identical to
    // pinning the temporal mixing weight at zero.
    bool temporal_channel = true;
    // concatenate a category one-hot onto the input features
    bool category_onehot = false;
    Direction direction = Direction::Both;
};

// Stacked dual-channel attention layers. Each layer weighs a node's incident
// edges by a learned structural softmax mixed with an exponential recency
// kernel, then aggregates linearly-mapped neighbor embeddings. The mixed
// weights are used raw (no renormalization), so output scale varies with
// degree; that matches the aggregation rule this implements.
//
// Multi-edge semantics: every parallel edge contributes its own softmax
// entry and its own aggregation term, while the recency weight for a
// neighbor pair comes from the most recent edge between the two nodes.
class TemporalEncoder {
public:
    explicit TemporalEncoder(EncoderConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.layer_count < 1) throw DomainError("encoder: layer_count must be >= 1");
        if (cfg_.hidden_dim < 1) throw DomainError("encoder: hidden_dim must be >= 1");
    }

    const EncoderConfig& config() const { return cfg_; }

    int input_dim(int feature_dim) const {
        return feature_dim + (cfg_.category_onehot ? kCategoryCount : 0);
    }

    int output_dim() const { return cfg_.hidden_dim; }

    static std::string layer_param(int layer, const char* which) {
        return "encoder.layer" + std::to_string(layer) + "." + which;
    }

    void register_params(ParamStore& store, int feature_dim) const {
        int d_in = input_dim(feature_dim);
        for (int l = 0; l < cfg_.layer_count; ++l) {
            const int d_out = cfg_.hidden_dim;
            add_xavier_mat(store, layer_param(l, "w_s"), d_out, d_in);
            add_xavier_vec(store, layer_param(l, "a_s"), 2 * d_out);
            add_xavier_mat(store, layer_param(l, "w"), d_out, d_in);
            d_in = d_out;
        }
        // decay rate stored pre-softplus so the effective rate stays >= 0
        store.add("encoder.gamma_raw", Tensor::scalar(-2.0), cfg_.temporal_channel);
        store.add("encoder.lambda_s", Tensor::scalar(0.5), true);
        store.add("encoder.lambda_t", Tensor::scalar(cfg_.temporal_channel ? 0.5 : 0.0),
                  cfg_.temporal_channel);
    }

    Tensor initial_features(const Node& n) const {
        if (!cfg_.category_onehot) return n.features;
        Tensor t = Tensor::zeros_vec(n.features.rows() + kCategoryCount);
        for (int i = 0; i < n.features.rows(); ++i) t[i] = n.features[i];
        t[n.features.rows() + static_cast<int>(n.category)] = 1.0;
        return t;
    }

    // Final-layer embeddings for `targets` only. Inputs are pulled in
    // layer-by-layer over the exact neighborhoods the aggregation reads, so
    // the values are identical to a whole-graph pass restricted to targets.
    std::map<NodeId, Var> encode_targets(Tape& tape, ParamBinding& bind, const GraphView& view,
                                         Timestamp now, const std::vector<NodeId>& targets) const {
        const int L = cfg_.layer_count;

        // need[l] = nodes whose layer-l embedding must exist (layer 0 = inputs)
        std::vector<std::set<NodeId>> need(static_cast<std::size_t>(L) + 1);
        for (NodeId v : targets) need[static_cast<std::size_t>(L)].insert(v);
        for (int l = L - 1; l >= 0; --l) {
            auto& cur = need[static_cast<std::size_t>(l)];
            cur = need[static_cast<std::size_t>(l) + 1];
            for (NodeId v : need[static_cast<std::size_t>(l) + 1])
                for (const NeighborRef& nb : view.neighbors(v, now, cfg_.direction))
                    cur.insert(nb.neighbor);
        }

        std::map<NodeId, Var> H;
        for (NodeId v : need[0])
            H[v] = tape.constant(initial_features(view.node(v)));

        Var lam_s = bind("encoder.lambda_s");
        Var lam_t{};
        Var gamma{};
        if (cfg_.temporal_channel) {
            lam_t = bind("encoder.lambda_t");
            gamma = tape.softplus(bind("encoder.gamma_raw"));
        }

        for (int l = 0; l < L; ++l) {
            Var w_s = bind(layer_param(l, "w_s"));
            Var a_s = bind(layer_param(l, "a_s"));
            Var w = bind(layer_param(l, "w"));
            std::map<NodeId, Var> ws_h; // cached W_s h_v per node this layer
            std::map<NodeId, Var> w_h;  // cached W h_v per node this layer
            auto get_ws = [&](NodeId v) {
                auto it = ws_h.find(v);
                if (it == ws_h.end()) it = ws_h.emplace(v, tape.matvec(w_s, H.at(v))).first;
                return it->second;
            };
            auto get_w = [&](NodeId v) {
                auto it = w_h.find(v);
                if (it == w_h.end()) it = w_h.emplace(v, tape.matvec(w, H.at(v))).first;
                return it->second;
            };

            std::map<NodeId, Var> H_next;
            for (NodeId v : need[static_cast<std::size_t>(l) + 1]) {
                auto nbs = view.neighbors(v, now, cfg_.direction);
                Var agg;
                if (nbs.empty()) {
                    // no incident edges: aggregate the node itself at zero lag,
                    // where both channel weights are exactly 1
                    Var coeff = cfg_.temporal_channel ? tape.add(lam_s, lam_t) : lam_s;
                    agg = tape.scale(coeff, get_w(v));
                } else {
                    Var ws_v = get_ws(v);
                    std::vector<Var> scores;
                    scores.reserve(nbs.size());
                    for (const NeighborRef& nb : nbs) {
                        Var cat = tape.concat(ws_v, get_ws(nb.neighbor));
                        scores.push_back(tape.leaky_relu(tape.dot(a_s, cat), cfg_.leaky_slope));
                    }
                    Var alpha = tape.softmax(tape.stack(scores));

                    std::map<NodeId, Timestamp> last_t;
                    for (const NeighborRef& nb : nbs) {
                        auto it = last_t.find(nb.neighbor);
                        if (it == last_t.end() || it->second < nb.timestamp)
                            last_t[nb.neighbor] = nb.timestamp;
                    }
                    std::map<NodeId, Var> recency;
                    std::vector<Var> terms;
                    terms.reserve(nbs.size());
                    for (std::size_t k = 0; k < nbs.size(); ++k) {
                        const NeighborRef& nb = nbs[k];
                        Var coeff = tape.scale(lam_s, tape.index(alpha, static_cast<int>(k)));
                        if (cfg_.temporal_channel) {
                            auto it = recency.find(nb.neighbor);
                            if (it == recency.end()) {
                                const double dt =
                                    static_cast<double>(now - last_t.at(nb.neighbor));
                                Var a_t = tape.exp_op(tape.scale_const(gamma, -dt));
                                it = recency.emplace(nb.neighbor, a_t).first;
                            }
                            coeff = tape.add(coeff, tape.scale(lam_t, it->second));
                        }
                        terms.push_back(tape.scale(coeff, get_w(nb.neighbor)));
                    }
                    agg = tape.add_n(terms);
                }
                H_next[v] = tape.leaky_relu(agg, cfg_.leaky_slope);
            }
            H = std::move(H_next);
        }
        return H;
    }

    // value-only whole-table pass; one tape, gradients off
    std::vector<Tensor> embed_all(ParamStore& store, const GraphView& view, Timestamp now) const {
        std::vector<NodeId> all;
        all.reserve(static_cast<std::size_t>(view.node_count()));
        for (NodeId v = 0; v < view.node_count(); ++v) all.push_back(v);
        Tape tape(false);
        ParamBinding bind(store, tape);
        auto H = encode_targets(tape, bind, view, now, all);
        std::vector<Tensor> table;
        table.reserve(all.size());
        for (NodeId v : all) table.push_back(tape.val(H.at(v)));
        return table;
    }

private:
    static void add_xavier_mat(ParamStore& store, const std::string& name, int rows, int cols) {
        auto rng = store.param_rng(name);
        store.add(name, xavier_mat(rows, cols, rng), true);
    }

    static void add_xavier_vec(ParamStore& store, const std::string& name, int n) {
        auto rng = store.param_rng(name);
        store.add(name, xavier_vec(n, rng), true);
    }

    EncoderConfig cfg_;
};

} // namespace gcrmf
