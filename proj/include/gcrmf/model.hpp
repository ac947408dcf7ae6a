// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gcrmf/autograd.hpp"
#include "gcrmf/encoder.hpp"
#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/metapath.hpp"
#include "gcrmf/params.hpp"
#include "gcrmf/rng.hpp"

namespace gcrmf {

struct ModelConfig {
    EncoderConfig encoder;
    int attention_dim = 32;
    int max_per_hop = 8;
    int max_total = 64;
};

// Full node scorer: temporal-attention encoder, per-schema path pooling,
// soft attention across schemas, and a linear+sigmoid risk head.
//
// Per anchor v: p_m = mean over path instances of the mean of the instance's
// node embeddings; beta = softmax over non-empty schemas of q . tanh(W_m p_m);
// z_v = sum_m beta_m p_m. When no schema yields an instance, z_v falls back
// to the node's own encoder embedding.
class SubgraphModel {
public:
    SubgraphModel(ModelConfig cfg, std::vector<MetaPath> schemas)
        : cfg_(cfg), enc_(cfg.encoder), schemas_(std::move(schemas)) {
        if (cfg_.attention_dim < 1) throw DomainError("model: attention_dim must be >= 1");
        if (schemas_.empty()) throw DomainError("model: at least one meta-path schema required");
    }

    const ModelConfig& config() const { return cfg_; }
    const TemporalEncoder& encoder() const { return enc_; }
    const std::vector<MetaPath>& schemas() const { return schemas_; }
    int embedding_dim() const { return enc_.output_dim(); }

    static std::string schema_param(int m) { return "metapath.m" + std::to_string(m) + ".w"; }

    void register_params(ParamStore& store, int feature_dim) const {
        enc_.register_params(store, feature_dim);
        const int d = enc_.output_dim();
        for (int m = 0; m < static_cast<int>(schemas_.size()); ++m) {
            auto rng = store.param_rng(schema_param(m));
            store.add(schema_param(m), xavier_mat(cfg_.attention_dim, d, rng), true);
        }
        {
            auto rng = store.param_rng("metapath.q");
            store.add("metapath.q", xavier_vec(cfg_.attention_dim, rng), true);
        }
        {
            auto rng = store.param_rng("classifier.w");
            store.add("classifier.w", xavier_vec(d, rng), true);
        }
        store.add("classifier.b", Tensor::scalar(0.0), true);
    }

    struct NodeOutputs {
        std::map<NodeId, Var> z; // subgraph embedding per target
        std::map<NodeId, Var> h; // encoder embedding per target
    };

    // Subgraph embeddings for `targets`. `path_seed` fixes the per-hop
    // sampling when enumeration caps bind; the same seed gives bit-identical
    // results regardless of how targets are batched.
    NodeOutputs forward_targets(Tape& tape, ParamBinding& bind, const GraphView& view,
                                Timestamp now, const std::vector<NodeId>& targets,
                                std::uint64_t path_seed) const {
        // instances first: they decide which encoder embeddings are needed
        std::map<NodeId, std::vector<std::vector<PathInstance>>> inst;
        std::set<NodeId> needed(targets.begin(), targets.end());
        for (NodeId v : targets) {
            auto& per_schema = inst[v];
            per_schema.resize(schemas_.size());
            for (std::size_t m = 0; m < schemas_.size(); ++m) {
                per_schema[m] = enumerate_instances(view, schemas_[m], v, now, cfg_.max_per_hop,
                                                    cfg_.max_total,
                                                    mix_seed(path_seed, {m}));
                for (const PathInstance& pi : per_schema[m])
                    needed.insert(pi.node_ids.begin(), pi.node_ids.end());
            }
        }

        std::vector<NodeId> enc_targets(needed.begin(), needed.end());
        std::map<NodeId, Var> H = enc_.encode_targets(tape, bind, view, now, enc_targets);

        Var q = bind("metapath.q");
        std::vector<Var> wm;
        wm.reserve(schemas_.size());
        for (int m = 0; m < static_cast<int>(schemas_.size()); ++m)
            wm.push_back(bind(schema_param(m)));

        NodeOutputs out;
        for (NodeId v : targets) {
            if (out.z.count(v)) continue; // duplicate target
            out.h.emplace(v, H.at(v));
            const auto& per_schema = inst.at(v);

            std::vector<Var> pooled;   // p_m for non-empty schemas
            std::vector<int> which;    // schema index per pooled entry
            for (std::size_t m = 0; m < per_schema.size(); ++m) {
                if (per_schema[m].empty()) continue;
                std::vector<Var> per_instance;
                per_instance.reserve(per_schema[m].size());
                for (const PathInstance& pi : per_schema[m]) {
                    std::vector<Var> hs;
                    hs.reserve(pi.node_ids.size());
                    for (NodeId u : pi.node_ids) hs.push_back(H.at(u));
                    per_instance.push_back(
                        tape.scale_const(tape.add_n(hs), 1.0 / static_cast<double>(hs.size())));
                }
                pooled.push_back(tape.scale_const(tape.add_n(per_instance),
                                                  1.0 / static_cast<double>(per_instance.size())));
                which.push_back(static_cast<int>(m));
            }

            if (pooled.empty()) {
                out.z.emplace(v, H.at(v)); // no realized schema: node's own embedding
                continue;
            }
            std::vector<Var> scores;
            scores.reserve(pooled.size());
            for (std::size_t k = 0; k < pooled.size(); ++k)
                scores.push_back(tape.dot(
                    q, tape.tanh_op(tape.matvec(wm[static_cast<std::size_t>(which[k])], pooled[k]))));
            Var beta = tape.softmax(tape.stack(scores));
            std::vector<Var> terms;
            terms.reserve(pooled.size());
            for (std::size_t k = 0; k < pooled.size(); ++k)
                terms.push_back(tape.scale(tape.index(beta, static_cast<int>(k)), pooled[k]));
            out.z.emplace(v, terms.size() == 1 ? terms[0] : tape.add_n(terms));
        }
        return out;
    }

    Var classify(Tape& tape, ParamBinding& bind, Var z) const {
        Var logit = tape.add(tape.dot(bind("classifier.w"), z), tape.index(bind("classifier.b"), 0));
        return tape.sigmoid(logit);
    }

    double classify_value(const ParamStore& store, const Tensor& z) const {
        const Tensor& w = store.value("classifier.w");
        if (!w.same_shape(z)) throw DimensionError("classifier: embedding dimension mismatch");
        double logit = store.value("classifier.b").scalar_value();
        for (int i = 0; i < w.size(); ++i) logit += w[i] * z[i];
        return Tape::sigmoid_scalar(logit);
    }

    // deterministic path-sampling seed every scoring path shares
    static std::uint64_t canonical_path_seed(const ParamStore& store) {
        return mix_seed(store.rng_seed(), {fnv1a64("paths")});
    }

    // value-only z table for a node subset, computed in chunks to bound the
    // per-tape footprint; identical values to one big pass
    std::map<NodeId, Tensor> z_values(ParamStore& store, const GraphView& view, Timestamp now,
                                      const std::vector<NodeId>& targets, std::uint64_t path_seed,
                                      int chunk = 512) const {
        std::map<NodeId, Tensor> table;
        for (std::size_t base = 0; base < targets.size(); base += static_cast<std::size_t>(chunk)) {
            const std::size_t end = std::min(targets.size(), base + static_cast<std::size_t>(chunk));
            std::vector<NodeId> part(targets.begin() + static_cast<std::ptrdiff_t>(base),
                                     targets.begin() + static_cast<std::ptrdiff_t>(end));
            Tape tape(false);
            ParamBinding bind(store, tape);
            NodeOutputs o = forward_targets(tape, bind, view, now, part, path_seed);
            for (const auto& [v, var] : o.z) table.emplace(v, tape.val(var));
        }
        return table;
    }

    std::map<NodeId, Tensor> z_table(ParamStore& store, const GraphView& view, Timestamp now,
                                     std::uint64_t path_seed, int chunk = 512) const {
        std::vector<NodeId> all;
        all.reserve(static_cast<std::size_t>(view.node_count()));
        for (NodeId v = 0; v < view.node_count(); ++v) all.push_back(v);
        return z_values(store, view, now, all, path_seed, chunk);
    }

private:
    ModelConfig cfg_;
    TemporalEncoder enc_;
    std::vector<MetaPath> schemas_;
};

} // namespace gcrmf
