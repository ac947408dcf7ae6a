// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/losses.hpp"
#include "gcrmf/model.hpp"
#include "gcrmf/optimizer.hpp"
#include "gcrmf/params.hpp"
#include "gcrmf/rng.hpp"

namespace gcrmf {

struct TrainConfig {
    ContrastiveConfig contrastive;
    LossWeights weights;
    int batch_size = 64;
    int epochs_per_window = 5;
    double lr = 1e-3;
    std::uint64_t seed = 42;

    void validate() const {
        contrastive.validate();
        weights.validate();
        if (batch_size < 2) throw DomainError("training: batch_size must be >= 2");
        if (epochs_per_window < 1) throw DomainError("training: epochs_per_window must be >= 1");
        if (lr <= 0.0) throw DomainError("training: learning rate must be > 0");
    }
};

struct LossRow {
    int window = 0;
    int epoch = 0;
    double l_struct = 0.0;
    double l_temp = 0.0;
    double l_cls = 0.0;
    double l_total = 0.0;
};

struct TrainResult {
    std::vector<LossRow> trace;
    std::map<NodeId, Tensor> final_z; // canonical table at the final window end
    bool cls_skipped = false;         // true when no labeled training node existed
};

inline std::function<bool(const Edge&)> edge_dropout_filter(std::uint64_t seed, double rate) {
    return [seed, rate](const Edge& e) {
        const double u =
            static_cast<double>(mix_seed(seed, {static_cast<std::uint64_t>(e.id)}) >> 11) *
            0x1.0p-53;
        return u >= rate;
    };
}

// Anchor/positive/negative triples for one batch. The two views are
// independent stochastic re-samplings of each anchor's path sets (or, under
// edge dropout, of the visible edges); negatives are the other anchors'
// first-view embeddings in rotated order.
inline std::vector<ContrastivePair> build_pairs(Tape& tape, ParamBinding& bind,
                                                const SubgraphModel& model, const GraphView& view,
                                                Timestamp now, const std::vector<NodeId>& anchors,
                                                std::uint64_t seed, const ContrastiveConfig& cc) {
    cc.validate();
    if (anchors.size() < 2)
        throw BatchError("pair building: a batch of fewer than 2 anchors has no negatives");

    GraphView v1 = view;
    GraphView v2 = view;
    if (cc.augmentation == Augmentation::EdgeDropout) {
        v1 = view.with_edge_filter(edge_dropout_filter(mix_seed(seed, {0xC}), cc.dropout_rate));
        v2 = view.with_edge_filter(edge_dropout_filter(mix_seed(seed, {0xD}), cc.dropout_rate));
    }
    auto z1 = model.forward_targets(tape, bind, v1, now, anchors, mix_seed(seed, {0xA})).z;
    auto z2 = model.forward_targets(tape, bind, v2, now, anchors, mix_seed(seed, {0xB})).z;

    const std::size_t B = anchors.size();
    const std::size_t n_neg =
        std::min<std::size_t>(static_cast<std::size_t>(cc.negatives_per_anchor), B - 1);
    std::vector<ContrastivePair> pairs;
    pairs.reserve(B);
    for (std::size_t i = 0; i < B; ++i) {
        ContrastivePair p;
        p.anchor = z1.at(anchors[i]);
        p.positive = z2.at(anchors[i]);
        for (std::size_t k = 1; k <= n_neg; ++k)
            p.negatives.push_back(z1.at(anchors[(i + k) % B]));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

// Cycling pool of node ids that reshuffles on wrap-around and hands out
// batch draws without within-batch duplicates.
class AnchorQueue {
public:
    AnchorQueue(std::vector<NodeId> pool, std::uint64_t seed)
        : pool_(std::move(pool)), rng_(make_rng(seed)) {
        shuffle_vec(pool_, rng_);
    }

    bool empty() const { return pool_.empty(); }
    std::size_t size() const { return pool_.size(); }

    void draw_into(std::vector<NodeId>& batch, std::size_t want) {
        want = std::min(want, pool_.size());
        std::size_t got = 0;
        std::size_t safety = 2 * pool_.size() + 4;
        while (got < want && safety-- > 0) {
            if (pos_ >= pool_.size()) {
                shuffle_vec(pool_, rng_);
                pos_ = 0;
            }
            NodeId v = pool_[pos_++];
            if (std::find(batch.begin(), batch.end(), v) == batch.end()) {
                batch.push_back(v);
                ++got;
            }
        }
    }

private:
    std::vector<NodeId> pool_;
    std::mt19937_64 rng_;
    std::size_t pos_ = 0;
};

// Window-ordered training. Per window the graph is viewed cumulatively from
// time 0 through the window end; the previous window's canonical embedding
// table anchors the drift penalty.
class Trainer {
public:
    explicit Trainer(TrainConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    TrainResult run(const TemporalHeteroGraph& g, const SubgraphModel& model, ParamStore& store,
                    const std::vector<std::pair<Timestamp, Timestamp>>& windows,
                    const std::vector<NodeId>& labeled_train) {
        if (!g.frozen()) throw StateError("training: graph must be frozen");
        if (windows.empty()) throw DomainError("training: at least one window required");

        std::vector<NodeId> illicit, licit;
        std::vector<char> is_train_labeled(static_cast<std::size_t>(g.node_count()), 0);
        for (NodeId v : labeled_train) {
            const NodeLabel l = g.node(v).label;
            if (l == NodeLabel::Illicit) illicit.push_back(v);
            else if (l == NodeLabel::Licit) licit.push_back(v);
            else continue;
            is_train_labeled[static_cast<std::size_t>(v)] = 1;
        }
        std::vector<NodeId> others;
        for (NodeId v = 0; v < g.node_count(); ++v)
            if (!is_train_labeled[static_cast<std::size_t>(v)]) others.push_back(v);

        const bool stratify = !illicit.empty() && !licit.empty();
        TrainResult result;
        result.cls_skipped = illicit.empty() && licit.empty();

        Optimizer opt = Optimizer::adam(cfg_.lr);
        const std::uint64_t canon_seed = SubgraphModel::canonical_path_seed(store);
        std::map<NodeId, Tensor> prev_table;

        for (std::size_t w = 0; w < windows.size(); ++w) {
            const Timestamp now = windows[w].second;
            GraphView view = g.snapshot(0, now);
            const int batches =
                std::max(1, g.node_count() / cfg_.batch_size);

            for (int epoch = 0; epoch < cfg_.epochs_per_window; ++epoch) {
                const std::uint64_t es = mix_seed(cfg_.seed, {w, static_cast<std::uint64_t>(epoch)});
                AnchorQueue q_ill(illicit, mix_seed(es, {1}));
                AnchorQueue q_lic(licit, mix_seed(es, {2}));
                AnchorQueue q_oth(others, mix_seed(es, {3}));

                LossRow row;
                row.window = static_cast<int>(w);
                row.epoch = epoch;
                for (int b = 0; b < batches; ++b) {
                    std::vector<NodeId> batch;
                    const std::size_t B = static_cast<std::size_t>(cfg_.batch_size);
                    if (stratify) {
                        q_ill.draw_into(batch, B / 4);
                        q_lic.draw_into(batch, B / 4);
                    }
                    q_oth.draw_into(batch, B - batch.size());
                    if (!stratify) {
                        q_ill.draw_into(batch, B - batch.size());
                        q_lic.draw_into(batch, B - batch.size());
                    }
                    if (batch.size() < 2) break; // graph smaller than a pair

                    Tape tape;
                    ParamBinding bind(store, tape);
                    const std::uint64_t bs = mix_seed(es, {static_cast<std::uint64_t>(b), 0xBA});

                    auto pairs =
                        build_pairs(tape, bind, model, view, now, batch, bs, cfg_.contrastive);
                    Var l_struct = contrastive_loss(tape, pairs, cfg_.contrastive.tau);

                    auto canon = model.forward_targets(tape, bind, view, now, batch, canon_seed);

                    Var l_temp;
                    if (prev_table.empty()) {
                        l_temp = tape.scalar(0.0);
                    } else {
                        std::vector<Var> cur, prev;
                        for (NodeId v : batch) {
                            auto it = prev_table.find(v);
                            if (it == prev_table.end()) continue;
                            cur.push_back(canon.z.at(v));
                            prev.push_back(tape.constant(it->second));
                        }
                        l_temp = temporal_loss(tape, cur, prev);
                    }

                    std::vector<std::pair<Var, double>> labeled;
                    for (NodeId v : batch) {
                        if (!is_train_labeled[static_cast<std::size_t>(v)]) continue;
                        const double target = g.node(v).label == NodeLabel::Illicit ? 1.0 : 0.0;
                        labeled.emplace_back(model.classify(tape, bind, canon.z.at(v)), target);
                    }
                    Var l_cls = classification_loss(tape, labeled);

                    Var total = total_loss(tape, l_struct, l_temp, l_cls, cfg_.weights);
                    tape.backward(total);
                    bind.harvest();
                    // params the batch never touched (classifier head without
                    // labeled anchors, schema weights without realized paths)
                    // legitimately take a zero step
                    for (const std::string& name : store.names())
                        if (store.trainable(name) && !store.has_grad(name)) store.grad(name);
                    opt.step(store);

                    row.l_struct += tape.val(l_struct).scalar_value();
                    row.l_temp += tape.val(l_temp).scalar_value();
                    row.l_cls += tape.val(l_cls).scalar_value();
                    row.l_total += tape.val(total).scalar_value();
                }
                row.l_struct /= batches;
                row.l_temp /= batches;
                row.l_cls /= batches;
                row.l_total /= batches;
                result.trace.push_back(row);
            }

            prev_table = model.z_table(store, view, now, canon_seed);
        }
        result.final_z = std::move(prev_table);
        return result;
    }

private:
    TrainConfig cfg_;
};

} // namespace gcrmf
