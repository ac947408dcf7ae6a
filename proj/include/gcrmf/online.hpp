// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/model.hpp"
#include "gcrmf/params.hpp"

namespace gcrmf {

// z_new = (1 - alpha) * z_old + alpha * z_hat. alpha = 0 returns z_old
// bit-identically.
inline Tensor smooth_update(const Tensor& z_old, const Tensor& z_hat, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw DomainError("smoothing: alpha must lie in [0,1]");
    if (!z_old.same_shape(z_hat)) throw DimensionError("smoothing: shape mismatch");
    if (alpha == 0.0) return z_old;
    Tensor out = z_old;
    for (int i = 0; i < out.size(); ++i) out[i] = (1.0 - alpha) * z_old[i] + alpha * z_hat[i];
    return out;
}

struct StreamEdge {
    NodeId src = -1;
    NodeId dst = -1;
    RelationType rel = RelationType::FundTransfer;
    Timestamp t = 0;
    std::optional<double> amount;
};

struct IngestReport {
    std::vector<NodeId> affected; // ascending
    int edges_added = 0;
    Timestamp last_processed = 0;
};

// Streaming adaptation over a frozen model: append incoming edges, recompute
// embeddings on the k-hop frontier around the new endpoints, and blend them
// into the live table by exponential smoothing. Rows outside the frontier
// are never touched.
class OnlineMonitor {
public:
    OnlineMonitor(TemporalHeteroGraph graph, SubgraphModel model, ParamStore params, double alpha,
                  int frontier_radius = 0,
                  std::optional<std::map<NodeId, Tensor>> initial_live = std::nullopt)
        : g_(std::move(graph)),
          model_(std::move(model)),
          store_(std::move(params)),
          alpha_(alpha) {
        if (alpha_ < 0.0 || alpha_ > 1.0) throw DomainError("stream: alpha must lie in [0,1]");
        frontier_k_ = frontier_radius > 0 ? frontier_radius : model_.config().encoder.layer_count;
        g_.freeze();
        last_processed_ = g_.time_horizon();
        if (initial_live) {
            if (static_cast<int>(initial_live->size()) != g_.node_count())
                throw DimensionError("stream: initial table does not cover the graph");
            for (const auto& [v, t] : *initial_live) {
                if (t.rows() != model_.embedding_dim() || !t.is_vector())
                    throw DimensionError("stream: bad initial embedding shape");
                t.require_finite("initial live table");
            }
            live_ = std::move(*initial_live);
        } else {
            live_ = model_.z_table(store_, g_.snapshot(0, last_processed_), last_processed_,
                                   SubgraphModel::canonical_path_seed(store_));
        }
    }

    double alpha() const { return alpha_; }
    int frontier_radius() const { return frontier_k_; }
    Timestamp last_processed() const { return last_processed_; }
    const TemporalHeteroGraph& graph() const { return g_; }
    const std::map<NodeId, Tensor>& live() const { return live_; }

    IngestReport ingest(const std::vector<StreamEdge>& batch) {
        IngestReport report;
        report.last_processed = last_processed_;
        if (batch.empty()) return report;

        // validate everything before touching any state
        Timestamp now = last_processed_;
        for (const StreamEdge& se : batch) {
            if (se.t < last_processed_)
                throw DataError("stream: out-of-order timestamp " + std::to_string(se.t) +
                                " before watermark " + std::to_string(last_processed_));
            if (se.src < 0 || se.src >= g_.node_count() || se.dst < 0 ||
                se.dst >= g_.node_count())
                throw DataError("stream: edge references unknown node");
            if (se.amount && *se.amount < 0.0)
                throw DataError("stream: negative amount");
            now = std::max(now, se.t);
        }

        std::set<NodeId> frontier;
        for (const StreamEdge& se : batch) {
            g_.add_edge(se.src, se.dst, se.rel, se.t, se.amount);
            frontier.insert(se.src);
            frontier.insert(se.dst);
            ++report.edges_added;
        }

        GraphView view = g_.snapshot(0, now);
        std::set<NodeId> affected = expand_frontier(view, frontier, now, frontier_k_);
        std::vector<NodeId> targets(affected.begin(), affected.end());

        auto z_hat = model_.z_values(store_, view, now, targets,
                                     SubgraphModel::canonical_path_seed(store_));
        for (NodeId v : targets)
            live_[v] = smooth_update(live_.at(v), z_hat.at(v), alpha_);

        last_processed_ = now;
        report.affected = std::move(targets);
        report.last_processed = now;
        return report;
    }

    // classifier probability per live row, ranked by score descending with
    // ascending node-id tie-break
    std::vector<std::pair<NodeId, double>> score_alerts() const {
        std::vector<std::pair<NodeId, double>> out;
        out.reserve(live_.size());
        for (const auto& [v, z] : live_) out.emplace_back(v, model_.classify_value(store_, z));
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        return out;
    }

    static std::set<NodeId> expand_frontier(const GraphView& view, const std::set<NodeId>& seeds,
                                            Timestamp now, int hops) {
        std::set<NodeId> visited = seeds;
        std::set<NodeId> ring = seeds;
        for (int h = 0; h < hops; ++h) {
            std::set<NodeId> next;
            for (NodeId v : ring)
                for (const NeighborRef& nb : view.neighbors(v, now, Direction::Both))
                    if (!visited.count(nb.neighbor)) next.insert(nb.neighbor);
            if (next.empty()) break;
            visited.insert(next.begin(), next.end());
            ring = std::move(next);
        }
        return visited;
    }

private:
    TemporalHeteroGraph g_;
    SubgraphModel model_;
    ParamStore store_;
    double alpha_;
    int frontier_k_;
    Timestamp last_processed_ = 0;
    std::map<NodeId, Tensor> live_;
};

} // namespace gcrmf
