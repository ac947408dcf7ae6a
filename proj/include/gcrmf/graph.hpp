// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/tensor.hpp"

namespace gcrmf {

using NodeId = int;
using EdgeId = int;
using Timestamp = std::int64_t;

enum class IndustryCategory { Mobility, Energy, Fintech, Other };
enum class RelationType { FundTransfer, RentalContract, EnergyTrade, Settlement, CreditIssue };
enum class NodeLabel { Illicit, Licit, Unknown };
enum class Direction { In, Out, Both };

inline const char* to_string(IndustryCategory c) {
    switch (c) {
        case IndustryCategory::Mobility: return "Mobility";
        case IndustryCategory::Energy: return "Energy";
        case IndustryCategory::Fintech: return "Fintech";
        case IndustryCategory::Other: return "Other";
    }
    throw DomainError("unknown industry category");
}

inline const char* to_string(RelationType r) {
    switch (r) {
        case RelationType::FundTransfer: return "FundTransfer";
        case RelationType::RentalContract: return "RentalContract";
        case RelationType::EnergyTrade: return "EnergyTrade";
        case RelationType::Settlement: return "Settlement";
        case RelationType::CreditIssue: return "CreditIssue";
    }
    throw DomainError("unknown relation type");
}

inline const char* to_string(NodeLabel l) {
    switch (l) {
        case NodeLabel::Illicit: return "illicit";
        case NodeLabel::Licit: return "licit";
        case NodeLabel::Unknown: return "unknown";
    }
    throw DomainError("unknown node label");
}

inline IndustryCategory parse_category(const std::string& s) {
    if (s == "Mobility") return IndustryCategory::Mobility;
    if (s == "Energy") return IndustryCategory::Energy;
    if (s == "Fintech") return IndustryCategory::Fintech;
    if (s == "Other") return IndustryCategory::Other;
    throw FormatError("unknown industry category: " + s);
}

inline RelationType parse_relation(const std::string& s) {
    if (s == "FundTransfer") return RelationType::FundTransfer;
    if (s == "RentalContract") return RelationType::RentalContract;
    if (s == "EnergyTrade") return RelationType::EnergyTrade;
    if (s == "Settlement") return RelationType::Settlement;
    if (s == "CreditIssue") return RelationType::CreditIssue;
    throw FormatError("unknown relation type: " + s);
}

inline NodeLabel parse_label(const std::string& s) {
    if (s == "illicit") return NodeLabel::Illicit;
    if (s == "licit") return NodeLabel::Licit;
    if (s == "unknown") return NodeLabel::Unknown;
    throw FormatError("unknown node label: " + s);
}

struct Node {
    NodeId id = -1;
    IndustryCategory category = IndustryCategory::Other;
    Tensor features;
    NodeLabel label = NodeLabel::Unknown;
    Timestamp first_seen = 0;
};

struct Edge {
    EdgeId id = -1;
    NodeId src = -1;
    NodeId dst = -1;
    RelationType relation = RelationType::FundTransfer;
    Timestamp timestamp = 0;
    std::optional<double> amount;
};

// One incident edge as seen from a query node.
struct NeighborRef {
    NodeId neighbor = -1;
    EdgeId edge = -1;
    Timestamp timestamp = 0;
};

inline bool operator==(const NeighborRef& a, const NeighborRef& b) {
    return a.neighbor == b.neighbor && a.edge == b.edge && a.timestamp == b.timestamp;
}

class GraphView;

// Directed multigraph over typed nodes/edges with integer time steps.
// Node ids are dense and assigned in insertion order; incidence lists are
// kept sorted by (timestamp, edge id). Mutation is append-only; freeze()
// marks the hand-off point after which training-side consumers may assume
// the structure is stable.
class TemporalHeteroGraph {
public:
    explicit TemporalHeteroGraph(int feature_dim) : feature_dim_(feature_dim) {
        if (feature_dim <= 0) throw DomainError("graph: feature dimension must be positive");
    }

    int feature_dim() const { return feature_dim_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    NodeId add_node(IndustryCategory category, Tensor features, NodeLabel label,
                    Timestamp first_seen, const std::string& external_id = {}) {
        if (!features.is_vector() || features.rows() != feature_dim_)
            throw DimensionError("graph: feature vector length does not match graph feature dim");
        if (first_seen < 0) throw DomainError("graph: first_seen must be nonnegative");
        Node n;
        n.id = static_cast<NodeId>(nodes_.size());
        n.category = category;
        n.features = std::move(features);
        n.label = label;
        n.first_seen = first_seen;
        nodes_.push_back(std::move(n));
        out_.emplace_back();
        in_.emplace_back();
        external_ids_.push_back(external_id);
        if (!external_id.empty()) {
            auto [it, fresh] = external_to_id_.emplace(external_id, nodes_.back().id);
            if (!fresh) throw DataError("graph: duplicate external id " + external_id);
        }
        horizon_ = std::max(horizon_, first_seen);
        return nodes_.back().id;
    }

    EdgeId add_edge(NodeId src, NodeId dst, RelationType relation, Timestamp timestamp,
                    std::optional<double> amount = std::nullopt) {
        require_node(src);
        require_node(dst);
        if (timestamp < 0) throw DomainError("graph: edge timestamp must be nonnegative");
        if (amount && *amount < 0.0) throw DomainError("graph: edge amount must be nonnegative");
        Edge e;
        e.id = static_cast<EdgeId>(edges_.size());
        e.src = src;
        e.dst = dst;
        e.relation = relation;
        e.timestamp = timestamp;
        e.amount = amount;
        edges_.push_back(e);
        insert_sorted(out_[static_cast<std::size_t>(src)], timestamp, e.id);
        insert_sorted(in_[static_cast<std::size_t>(dst)], timestamp, e.id);
        horizon_ = std::max(horizon_, timestamp);
        return e.id;
    }

    const Node& node(NodeId id) const {
        require_node(id);
        return nodes_[static_cast<std::size_t>(id)];
    }

    Node& node_mut(NodeId id) {
        require_node(id);
        return nodes_[static_cast<std::size_t>(id)];
    }

    const Edge& edge(EdgeId id) const {
        if (id < 0 || id >= edge_count()) throw MissingNodeError("graph: unknown edge id");
        return edges_[static_cast<std::size_t>(id)];
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    Timestamp time_horizon() const { return horizon_; }

    const std::string& external_id(NodeId id) const {
        require_node(id);
        return external_ids_[static_cast<std::size_t>(id)];
    }

    std::optional<NodeId> node_by_external(const std::string& ext) const {
        auto it = external_to_id_.find(ext);
        if (it == external_to_id_.end()) return std::nullopt;
        return it->second;
    }

    // All edges incident to `v` with timestamp <= up_to, ordered by
    // (timestamp, edge id). A self-loop appears once under Both.
    std::vector<NeighborRef> neighbors(NodeId v, Timestamp up_to, Direction dir) const {
        return neighbors_in_window(v, 0, up_to, dir, nullptr);
    }

    GraphView snapshot(Timestamp window_start, Timestamp window_end) const;
    GraphView full_view() const;

    // Shared by direct queries and window views; `filter`, when set, drops
    // edges it rejects.
    std::vector<NeighborRef> neighbors_in_window(
        NodeId v, Timestamp from, Timestamp to, Direction dir,
        const std::function<bool(const Edge&)>* filter) const {
        require_node(v);
        std::vector<NeighborRef> result;
        auto emit = [&](EdgeId eid, bool incoming) {
            const Edge& e = edges_[static_cast<std::size_t>(eid)];
            if (filter && *filter && !(*filter)(e)) return;
            result.push_back(NeighborRef{incoming ? e.src : e.dst, eid, e.timestamp});
        };
        const auto& outs = out_[static_cast<std::size_t>(v)];
        const auto& ins = in_[static_cast<std::size_t>(v)];
        if (dir == Direction::Out) {
            for (const auto& entry : range(outs, from, to)) emit(entry.second, false);
        } else if (dir == Direction::In) {
            for (const auto& entry : range(ins, from, to)) emit(entry.second, true);
        } else {
            // merge two (t, edge-id)-sorted runs; equal keys mean the same
            // self-loop edge seen from both sides, emitted once
            auto ro = range(outs, from, to);
            auto ri = range(ins, from, to);
            std::size_t i = 0, j = 0;
            while (i < ro.size() && j < ri.size()) {
                if (ro[i] < ri[j]) {
                    emit(ro[i].second, false);
                    ++i;
                } else if (ri[j] < ro[i]) {
                    emit(ri[j].second, true);
                    ++j;
                } else {
                    emit(ro[i].second, false);
                    ++i;
                    ++j;
                }
            }
            for (; i < ro.size(); ++i) emit(ro[i].second, false);
            for (; j < ri.size(); ++j) emit(ri[j].second, true);
        }
        return result;
    }

    // Structural sanity pass used after bulk loads.
    void validate() const {
        for (const Edge& e : edges_) {
            if (e.src < 0 || e.src >= node_count() || e.dst < 0 || e.dst >= node_count())
                throw DataError("graph: edge endpoint out of range");
            if (e.timestamp < 0) throw DataError("graph: negative edge timestamp");
        }
        for (const auto& lists : {std::cref(out_), std::cref(in_)}) {
            for (const auto& lst : lists.get()) {
                if (!std::is_sorted(lst.begin(), lst.end()))
                    throw DataError("graph: incidence list out of order");
            }
        }
    }

private:
    using IncEntry = std::pair<Timestamp, EdgeId>;

    void require_node(NodeId id) const {
        if (id < 0 || id >= node_count())
            throw MissingNodeError("graph: unknown node id " + std::to_string(id));
    }

    static void insert_sorted(std::vector<IncEntry>& lst, Timestamp t, EdgeId e) {
        IncEntry entry{t, e};
        if (lst.empty() || lst.back() < entry) {
            lst.push_back(entry);
            return;
        }
        lst.insert(std::upper_bound(lst.begin(), lst.end(), entry), entry);
    }

    static std::vector<IncEntry> range(const std::vector<IncEntry>& lst, Timestamp from,
                                       Timestamp to) {
        std::vector<IncEntry> out;
        if (to < from) return out;
        auto lo = std::lower_bound(lst.begin(), lst.end(), IncEntry{from, -1});
        for (auto it = lo; it != lst.end() && it->first <= to; ++it) out.push_back(*it);
        return out;
    }

    int feature_dim_;
    bool frozen_ = false;
    Timestamp horizon_ = 0;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<IncEntry>> out_;
    std::vector<std::vector<IncEntry>> in_;
    std::vector<std::string> external_ids_;
    std::map<std::string, NodeId> external_to_id_;
};

// Window-and-filter restriction of a graph. All nodes stay visible; only
// edges inside [window_start, window_end] that pass the filter (when set)
// are exposed. Cheap to copy; does not own the graph.
class GraphView {
public:
    GraphView(const TemporalHeteroGraph& g, Timestamp window_start, Timestamp window_end)
        : g_(&g), start_(window_start), end_(window_end) {
        if (window_start > window_end) throw DomainError("graph view: inverted window");
        if (window_start < 0) throw DomainError("graph view: negative window start");
    }

    const TemporalHeteroGraph& graph() const { return *g_; }
    Timestamp window_start() const { return start_; }
    Timestamp window_end() const { return end_; }

    int node_count() const { return g_->node_count(); }
    int feature_dim() const { return g_->feature_dim(); }
    const Node& node(NodeId id) const { return g_->node(id); }
    const Edge& edge(EdgeId id) const { return g_->edge(id); }

    GraphView with_edge_filter(std::function<bool(const Edge&)> f) const {
        GraphView v = *this;
        if (!filter_) {
            v.filter_ = std::move(f);
        } else {
            v.filter_ = [a = filter_, b = std::move(f)](const Edge& e) { return a(e) && b(e); };
        }
        return v;
    }

    std::vector<NeighborRef> neighbors(NodeId v, Direction dir) const {
        return g_->neighbors_in_window(v, start_, end_, dir, filter_ ? &filter_ : nullptr);
    }

    std::vector<NeighborRef> neighbors(NodeId v, Timestamp up_to, Direction dir) const {
        return g_->neighbors_in_window(v, start_, std::min(end_, up_to), dir,
                                       filter_ ? &filter_ : nullptr);
    }

    bool contains(const Edge& e) const {
        if (e.timestamp < start_ || e.timestamp > end_) return false;
        return !filter_ || filter_(e);
    }

    int edge_count() const {
        int n = 0;
        for (const Edge& e : g_->edges())
            if (contains(e)) ++n;
        return n;
    }

private:
    const TemporalHeteroGraph* g_;
    Timestamp start_;
    Timestamp end_;
    std::function<bool(const Edge&)> filter_;
};

inline GraphView TemporalHeteroGraph::snapshot(Timestamp window_start,
                                               Timestamp window_end) const {
    return GraphView(*this, window_start, window_end);
}

inline GraphView TemporalHeteroGraph::full_view() const {
    return GraphView(*this, 0, std::max<Timestamp>(horizon_, 0));
}

// Equal-width integer partition of [0, horizon] into `count` windows
// (degenerate windows collapse away when count exceeds horizon+1). Windows
// are contiguous, disjoint, and cover the whole range.
inline std::vector<std::pair<Timestamp, Timestamp>> partition_windows(Timestamp horizon,
                                                                      int count) {
    if (horizon < 0) throw DomainError("window partition: negative horizon");
    if (count < 1) throw DomainError("window partition: count must be >= 1");
    std::vector<std::pair<Timestamp, Timestamp>> out;
    const Timestamp n = horizon + 1;
    for (int i = 0; i < count; ++i) {
        const Timestamp start = n * i / count;
        const Timestamp end = n * (i + 1) / count - 1;
        if (start > end) continue;
        out.emplace_back(start, end);
    }
    return out;
}

} // namespace gcrmf
