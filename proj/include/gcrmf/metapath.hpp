// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/rng.hpp"

namespace gcrmf {

// Typed multi-hop route schema: categories[0] -r0-> categories[1] -r1-> ...
struct MetaPath {
    std::vector<IndustryCategory> categories; // length L+1
    std::vector<RelationType> relations;      // length L

    int length() const { return static_cast<int>(relations.size()); }

    // alternating category/relation strings, e.g.
    // ["Mobility","FundTransfer","Fintech","FundTransfer","Energy"]
    static MetaPath from_strings(const std::vector<std::string>& steps) {
        if (steps.size() < 3 || steps.size() % 2 == 0)
            throw FormatError("meta-path: need an odd-length alternating step list of >= 3");
        MetaPath mp;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (i % 2 == 0)
                mp.categories.push_back(parse_category(steps[i]));
            else
                mp.relations.push_back(parse_relation(steps[i]));
        }
        return mp;
    }

    std::vector<std::string> to_strings() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < relations.size(); ++i) {
            out.push_back(to_string(categories[i]));
            out.push_back(to_string(relations[i]));
        }
        out.push_back(to_string(categories.back()));
        return out;
    }
};

inline std::vector<MetaPath> default_metapaths() {
    return {
        MetaPath::from_strings({"Mobility", "FundTransfer", "Fintech", "FundTransfer", "Energy"}),
        MetaPath::from_strings({"Mobility", "RentalContract", "Mobility", "Settlement", "Fintech"}),
        MetaPath::from_strings({"Fintech", "CreditIssue", "Energy", "EnergyTrade", "Fintech"}),
    };
}

inline nlohmann::json metapaths_to_json(const std::vector<MetaPath>& mps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const MetaPath& mp : mps) arr.push_back(mp.to_strings());
    return arr;
}

inline std::vector<MetaPath> metapaths_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty())
        throw FormatError("meta-path file: expected a non-empty JSON array");
    std::vector<MetaPath> out;
    for (const auto& steps : j) {
        if (!steps.is_array()) throw FormatError("meta-path file: each entry must be an array");
        out.push_back(MetaPath::from_strings(steps.get<std::vector<std::string>>()));
    }
    return out;
}

inline std::vector<MetaPath> load_metapaths(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("meta-path file: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("meta-path file: invalid JSON: ") + e.what());
    }
    return metapaths_from_json(j);
}

inline void save_metapaths(const std::vector<MetaPath>& mps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("meta-path file: cannot open for writing " + path);
    out << metapaths_to_json(mps).dump(1) << '\n';
}

// Concrete realization of a schema in the graph.
struct PathInstance {
    std::vector<NodeId> node_ids; // length L+1, node_ids[0] = anchor
    std::vector<EdgeId> edge_ids; // length L
};

inline bool operator==(const PathInstance& a, const PathInstance& b) {
    return a.node_ids == b.node_ids && a.edge_ids == b.edge_ids;
}

inline bool operator<(const PathInstance& a, const PathInstance& b) {
    if (a.node_ids != b.node_ids) return a.node_ids < b.node_ids;
    return a.edge_ids < b.edge_ids;
}

// Re-check a claimed instance against its schema: connectivity, categories,
// relations, nondecreasing timestamps along the hops.
inline bool instance_matches(const GraphView& view, const MetaPath& mp, const PathInstance& pi,
                             Timestamp up_to) {
    const std::size_t L = mp.relations.size();
    if (pi.node_ids.size() != L + 1 || pi.edge_ids.size() != L) return false;
    Timestamp prev = view.window_start();
    for (std::size_t i = 0; i <= L; ++i) {
        if (view.node(pi.node_ids[i]).category != mp.categories[i]) return false;
    }
    for (std::size_t i = 0; i < L; ++i) {
        const Edge& e = view.edge(pi.edge_ids[i]);
        if (e.src != pi.node_ids[i] || e.dst != pi.node_ids[i + 1]) return false;
        if (e.relation != mp.relations[i]) return false;
        if (e.timestamp < prev || e.timestamp > up_to || e.timestamp > view.window_end())
            return false;
        prev = e.timestamp;
    }
    return true;
}

inline constexpr int kUncapped = std::numeric_limits<int>::max();

// All (or a deterministic per-hop sample of) schema realizations starting at
// `anchor`, following out-edges with nondecreasing timestamps <= up_to.
// With caps that never bind the result is the exhaustive set in (timestamp,
// edge-id)-lexicographic DFS order.
inline std::vector<PathInstance> enumerate_instances(const GraphView& view, const MetaPath& mp,
                                                     NodeId anchor, Timestamp up_to,
                                                     int max_per_hop, int max_total,
                                                     std::uint64_t seed) {
    if (max_per_hop < 1 || max_total < 1)
        throw DomainError("meta-path enumeration: caps must be >= 1");
    std::vector<PathInstance> out;
    if (view.node(anchor).category != mp.categories[0]) return out;

    auto rng = make_rng(mix_seed(seed, {static_cast<std::uint64_t>(anchor)}));
    const std::size_t L = mp.relations.size();
    std::vector<NodeId> nodes{anchor};
    std::vector<EdgeId> edges;

    // depth-first over hops; hop k extends with out-edges of the current
    // tail matching relation/category k and timestamp >= previous hop's
    std::function<void(std::size_t, Timestamp)> walk = [&](std::size_t hop, Timestamp min_t) {
        if (static_cast<int>(out.size()) >= max_total) return;
        if (hop == L) {
            out.push_back(PathInstance{nodes, edges});
            return;
        }
        std::vector<NeighborRef> cands;
        for (const NeighborRef& nb : view.neighbors(nodes.back(), up_to, Direction::Out)) {
            if (nb.timestamp < min_t) continue;
            const Edge& e = view.edge(nb.edge);
            if (e.relation != mp.relations[hop]) continue;
            if (view.node(nb.neighbor).category != mp.categories[hop + 1]) continue;
            cands.push_back(nb);
        }
        if (static_cast<int>(cands.size()) > max_per_hop) {
            // uniform without replacement, then restored to time order so the
            // traversal stays deterministic
            std::vector<std::size_t> idx(cands.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            for (int k = 0; k < max_per_hop; ++k) {
                const std::size_t j =
                    k + static_cast<std::size_t>(rng() % (idx.size() - static_cast<std::size_t>(k)));
                std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
            }
            idx.resize(static_cast<std::size_t>(max_per_hop));
            std::sort(idx.begin(), idx.end());
            std::vector<NeighborRef> chosen;
            chosen.reserve(idx.size());
            for (std::size_t i : idx) chosen.push_back(cands[i]);
            cands = std::move(chosen);
        }
        for (const NeighborRef& nb : cands) {
            if (static_cast<int>(out.size()) >= max_total) return;
            nodes.push_back(nb.neighbor);
            edges.push_back(nb.edge);
            walk(hop + 1, nb.timestamp);
            nodes.pop_back();
            edges.pop_back();
        }
    };
    walk(0, view.window_start());
    return out;
}

} // namespace gcrmf
