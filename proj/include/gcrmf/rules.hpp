// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"

namespace gcrmf {

struct Rule {
    enum class Kind { Cycle, FanInBurst, AmountThreshold, LayeredChain };
    Kind kind = Kind::Cycle;
    double weight = 1.0;
    // cycle
    int max_len = 5;
    // fan-in burst
    int min_count = 20;
    double max_amount = 1000.0;
    Timestamp window = 10;
    // amount threshold
    double min_amount = 50000.0;
    // layered chain
    int min_len = 4;
    double decay_lo = 0.88;
    double decay_hi = 0.96;
};

struct RuleSet {
    std::vector<Rule> rules;

    void validate() const {
        for (const Rule& r : rules) {
            if (r.weight < 0.0) throw ConfigError("rules: weight must be >= 0");
            switch (r.kind) {
                case Rule::Kind::Cycle:
                    if (r.max_len < 2) throw ConfigError("rules: cycle max_len must be >= 2");
                    break;
                case Rule::Kind::FanInBurst:
                    if (r.min_count < 1 || r.max_amount <= 0.0 || r.window < 1)
                        throw ConfigError("rules: burst parameters must be positive");
                    break;
                case Rule::Kind::AmountThreshold:
                    if (r.min_amount <= 0.0)
                        throw ConfigError("rules: amount threshold must be positive");
                    break;
                case Rule::Kind::LayeredChain:
                    if (r.min_len < 2 || r.decay_lo <= 0.0 || r.decay_hi < r.decay_lo ||
                        r.decay_hi >= 1.0)
                        throw ConfigError("rules: layered chain parameters invalid");
                    break;
            }
        }
    }

    double total_weight() const {
        double s = 0.0;
        for (const Rule& r : rules) s += r.weight;
        return s;
    }
};

inline nlohmann::json rules_to_json(const RuleSet& rs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Rule& r : rs.rules) {
        nlohmann::json j;
        j["weight"] = r.weight;
        switch (r.kind) {
            case Rule::Kind::Cycle:
                j["kind"] = "cycle";
                j["max_len"] = r.max_len;
                break;
            case Rule::Kind::FanInBurst:
                j["kind"] = "fan_in_burst";
                j["min_count"] = r.min_count;
                j["max_amount"] = r.max_amount;
                j["window"] = r.window;
                break;
            case Rule::Kind::AmountThreshold:
                j["kind"] = "amount_threshold";
                j["min"] = r.min_amount;
                break;
            case Rule::Kind::LayeredChain:
                j["kind"] = "layered_chain";
                j["min_len"] = r.min_len;
                j["decay_lo"] = r.decay_lo;
                j["decay_hi"] = r.decay_hi;
                break;
        }
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"rules", std::move(arr)}};
}

inline RuleSet rules_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
        throw FormatError("rules file: expected an object with a 'rules' array");
    RuleSet rs;
    for (const auto& je : j["rules"]) {
        Rule r;
        r.weight = je.value("weight", 1.0);
        const std::string kind = je.at("kind").get<std::string>();
        if (kind == "cycle") {
            r.kind = Rule::Kind::Cycle;
            r.max_len = je.at("max_len").get<int>();
        } else if (kind == "fan_in_burst") {
            r.kind = Rule::Kind::FanInBurst;
            r.min_count = je.at("min_count").get<int>();
            r.max_amount = je.at("max_amount").get<double>();
            r.window = je.at("window").get<Timestamp>();
        } else if (kind == "amount_threshold") {
            r.kind = Rule::Kind::AmountThreshold;
            r.min_amount = je.at("min").get<double>();
        } else if (kind == "layered_chain") {
            r.kind = Rule::Kind::LayeredChain;
            r.min_len = je.at("min_len").get<int>();
            r.decay_lo = je.at("decay_lo").get<double>();
            r.decay_hi = je.at("decay_hi").get<double>();
        } else {
            throw FormatError("rules file: unknown rule kind '" + kind + "'");
        }
        rs.rules.push_back(r);
    }
    rs.validate();
    return rs;
}

inline void save_rules(const RuleSet& rs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("rules file: cannot open for writing: " + path);
    out << rules_to_json(rs).dump(1) << '\n';
}

inline RuleSet load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("rules file: cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("rules file: invalid JSON: ") + e.what());
    }
    return rules_from_json(j);
}

struct RuleMatchResult {
    // score = sum of triggered rule weights; ranked descending, id tie-break
    std::vector<std::pair<NodeId, double>> ranked;
    std::vector<std::set<NodeId>> triggered; // per rule, in ruleset order
};

namespace detail {

// Bounded DFS over out-edges with nondecreasing timestamps. `on_path` is
// called when the walk returns to `start` (cycle mode) or when the path
// reaches the required length (chain mode). The step budget bounds blowup on
// adversarial graphs; planted patterns sit far below it.
inline constexpr long kRuleDfsBudget = 200000;

inline void monotone_cycle_dfs(const GraphView& view, NodeId start, int max_len,
                               std::set<NodeId>& marked) {
    std::vector<NodeId> path{start};
    long budget = kRuleDfsBudget;
    std::function<void(NodeId, Timestamp, int)> go = [&](NodeId v, Timestamp min_t, int depth) {
        if (budget-- <= 0) return;
        if (depth >= max_len) return;
        for (const NeighborRef& nb : view.neighbors(v, Direction::Out)) {
            if (nb.timestamp < min_t) continue;
            if (nb.neighbor == start) {
                if (depth + 1 >= 2) marked.insert(path.begin(), path.end());
                continue;
            }
            if (std::find(path.begin(), path.end(), nb.neighbor) != path.end()) continue;
            path.push_back(nb.neighbor);
            go(nb.neighbor, nb.timestamp, depth + 1);
            path.pop_back();
        }
    };
    go(start, view.window_start(), 0);
}

inline void layered_chain_dfs(const GraphView& view, NodeId start, const Rule& r,
                              std::set<NodeId>& marked) {
    std::vector<NodeId> path{start};
    long budget = kRuleDfsBudget;
    std::function<void(NodeId, Timestamp, double, int)> go = [&](NodeId v, Timestamp min_t,
                                                                 double prev_amount, int depth) {
        if (budget-- <= 0) return;
        for (const NeighborRef& nb : view.neighbors(v, Direction::Out)) {
            if (nb.timestamp < min_t) continue;
            const Edge& e = view.edge(nb.edge);
            if (!e.amount) continue;
            if (depth > 0) {
                const double ratio = *e.amount / prev_amount;
                if (ratio < r.decay_lo || ratio > r.decay_hi) continue;
            }
            if (std::find(path.begin(), path.end(), nb.neighbor) != path.end()) continue;
            path.push_back(nb.neighbor);
            if (depth + 1 >= r.min_len) marked.insert(path.begin(), path.end());
            go(nb.neighbor, nb.timestamp, *e.amount, depth + 1);
            path.pop_back();
        }
    };
    go(start, view.window_start(), 0.0, 0);
}

} // namespace detail

inline RuleMatchResult rulematch_score(const GraphView& view, const RuleSet& rs) {
    rs.validate();
    if (!view.graph().frozen()) throw StateError("rulematch: graph must be frozen");
    RuleMatchResult result;
    result.triggered.resize(rs.rules.size());
    const int n = view.node_count();

    for (std::size_t ri = 0; ri < rs.rules.size(); ++ri) {
        const Rule& r = rs.rules[ri];
        std::set<NodeId>& hit = result.triggered[ri];
        switch (r.kind) {
            case Rule::Kind::Cycle: {
                for (NodeId v = 0; v < n; ++v)
                    detail::monotone_cycle_dfs(view, v, r.max_len, hit);
                break;
            }
            case Rule::Kind::FanInBurst: {
                for (NodeId v = 0; v < n; ++v) {
                    std::map<Timestamp, int> buckets;
                    for (const NeighborRef& nb : view.neighbors(v, Direction::In)) {
                        const Edge& e = view.edge(nb.edge);
                        if (!e.amount || *e.amount > r.max_amount) continue;
                        buckets[nb.timestamp / r.window] += 1;
                    }
                    for (const auto& [w, c] : buckets)
                        if (c >= r.min_count) {
                            hit.insert(v);
                            break;
                        }
                }
                break;
            }
            case Rule::Kind::AmountThreshold: {
                for (const Edge& e : view.graph().edges()) {
                    if (!view.contains(e)) continue;
                    if (e.amount && *e.amount >= r.min_amount) {
                        hit.insert(e.src);
                        hit.insert(e.dst);
                    }
                }
                break;
            }
            case Rule::Kind::LayeredChain: {
                for (NodeId v = 0; v < n; ++v)
                    detail::layered_chain_dfs(view, v, r, hit);
                break;
            }
        }
    }

    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    for (std::size_t ri = 0; ri < rs.rules.size(); ++ri)
        for (NodeId v : result.triggered[ri])
            score[static_cast<std::size_t>(v)] += rs.rules[ri].weight;
    result.ranked.reserve(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) result.ranked.emplace_back(v, score[static_cast<std::size_t>(v)]);
    std::sort(result.ranked.begin(), result.ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return result;
}

// rule parameters that mirror a generator configuration, for the
// matched-rules demonstration
template <class Spec>
inline RuleSet matched_rules(const Spec& spec) {
    RuleSet rs;
    Rule cycle;
    cycle.kind = Rule::Kind::Cycle;
    cycle.max_len = spec.cycle_len_max;
    cycle.weight = 1.0;
    rs.rules.push_back(cycle);

    Rule burst;
    burst.kind = Rule::Kind::FanInBurst;
    burst.min_count = spec.burst_min_count;
    burst.max_amount = spec.burst_max_amount;
    burst.window = spec.steps_per_window;
    burst.weight = 1.0;
    rs.rules.push_back(burst);

    Rule chain;
    chain.kind = Rule::Kind::LayeredChain;
    chain.min_len = spec.layer_chain_min;
    chain.decay_lo = 1.0 - 1.05 * spec.layer_decay;
    chain.decay_hi = 1.0 - 0.95 * spec.layer_decay;
    chain.weight = 1.0;
    rs.rules.push_back(chain);

    Rule amount;
    amount.kind = Rule::Kind::AmountThreshold;
    amount.min_amount = 50000.0;
    amount.weight = 0.25;
    rs.rules.push_back(amount);

    rs.validate();
    return rs;
}

} // namespace gcrmf
