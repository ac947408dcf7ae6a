// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"

namespace gcrmf {

struct BinaryStats {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, fpr = 0.0;
};

// Zero-denominator conventions: precision is 0 with no predicted positives,
// recall is 0 with no actual positives, f1 is 0 when precision+recall is 0,
// fpr is 0 with no actual negatives.
inline BinaryStats confusion_stats(int tp, int fp, int tn, int fn) {
    if (tp < 0 || fp < 0 || tn < 0 || fn < 0)
        throw DomainError("metrics: negative confusion count");
    BinaryStats s;
    s.tp = tp;
    s.fp = fp;
    s.tn = tn;
    s.fn = fn;
    s.precision = (tp + fp > 0) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    s.recall = (tp + fn > 0) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall > 0.0)
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    s.fpr = (fp + tn > 0) ? static_cast<double>(fp) / (fp + tn) : 0.0;
    return s;
}

inline BinaryStats evaluate_binary(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw DimensionError("metrics: label/prediction length mismatch");
    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1))
            throw DomainError("metrics: labels must be 0 or 1");
        if (t == 1 && p == 1)
            ++tp;
        else if (t == 0 && p == 1)
            ++fp;
        else if (t == 0 && p == 0)
            ++tn;
        else
            ++fn;
    }
    return confusion_stats(tp, fp, tn, fn);
}

struct PrecisionAtK {
    double threshold = 0.0;
    int k = 0;               // number of scored nodes at or above the threshold
    double precision = 0.0;  // meaningless when !valid
    bool valid = false;      // false when the threshold selects nothing
};

// `scored` carries (node, score) for the evaluation universe; `positives`
// must be a subset of that universe. K is the count of scores >= threshold.
inline PrecisionAtK precision_at_k(const std::vector<std::pair<NodeId, double>>& scored,
                                   const std::vector<NodeId>& positives, double threshold) {
    std::vector<NodeId> universe;
    universe.reserve(scored.size());
    for (const auto& [id, s] : scored) universe.push_back(id);
    std::sort(universe.begin(), universe.end());
    if (std::adjacent_find(universe.begin(), universe.end()) != universe.end())
        throw DataError("metrics: duplicate node in scored set");
    for (NodeId p : positives)
        if (!std::binary_search(universe.begin(), universe.end(), p))
            throw DataError("metrics: positive node missing from scored set");

    PrecisionAtK out;
    out.threshold = threshold;
    int hits = 0;
    std::vector<NodeId> pos_sorted = positives;
    std::sort(pos_sorted.begin(), pos_sorted.end());
    for (const auto& [id, s] : scored) {
        if (s < threshold) continue;
        ++out.k;
        if (std::binary_search(pos_sorted.begin(), pos_sorted.end(), id)) ++hits;
    }
    if (out.k > 0) {
        out.valid = true;
        out.precision = static_cast<double>(hits) / out.k;
    }
    return out;
}

struct BoxStats {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// linear-interpolation quantiles over the sorted sample
inline BoxStats box_stats(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("metrics: box stats of an empty sample");
    std::sort(xs.begin(), xs.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(xs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return xs[lo] + (xs[hi] - xs[lo]) * frac;
    };
    BoxStats b;
    b.min = xs.front();
    b.q1 = quantile(0.25);
    b.median = quantile(0.5);
    b.q3 = quantile(0.75);
    b.max = xs.back();
    return b;
}

struct WindowMetrics {
    int window = 0;
    Timestamp start = 0, end = 0;
    int n_scored = 0;
    BinaryStats stats;
};

struct EvalReport {
    std::string method;
    std::uint64_t seed = 0;
    std::string config_hash;
    double decision_threshold = 0.5;
    BinaryStats headline; // all test nodes at the final horizon
    std::vector<WindowMetrics> windows;
    std::vector<PrecisionAtK> at_k;
};

inline nlohmann::json stats_to_json(const BinaryStats& s) {
    return nlohmann::json{{"tp", s.tp},           {"fp", s.fp},
                          {"tn", s.tn},           {"fn", s.fn},
                          {"precision", s.precision}, {"recall", s.recall},
                          {"f1", s.f1},           {"fpr", s.fpr}};
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["decision_threshold"] = r.decision_threshold;
    j["headline"] = stats_to_json(r.headline);
    nlohmann::json jw = nlohmann::json::array();
    for (const WindowMetrics& w : r.windows) {
        nlohmann::json e;
        e["window"] = w.window;
        e["start"] = w.start;
        e["end"] = w.end;
        e["n_scored"] = w.n_scored;
        e["stats"] = stats_to_json(w.stats);
        jw.push_back(std::move(e));
    }
    j["windows"] = std::move(jw);
    nlohmann::json jk = nlohmann::json::array();
    for (const PrecisionAtK& p : r.at_k) {
        nlohmann::json e;
        e["threshold"] = p.threshold;
        e["k"] = p.k;
        if (p.valid)
            e["precision"] = p.precision;
        else
            e["precision"] = nullptr;
        jk.push_back(std::move(e));
    }
    j["precision_at_k"] = std::move(jk);
    return j;
}

} // namespace gcrmf
