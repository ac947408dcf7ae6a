// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"

namespace gcrmf {

// Category/relation assignment for transaction data that carries no service
// metadata: the heaviest fan-in receivers behave like exchanges (Fintech),
// a mid band of high-activity nodes proxies Energy, everything else
// Mobility. Relations are defaulted from the source node's category.
struct ProxyMapConfig {
    double fintech_top_fanin_fraction = 0.10;
    double energy_mid_activity_fraction = 0.30;
    IndustryCategory fallback = IndustryCategory::Mobility;
    RelationType fintech_rel = RelationType::FundTransfer;
    RelationType energy_rel = RelationType::EnergyTrade;
    RelationType mobility_rel = RelationType::FundTransfer;
    RelationType other_rel = RelationType::FundTransfer;

    RelationType relation_for(IndustryCategory src) const {
        switch (src) {
            case IndustryCategory::Fintech: return fintech_rel;
            case IndustryCategory::Energy: return energy_rel;
            case IndustryCategory::Mobility: return mobility_rel;
            case IndustryCategory::Other: return other_rel;
        }
        return other_rel;
    }

    void validate() const {
        if (fintech_top_fanin_fraction < 0.0 || fintech_top_fanin_fraction > 1.0 ||
            energy_mid_activity_fraction < 0.0 || energy_mid_activity_fraction > 1.0 ||
            fintech_top_fanin_fraction + energy_mid_activity_fraction > 1.0)
            throw ConfigError("proxy map: fractions must be in [0,1] and sum to <= 1");
    }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& file, int line_no) {
    double v = 0.0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
        throw FormatError(file + " line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s, const std::string& file, int line_no) {
    long long v = 0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
        throw FormatError(file + " line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    return v;
}

inline bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if ((c < '0' || c > '9') && c != '-' && c != '+' && c != '.') return false;
    return true;
}

} // namespace detail

struct EllipticPaths {
    std::string features_csv;
    std::string edgelist_csv;
    std::string classes_csv;

    static EllipticPaths in_dir(const std::string& dir) {
        EllipticPaths p;
        p.features_csv = dir + "/elliptic_txs_features.csv";
        p.edgelist_csv = dir + "/elliptic_txs_edgelist.csv";
        p.classes_csv = dir + "/elliptic_txs_classes.csv";
        return p;
    }
};

// Transaction bundle loader. Features file: tx_id, time_step, values...
// (width fixed by the first row). Classes file: tx_id, {1|2|unknown}.
// Edgelist: src_tx, dst_tx; each row becomes one directed edge stamped with
// the source transaction's time step. Industry categories per ProxyMapConfig.
inline TemporalHeteroGraph load_elliptic(const EllipticPaths& paths,
                                         const ProxyMapConfig& proxy = {}) {
    proxy.validate();

    struct Row {
        long long tx;
        Timestamp ts;
        std::vector<double> feat;
    };
    std::vector<Row> rows;
    int feature_dim = -1;
    {
        std::ifstream in(paths.features_csv);
        if (!in) throw DataError("cannot open " + paths.features_csv);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto f = detail::split_csv(line);
            if (line_no == 1 && !detail::looks_numeric(f[0])) continue; // optional header
            if (f.size() < 3)
                throw FormatError(paths.features_csv + " line " + std::to_string(line_no) +
                                  ": expected tx_id, time_step, features");
            Row r;
            r.tx = detail::parse_int(f[0], paths.features_csv, line_no);
            r.ts = static_cast<Timestamp>(
                detail::parse_double(f[1], paths.features_csv, line_no));
            if (r.ts < 0)
                throw FormatError(paths.features_csv + " line " + std::to_string(line_no) +
                                  ": negative time step");
            for (std::size_t i = 2; i < f.size(); ++i)
                r.feat.push_back(detail::parse_double(f[i], paths.features_csv, line_no));
            if (feature_dim < 0) feature_dim = static_cast<int>(r.feat.size());
            if (static_cast<int>(r.feat.size()) != feature_dim)
                throw FormatError(paths.features_csv + " line " + std::to_string(line_no) +
                                  ": inconsistent feature width");
            rows.push_back(std::move(r));
        }
    }
    if (rows.empty()) throw DataError(paths.features_csv + ": no data rows");

    std::map<long long, int> tx_index;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto [it, fresh] = tx_index.emplace(rows[i].tx, static_cast<int>(i));
        if (!fresh)
            throw DataError(paths.features_csv + ": duplicate transaction id " +
                            std::to_string(rows[i].tx));
    }

    std::map<long long, NodeLabel> classes;
    {
        std::ifstream in(paths.classes_csv);
        if (!in) throw DataError("cannot open " + paths.classes_csv);
        std::string line;
        int line_no = 0;
        std::vector<long long> dangling;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto f = detail::split_csv(line);
            if (line_no == 1 && !detail::looks_numeric(f[0])) continue;
            if (f.size() != 2)
                throw FormatError(paths.classes_csv + " line " + std::to_string(line_no) +
                                  ": expected tx_id, class");
            const long long tx = detail::parse_int(f[0], paths.classes_csv, line_no);
            NodeLabel label;
            if (f[1] == "1") label = NodeLabel::Illicit;
            else if (f[1] == "2") label = NodeLabel::Licit;
            else if (f[1] == "unknown") label = NodeLabel::Unknown;
            else
                throw FormatError(paths.classes_csv + " line " + std::to_string(line_no) +
                                  ": unknown class '" + f[1] + "'");
            if (!tx_index.count(tx)) dangling.push_back(tx);
            else classes[tx] = label;
        }
        if (!dangling.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < dangling.size() && i < 5; ++i)
                ids += (i ? ", " : "") + std::to_string(dangling[i]);
            throw DataError(paths.classes_csv + ": " + std::to_string(dangling.size()) +
                            " class rows reference unknown transactions (" + ids + ")");
        }
    }

    struct Pair {
        int src;
        int dst;
    };
    std::vector<Pair> pairs;
    {
        std::ifstream in(paths.edgelist_csv);
        if (!in) throw DataError("cannot open " + paths.edgelist_csv);
        std::string line;
        int line_no = 0;
        std::vector<long long> dangling;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto f = detail::split_csv(line);
            if (line_no == 1 && !detail::looks_numeric(f[0])) continue;
            if (f.size() != 2)
                throw FormatError(paths.edgelist_csv + " line " + std::to_string(line_no) +
                                  ": expected src_tx, dst_tx");
            const long long a = detail::parse_int(f[0], paths.edgelist_csv, line_no);
            const long long b = detail::parse_int(f[1], paths.edgelist_csv, line_no);
            const auto ia = tx_index.find(a);
            const auto ib = tx_index.find(b);
            if (ia == tx_index.end()) dangling.push_back(a);
            if (ib == tx_index.end()) dangling.push_back(b);
            if (ia != tx_index.end() && ib != tx_index.end())
                pairs.push_back(Pair{ia->second, ib->second});
        }
        if (!dangling.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < dangling.size() && i < 5; ++i)
                ids += (i ? ", " : "") + std::to_string(dangling[i]);
            throw DataError(paths.edgelist_csv + ": " + std::to_string(dangling.size()) +
                            " edge endpoints missing from features (" + ids + ")");
        }
    }

    // proxy categories from connectivity: rank nodes by fan-in for the
    // Fintech band, then by total degree for the Energy band
    const int n = static_cast<int>(rows.size());
    std::vector<int> fan_in(static_cast<std::size_t>(n), 0), total(static_cast<std::size_t>(n), 0);
    for (const Pair& p : pairs) {
        fan_in[static_cast<std::size_t>(p.dst)] += 1;
        total[static_cast<std::size_t>(p.dst)] += 1;
        total[static_cast<std::size_t>(p.src)] += 1;
    }
    std::vector<IndustryCategory> category(static_cast<std::size_t>(n), proxy.fallback);
    {
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (fan_in[static_cast<std::size_t>(a)] != fan_in[static_cast<std::size_t>(b)])
                return fan_in[static_cast<std::size_t>(a)] > fan_in[static_cast<std::size_t>(b)];
            return a < b;
        });
        const int n_fin = static_cast<int>(proxy.fintech_top_fanin_fraction * n);
        for (int i = 0; i < n_fin; ++i)
            category[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
                IndustryCategory::Fintech;
        std::vector<int> rest(order.begin() + n_fin, order.end());
        std::sort(rest.begin(), rest.end(), [&](int a, int b) {
            if (total[static_cast<std::size_t>(a)] != total[static_cast<std::size_t>(b)])
                return total[static_cast<std::size_t>(a)] > total[static_cast<std::size_t>(b)];
            return a < b;
        });
        const int n_energy = static_cast<int>(proxy.energy_mid_activity_fraction * n);
        for (int i = 0; i < n_energy && i < static_cast<int>(rest.size()); ++i)
            category[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])] =
                IndustryCategory::Energy;
    }

    TemporalHeteroGraph g(feature_dim);
    for (int i = 0; i < n; ++i) {
        const Row& r = rows[static_cast<std::size_t>(i)];
        NodeLabel label = NodeLabel::Unknown;
        auto it = classes.find(r.tx);
        if (it != classes.end()) label = it->second;
        g.add_node(category[static_cast<std::size_t>(i)], Tensor::vec(r.feat), label, r.ts,
                   std::to_string(r.tx));
    }
    for (const Pair& p : pairs) {
        const Timestamp t = g.node(p.src).first_seen;
        g.add_edge(p.src, p.dst, proxy.relation_for(g.node(p.src).category), t);
    }
    g.freeze();
    return g;
}

} // namespace gcrmf
