// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/online.hpp"

namespace gcrmf {

inline constexpr const char* kGraphMagic = "GCRMF-GRAPH-1";

inline nlohmann::json graph_to_json(const TemporalHeteroGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : g.nodes()) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["category"] = to_string(n.category);
        jn["label"] = to_string(n.label);
        jn["first_seen"] = n.first_seen;
        jn["features"] = n.features.raw();
        const std::string& ext = g.external_id(n.id);
        if (!ext.empty()) jn["ext"] = ext;
        nodes.push_back(std::move(jn));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) {
        nlohmann::json je;
        je["id"] = e.id;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["rel"] = to_string(e.relation);
        je["t"] = e.timestamp;
        if (e.amount) je["amount"] = *e.amount;
        edges.push_back(std::move(je));
    }
    nlohmann::json j;
    j["format"] = kGraphMagic;
    j["feature_dim"] = g.feature_dim();
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j;
}

inline TemporalHeteroGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format") || j["format"] != kGraphMagic)
        throw FormatError("graph file: missing or unexpected format header");
    TemporalHeteroGraph g(j.at("feature_dim").get<int>());
    try {
        for (const auto& jn : j.at("nodes")) {
            Tensor f = Tensor::vec(jn.at("features").get<std::vector<double>>());
            NodeId id = g.add_node(parse_category(jn.at("category").get<std::string>()),
                                   std::move(f), parse_label(jn.at("label").get<std::string>()),
                                   jn.at("first_seen").get<Timestamp>(),
                                   jn.value("ext", std::string{}));
            if (id != jn.at("id").get<NodeId>())
                throw FormatError("graph file: node ids must be dense and in order");
        }
        for (const auto& je : j.at("edges")) {
            std::optional<double> amount;
            if (je.contains("amount")) amount = je.at("amount").get<double>();
            EdgeId id = g.add_edge(je.at("src").get<NodeId>(), je.at("dst").get<NodeId>(),
                                   parse_relation(je.at("rel").get<std::string>()),
                                   je.at("t").get<Timestamp>(), amount);
            if (id != je.at("id").get<EdgeId>())
                throw FormatError("graph file: edge ids must be dense and in order");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("graph file: ") + e.what());
    }
    g.validate();
    return g;
}

inline void export_graph(const TemporalHeteroGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("graph file: cannot open for writing: " + path);
    out << graph_to_json(g).dump(1) << '\n';
    if (!out) throw DataError("graph file: write failed: " + path);
}

inline TemporalHeteroGraph import_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("graph file: cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("graph file: invalid JSON: ") + e.what());
    }
    return graph_from_json(j);
}

// ---- ground truth --------------------------------------------------------

struct MotifRecord {
    std::string motif_type; // circular | microburst | layered
    std::vector<NodeId> node_ids;
    std::vector<EdgeId> edge_ids;
};

using GroundTruth = std::vector<MotifRecord>;

inline nlohmann::json truth_to_json(const GroundTruth& gt) {
    nlohmann::json arr = nlohmann::json::array();
    for (const MotifRecord& m : gt) {
        nlohmann::json jm;
        jm["motif_type"] = m.motif_type;
        jm["node_ids"] = m.node_ids;
        jm["edge_ids"] = m.edge_ids;
        arr.push_back(std::move(jm));
    }
    return arr;
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw FormatError("ground truth: expected a JSON array");
    GroundTruth gt;
    for (const auto& jm : j) {
        MotifRecord m;
        m.motif_type = jm.at("motif_type").get<std::string>();
        m.node_ids = jm.at("node_ids").get<std::vector<NodeId>>();
        m.edge_ids = jm.at("edge_ids").get<std::vector<EdgeId>>();
        gt.push_back(std::move(m));
    }
    return gt;
}

inline void save_truth(const GroundTruth& gt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("ground truth: cannot open for writing: " + path);
    out << truth_to_json(gt).dump(1) << '\n';
}

inline GroundTruth load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("ground truth: cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("ground truth: invalid JSON: ") + e.what());
    }
    return truth_from_json(j);
}

// ---- streaming edges (JSON lines) -----------------------------------------

inline StreamEdge parse_stream_line(const std::string& line, int line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("stream line " + std::to_string(line_no) + ": invalid JSON: " +
                          e.what());
    }
    StreamEdge se;
    try {
        se.src = j.at("src").get<NodeId>();
        se.dst = j.at("dst").get<NodeId>();
        se.rel = parse_relation(j.at("rel").get<std::string>());
        se.t = j.at("t").get<Timestamp>();
        if (j.contains("amount")) se.amount = j.at("amount").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("stream line " + std::to_string(line_no) + ": " + e.what());
    }
    return se;
}

inline std::vector<StreamEdge> load_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("stream file: cannot open: " + path);
    std::vector<StreamEdge> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_stream_line(line, line_no));
    }
    return out;
}

inline void save_stream(const std::vector<StreamEdge>& edges, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("stream file: cannot open for writing: " + path);
    for (const StreamEdge& se : edges) {
        nlohmann::json j;
        j["src"] = se.src;
        j["dst"] = se.dst;
        j["rel"] = to_string(se.rel);
        j["t"] = se.t;
        if (se.amount) j["amount"] = *se.amount;
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("stream file: write failed: " + path);
}

} // namespace gcrmf
