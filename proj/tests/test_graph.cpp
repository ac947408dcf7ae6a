// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"

#include "test_support.hpp"

using namespace gcrmf;

namespace {

TemporalHeteroGraph tiny_graph() {
    TemporalHeteroGraph g(2);
    for (int i = 0; i < 4; ++i)
        g.add_node(IndustryCategory::Fintech, Tensor::vec({double(i), 1.0}), NodeLabel::Unknown,
                   0);
    g.add_edge(0, 1, RelationType::FundTransfer, 5, 10.0);
    g.add_edge(1, 2, RelationType::Settlement, 3);
    g.add_edge(2, 0, RelationType::FundTransfer, 5, 20.0); // ties with edge 0 on t
    g.add_edge(3, 3, RelationType::CreditIssue, 7, 1.0);   // self-loop
    return g;
}

} // namespace

TEST_CASE("node ids are dense and insertion ordered") {
    TemporalHeteroGraph g(3);
    for (int i = 0; i < 5; ++i) {
        NodeId id = g.add_node(IndustryCategory::Energy, Tensor::zeros_vec(3),
                               NodeLabel::Licit, i);
        CHECK(id == i);
    }
    CHECK(g.node_count() == 5);
    CHECK(g.node(3).first_seen == 3);
    CHECK(g.time_horizon() == 4); // horizon tracks first_seen too
}

TEST_CASE("construction rejects malformed input") {
    CHECK_THROWS_AS(TemporalHeteroGraph(0), DomainError);
    TemporalHeteroGraph g(2);
    CHECK_THROWS_AS(
        g.add_node(IndustryCategory::Other, Tensor::zeros_vec(3), NodeLabel::Unknown, 0),
        DimensionError);
    CHECK_THROWS_AS(
        g.add_node(IndustryCategory::Other, Tensor::zeros_vec(2), NodeLabel::Unknown, -1),
        DomainError);
    g.add_node(IndustryCategory::Other, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    CHECK_THROWS_AS(g.add_edge(0, 5, RelationType::Settlement, 1), MissingNodeError);
    CHECK_THROWS_AS(g.add_edge(5, 0, RelationType::Settlement, 1), MissingNodeError);
    CHECK_THROWS_AS(g.add_edge(0, 0, RelationType::Settlement, -2), DomainError);
    CHECK_THROWS_AS(g.add_edge(0, 0, RelationType::Settlement, 1, -5.0), DomainError);
    CHECK_THROWS_AS(g.node(9), MissingNodeError);
    CHECK_THROWS_AS(g.edge(0), MissingNodeError);
}

TEST_CASE("duplicate external ids are rejected") {
    TemporalHeteroGraph g(1);
    g.add_node(IndustryCategory::Other, Tensor::zeros_vec(1), NodeLabel::Unknown, 0, "tx1");
    CHECK_THROWS_AS(
        g.add_node(IndustryCategory::Other, Tensor::zeros_vec(1), NodeLabel::Unknown, 0, "tx1"),
        DataError);
    CHECK(g.node_by_external("tx1") == NodeId{0});
    CHECK_FALSE(g.node_by_external("absent").has_value());
}

TEST_CASE("neighbors are ordered by timestamp then edge id") {
    auto g = tiny_graph();
    auto nbs = g.neighbors(0, 10, Direction::Both);
    REQUIRE(nbs.size() == 2);
    // edge 0 (t=5, out) precedes edge 2 (t=5, in): ids break the tie
    CHECK(nbs[0].edge == 0);
    CHECK(nbs[0].neighbor == 1);
    CHECK(nbs[1].edge == 2);
    CHECK(nbs[1].neighbor == 2);

    auto outs = g.neighbors(0, 10, Direction::Out);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].edge == 0);
    auto ins = g.neighbors(0, 10, Direction::In);
    REQUIRE(ins.size() == 1);
    CHECK(ins[0].edge == 2);
}

TEST_CASE("self-loops appear once under Both") {
    auto g = tiny_graph();
    auto nbs = g.neighbors(3, 10, Direction::Both);
    REQUIRE(nbs.size() == 1);
    CHECK(nbs[0].neighbor == 3);
    CHECK(nbs[0].edge == 3);
}

TEST_CASE("time cutoff is inclusive and monotone") {
    auto g = tiny_graph();
    CHECK(g.neighbors(1, 2, Direction::Both).empty());
    CHECK(g.neighbors(1, 3, Direction::Both).size() == 1);
    CHECK(g.neighbors(1, 5, Direction::Both).size() == 2);
    std::size_t prev = 0;
    for (Timestamp t = 0; t <= g.time_horizon(); ++t) {
        const std::size_t n = g.neighbors(1, t, Direction::Both).size();
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("neighbor queries match the scan reference on random graphs") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        support::RandomGraphSpec spec;
        spec.nodes = 8 + static_cast<int>(seed % 5);
        spec.edges = 40;
        auto g = support::random_graph(seed, spec);
        for (Direction dir : {Direction::In, Direction::Out, Direction::Both}) {
            for (NodeId v = 0; v < g.node_count(); ++v) {
                for (Timestamp t : {Timestamp{0}, Timestamp{7}, g.time_horizon()}) {
                    auto got = g.neighbors(v, t, dir);
                    auto want = oracle::neighbor_scan(g, v, 0, t, dir);
                    REQUIRE(got.size() == want.size());
                    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
                }
            }
        }
    }
}

TEST_CASE("windowed views restrict by window and filter") {
    auto g = tiny_graph();
    GraphView w = g.snapshot(4, 6);
    CHECK(w.edge_count() == 2); // the two t=5 edges
    auto nbs = w.neighbors(0, Direction::Both);
    CHECK(nbs.size() == 2);
    CHECK(w.neighbors(1, Direction::Both).size() == 1); // t=3 edge excluded

    GraphView only_ft = w.with_edge_filter(
        [](const Edge& e) { return e.relation == RelationType::FundTransfer; });
    CHECK(only_ft.edge_count() == 2);
    GraphView also_big = only_ft.with_edge_filter(
        [](const Edge& e) { return e.amount && *e.amount > 15.0; });
    CHECK(also_big.edge_count() == 1); // filters compose with AND
    auto filtered = also_big.neighbors(0, Direction::Both);
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].edge == 2);

    CHECK(also_big.contains(g.edge(2)));
    CHECK_FALSE(also_big.contains(g.edge(0))); // amount too small
    CHECK_FALSE(w.contains(g.edge(1)));        // outside window
}

TEST_CASE("views reject inverted or negative windows") {
    auto g = tiny_graph();
    CHECK_THROWS_AS(g.snapshot(5, 4), DomainError);
    CHECK_THROWS_AS(g.snapshot(-1, 4), DomainError);
}

TEST_CASE("window partition covers the horizon exactly") {
    for (Timestamp horizon : {Timestamp{0}, Timestamp{3}, Timestamp{9}, Timestamp{47}}) {
        for (int count : {1, 2, 5, 13}) {
            auto windows = partition_windows(horizon, count);
            REQUIRE(!windows.empty());
            CHECK(windows.front().first == 0);
            CHECK(windows.back().second == horizon);
            for (std::size_t i = 0; i < windows.size(); ++i) {
                CHECK(windows[i].first <= windows[i].second);
                if (i > 0) CHECK(windows[i].first == windows[i - 1].second + 1);
            }
        }
    }
    CHECK_THROWS_AS(partition_windows(-1, 3), DomainError);
    CHECK_THROWS_AS(partition_windows(5, 0), DomainError);
}

TEST_CASE("window snapshots add up to the full view") {
    auto g = support::random_graph(77, {});
    const auto windows = partition_windows(g.time_horizon(), 4);
    int total = 0;
    std::set<EdgeId> seen;
    for (const auto& [a, b] : windows) {
        GraphView w = g.snapshot(a, b);
        total += w.edge_count();
        for (const Edge& e : g.edges())
            if (w.contains(e)) CHECK(seen.insert(e.id).second); // disjoint
    }
    CHECK(total == g.full_view().edge_count());
    CHECK(static_cast<int>(seen.size()) == total);
}

TEST_CASE("freeze flips the flag and validate accepts sane graphs") {
    auto g = tiny_graph();
    CHECK_FALSE(g.frozen());
    g.freeze();
    CHECK(g.frozen());
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("edges keep optional amounts") {
    auto g = tiny_graph();
    CHECK(g.edge(0).amount.has_value());
    CHECK(*g.edge(0).amount == 10.0);
    CHECK_FALSE(g.edge(1).amount.has_value());
}
