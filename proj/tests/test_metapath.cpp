// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "gcrmf/metapath.hpp"
#include "gcrmf/model.hpp"

#include "test_support.hpp"

using namespace gcrmf;

TEST_CASE("schema parsing validates the alternating step list") {
    CHECK_THROWS_AS(MetaPath::from_strings({}), FormatError);
    CHECK_THROWS_AS(MetaPath::from_strings({"Mobility"}), FormatError);
    CHECK_THROWS_AS(MetaPath::from_strings({"Mobility", "FundTransfer"}), FormatError);
    CHECK_THROWS_AS(MetaPath::from_strings({"Mobility", "FundTransfer", "Fintech", "Extra"}),
                    FormatError);
    CHECK_THROWS_AS(MetaPath::from_strings({"NotACategory", "FundTransfer", "Fintech"}),
                    FormatError);
    CHECK_THROWS_AS(MetaPath::from_strings({"Mobility", "NotARelation", "Fintech"}), FormatError);

    MetaPath mp = MetaPath::from_strings({"Mobility", "FundTransfer", "Fintech"});
    CHECK(mp.length() == 1);
    CHECK(mp.categories.size() == 2);
    CHECK(mp.relations.size() == 1);
    auto round = MetaPath::from_strings(mp.to_strings());
    CHECK(round.categories == mp.categories);
    CHECK(round.relations == mp.relations);
}

TEST_CASE("default schemas are well formed") {
    auto mps = default_metapaths();
    REQUIRE(mps.size() == 3);
    for (const auto& mp : mps) {
        CHECK(mp.length() == 2);
        CHECK(mp.categories.size() == 3);
    }
}

TEST_CASE("schema files round trip") {
    support::TempDir dir("schemas");
    auto mps = default_metapaths();
    const std::string path = dir.file("paths.json");
    save_metapaths(mps, path);
    auto back = load_metapaths(path);
    REQUIRE(back.size() == mps.size());
    for (std::size_t i = 0; i < mps.size(); ++i) {
        CHECK(back[i].categories == mps[i].categories);
        CHECK(back[i].relations == mps[i].relations);
    }
    support::write_file(dir.file("bad.json"), "[[\"Mobility\"]");
    CHECK_THROWS_AS(load_metapaths(dir.file("bad.json")), FormatError);
    CHECK_THROWS_AS(load_metapaths(dir.file("absent.json")), DataError);
}

TEST_CASE("anchors of the wrong category yield no instances") {
    auto f = support::small_fixture();
    const GraphView view = f.graph.full_view();
    // schema 0 anchors at Mobility; node 1 is Fintech
    auto inst = enumerate_instances(view, f.schemas[0], 1, f.graph.time_horizon(), kUncapped,
                                    kUncapped, 1);
    CHECK(inst.empty());
}

TEST_CASE("a forced line admits exactly one instance") {
    TemporalHeteroGraph g(2);
    g.add_node(IndustryCategory::Mobility, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_node(IndustryCategory::Fintech, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_node(IndustryCategory::Energy, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_edge(0, 1, RelationType::FundTransfer, 1);
    g.add_edge(1, 2, RelationType::FundTransfer, 4);
    g.freeze();
    MetaPath mp = MetaPath::from_strings(
        {"Mobility", "FundTransfer", "Fintech", "FundTransfer", "Energy"});

    auto inst = enumerate_instances(g.full_view(), mp, 0, 10, kUncapped, kUncapped, 7);
    REQUIRE(inst.size() == 1);
    CHECK(inst[0].node_ids == std::vector<NodeId>{0, 1, 2});
    CHECK(inst[0].edge_ids == std::vector<EdgeId>{0, 1});
    CHECK(instance_matches(g.full_view(), mp, inst[0], 10));

    // hop timestamps must be nondecreasing: cutting off the late edge or
    // querying before it exists removes the instance
    CHECK(enumerate_instances(g.full_view(), mp, 0, 3, kUncapped, kUncapped, 7).empty());
    // a second first-hop edge later than the second hop cannot complete
    // (t=6 > 4 would need a third edge at >= 6)
    g = TemporalHeteroGraph(2);
    g.add_node(IndustryCategory::Mobility, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_node(IndustryCategory::Fintech, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_node(IndustryCategory::Energy, Tensor::zeros_vec(2), NodeLabel::Unknown, 0);
    g.add_edge(0, 1, RelationType::FundTransfer, 6);
    g.add_edge(1, 2, RelationType::FundTransfer, 4);
    g.freeze();
    CHECK(enumerate_instances(g.full_view(), mp, 0, 10, kUncapped, kUncapped, 7).empty());
}

TEST_CASE("window start bounds the first hop") {
    TemporalHeteroGraph g(1);
    g.add_node(IndustryCategory::Fintech, Tensor::zeros_vec(1), NodeLabel::Unknown, 0);
    g.add_node(IndustryCategory::Energy, Tensor::zeros_vec(1), NodeLabel::Unknown, 0);
    g.add_edge(0, 1, RelationType::CreditIssue, 2);
    g.freeze();
    MetaPath mp = MetaPath::from_strings({"Fintech", "CreditIssue", "Energy"});
    CHECK(enumerate_instances(g.snapshot(0, 9), mp, 0, 9, kUncapped, kUncapped, 1).size() == 1);
    CHECK(enumerate_instances(g.snapshot(3, 9), mp, 0, 9, kUncapped, kUncapped, 1).empty());
}

TEST_CASE("uncapped enumeration equals exhaustive search on random graphs") {
    int nonempty = 0;
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
        support::RandomGraphSpec spec;
        spec.nodes = 8 + static_cast<int>(seed % 9);
        spec.edges = 5 * spec.nodes;
        spec.max_t = 12;
        auto g = support::random_graph(seed, spec);
        g.freeze();
        const GraphView view = g.full_view();
        const Timestamp now = g.time_horizon();
        auto schemas = default_metapaths();
        schemas.push_back(MetaPath::from_strings({"Energy", "EnergyTrade", "Energy"}));
        for (const MetaPath& mp : schemas) {
            for (NodeId v = 0; v < g.node_count(); ++v) {
                auto got = enumerate_instances(view, mp, v, now, kUncapped, kUncapped, seed);
                std::set<PathInstance> got_set(got.begin(), got.end());
                CHECK(got_set.size() == got.size()); // no duplicates
                auto want = oracle::enumerate_bruteforce(view, mp, v, now);
                CHECK(got_set == want);
                if (!want.empty()) ++nonempty;
                for (const PathInstance& pi : got)
                    CHECK(instance_matches(view, mp, pi, now));
            }
        }
    }
    CHECK(nonempty > 50); // the corpus genuinely exercises the search
}

TEST_CASE("instance validation rejects corrupted paths") {
    auto f = support::small_fixture();
    const GraphView view = f.graph.full_view();
    const Timestamp now = f.graph.time_horizon();
    auto inst =
        enumerate_instances(view, f.schemas[0], 0, now, kUncapped, kUncapped, 3);
    REQUIRE(!inst.empty());
    PathInstance pi = inst[0];
    CHECK(instance_matches(view, f.schemas[0], pi, now));

    PathInstance wrong_node = pi;
    wrong_node.node_ids[1] = 8; // unrelated node
    CHECK_FALSE(instance_matches(view, f.schemas[0], wrong_node, now));

    PathInstance wrong_edge = pi;
    wrong_edge.edge_ids[0] = wrong_edge.edge_ids[1];
    CHECK_FALSE(instance_matches(view, f.schemas[0], wrong_edge, now));

    PathInstance short_path = pi;
    short_path.node_ids.pop_back();
    CHECK_FALSE(instance_matches(view, f.schemas[0], short_path, now));

    CHECK_FALSE(instance_matches(view, f.schemas[1], pi, now)); // schema mismatch
}

TEST_CASE("per-hop caps sample deterministically from the true set") {
    // star: one Fintech anchor fanning out to many Energy sinks
    TemporalHeteroGraph g(1);
    g.add_node(IndustryCategory::Fintech, Tensor::zeros_vec(1), NodeLabel::Unknown, 0);
    for (int i = 0; i < 12; ++i) {
        NodeId sink =
            g.add_node(IndustryCategory::Energy, Tensor::zeros_vec(1), NodeLabel::Unknown, 0);
        g.add_edge(0, sink, RelationType::CreditIssue, i + 1);
    }
    g.freeze();
    MetaPath mp = MetaPath::from_strings({"Fintech", "CreditIssue", "Energy"});
    const GraphView view = g.full_view();

    auto full = enumerate_instances(view, mp, 0, 20, kUncapped, kUncapped, 1);
    CHECK(full.size() == 12);
    std::set<PathInstance> universe(full.begin(), full.end());

    auto capped = enumerate_instances(view, mp, 0, 20, 5, kUncapped, 1);
    CHECK(capped.size() == 5);
    for (const PathInstance& pi : capped) CHECK(universe.count(pi) == 1);
    // sampled candidates are restored to time order
    for (std::size_t i = 1; i < capped.size(); ++i)
        CHECK(view.edge(capped[i - 1].edge_ids[0]).timestamp <
              view.edge(capped[i].edge_ids[0]).timestamp);

    auto again = enumerate_instances(view, mp, 0, 20, 5, kUncapped, 1);
    CHECK(again == capped); // same seed, same sample

    auto total_capped = enumerate_instances(view, mp, 0, 20, kUncapped, 7, 1);
    CHECK(total_capped.size() == 7);
    for (const PathInstance& pi : total_capped) CHECK(universe.count(pi) == 1);

    CHECK_THROWS_AS(enumerate_instances(view, mp, 0, 20, 0, kUncapped, 1), DomainError);
    CHECK_THROWS_AS(enumerate_instances(view, mp, 0, 20, 1, 0, 1), DomainError);
}

TEST_CASE("subgraph embeddings match the pooled-attention reference") {
    auto f = support::small_fixture();
    ParamStore store = fixture_store(f);
    SubgraphModel model(f.cfg, f.schemas);
    const GraphView view = f.graph.full_view();
    const Timestamp now = f.graph.time_horizon();
    const std::uint64_t path_seed = 5150;

    std::vector<NodeId> all;
    for (NodeId v = 0; v < f.graph.node_count(); ++v) all.push_back(v);
    auto z = model.z_values(store, view, now, all, path_seed);

    // encoder table, computed through the (separately verified) encoder
    TemporalEncoder enc(f.cfg.encoder);
    Tape tape(false);
    ParamBinding bind(store, tape);
    auto H = enc.encode_targets(tape, bind, view, now, all);

    for (NodeId v : all) {
        std::vector<oracle::Vec> pooled;
        std::vector<oracle::Mat> wms;
        for (std::size_t m = 0; m < f.schemas.size(); ++m) {
            auto inst = enumerate_instances(view, f.schemas[m], v, now, f.cfg.max_per_hop,
                                            f.cfg.max_total, mix_seed(path_seed, {m}));
            if (inst.empty()) continue;
            oracle::Vec p(static_cast<std::size_t>(f.cfg.encoder.hidden_dim), 0.0);
            for (const PathInstance& pi : inst) {
                oracle::Vec mean(p.size(), 0.0);
                for (NodeId u : pi.node_ids) {
                    auto hu = support::to_vec(tape.val(H.at(u)));
                    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += hu[i];
                }
                for (std::size_t i = 0; i < mean.size(); ++i)
                    mean[i] /= static_cast<double>(pi.node_ids.size());
                for (std::size_t i = 0; i < p.size(); ++i) p[i] += mean[i];
            }
            for (std::size_t i = 0; i < p.size(); ++i) p[i] /= static_cast<double>(inst.size());
            pooled.push_back(std::move(p));
            wms.push_back(support::to_mat(
                store.value(SubgraphModel::schema_param(static_cast<int>(m)))));
        }
        oracle::Vec want;
        if (pooled.empty()) {
            want = support::to_vec(tape.val(H.at(v)));
        } else {
            auto beta =
                oracle::schema_attention(wms, support::to_vec(store.value("metapath.q")), pooled);
            want = oracle::weighted_sum(beta, pooled);
        }
        CHECK(support::max_abs_diff(want, z.at(v)) < 1e-12);
    }
}

TEST_CASE("nodes without realized schemas fall back to their own embedding") {
    auto f = support::small_fixture();
    ParamStore store = fixture_store(f);
    SubgraphModel model(f.cfg, f.schemas);
    const GraphView view = f.graph.full_view();
    const Timestamp now = f.graph.time_horizon();

    // node 8 is isolated Mobility: anchors schema 0 but has no out edges
    Tape tape(false);
    ParamBinding bind(store, tape);
    auto out = model.forward_targets(tape, bind, view, now, {8}, 1);
    const Tensor& z = tape.val(out.z.at(8));
    const Tensor& h = tape.val(out.h.at(8));
    REQUIRE(z.same_shape(h));
    for (int i = 0; i < z.size(); ++i) CHECK(z[i] == h[i]);

    // node 2 (Energy) anchors neither schema: same fallback
    auto out2 = model.forward_targets(tape, bind, view, now, {2}, 1);
    const Tensor& z2 = tape.val(out2.z.at(2));
    const Tensor& h2 = tape.val(out2.h.at(2));
    for (int i = 0; i < z2.size(); ++i) CHECK(z2[i] == h2[i]);
}

TEST_CASE("duplicate targets produce one embedding entry") {
    auto f = support::small_fixture();
    ParamStore store = fixture_store(f);
    SubgraphModel model(f.cfg, f.schemas);
    Tape tape(false);
    ParamBinding bind(store, tape);
    auto out = model.forward_targets(tape, bind, f.graph.full_view(), f.graph.time_horizon(),
                                     {0, 0, 1, 0}, 2);
    CHECK(out.z.size() == 2);
}

TEST_CASE("chunked scoring matches one whole-table pass bitwise") {
    auto f = support::small_fixture();
    ParamStore store = fixture_store(f);
    SubgraphModel model(f.cfg, f.schemas);
    const GraphView view = f.graph.full_view();
    const Timestamp now = f.graph.time_horizon();
    const std::uint64_t seed = SubgraphModel::canonical_path_seed(store);

    auto whole = model.z_table(store, view, now, seed, /*chunk=*/512);
    auto chunked = model.z_table(store, view, now, seed, /*chunk=*/3);
    REQUIRE(whole.size() == chunked.size());
    for (const auto& [v, t] : whole) {
        const Tensor& c = chunked.at(v);
        REQUIRE(t.same_shape(c));
        for (int i = 0; i < t.size(); ++i) CHECK(t[i] == c[i]);
    }
}

TEST_CASE("classifier value path equals the taped head") {
    auto f = support::small_fixture();
    ParamStore store = fixture_store(f);
    SubgraphModel model(f.cfg, f.schemas);
    auto rng = make_rng(2);
    Tensor z = support::random_vec(f.cfg.encoder.hidden_dim, rng);

    Tape tape(false);
    ParamBinding bind(store, tape);
    const double taped = tape.val(model.classify(tape, bind, tape.constant(z))).scalar_value();
    const double direct = model.classify_value(store, z);
    CHECK(direct == Catch::Approx(taped).margin(1e-15));
    CHECK(direct > 0.0);
    CHECK(direct < 1.0);
    CHECK_THROWS_AS(model.classify_value(store, Tensor::zeros_vec(2)), DimensionError);
}

TEST_CASE("model construction rejects bad configuration") {
    auto f = support::small_fixture();
    ModelConfig bad = f.cfg;
    bad.attention_dim = 0;
    CHECK_THROWS_AS(SubgraphModel(bad, f.schemas), DomainError);
    CHECK_THROWS_AS(SubgraphModel(f.cfg, {}), DomainError);
}
