// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and helpers for the test suite and the acceptance runner.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gcrmf/graph.hpp"
#include "gcrmf/losses.hpp"
#include "gcrmf/model.hpp"
#include "gcrmf/params.hpp"
#include "gcrmf/rng.hpp"
#include "gcrmf/tensor.hpp"
#include "gcrmf/training.hpp"

#include "oracles.hpp"

namespace support {

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double signed_unit(std::mt19937_64& rng) { return 2.0 * unit(rng) - 1.0; }

inline gcrmf::Tensor random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
    gcrmf::Tensor t = gcrmf::Tensor::zeros_vec(n);
    for (int i = 0; i < n; ++i) t[i] = scale * signed_unit(rng);
    return t;
}

inline gcrmf::Tensor random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
    gcrmf::Tensor t = gcrmf::Tensor::zeros_mat(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) t.at(i, j) = scale * signed_unit(rng);
    return t;
}

inline oracle::Vec to_vec(const gcrmf::Tensor& t) {
    oracle::Vec v(static_cast<std::size_t>(t.size()));
    for (int i = 0; i < t.size(); ++i) v[static_cast<std::size_t>(i)] = t[i];
    return v;
}

inline oracle::Mat to_mat(const gcrmf::Tensor& t) {
    oracle::Mat m(static_cast<std::size_t>(t.rows()),
                  oracle::Vec(static_cast<std::size_t>(t.cols())));
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c)
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = t.at(r, c);
    return m;
}

inline double max_abs_diff(const oracle::Vec& a, const gcrmf::Tensor& b) {
    double worst = 0.0;
    for (int i = 0; i < b.size(); ++i)
        worst = std::max(worst, std::abs(a[static_cast<std::size_t>(i)] - b[i]));
    return worst;
}

// ---- random heterogeneous graphs -------------------------------------------

struct RandomGraphSpec {
    int nodes = 12;
    int edges = 30;
    int feature_dim = 4;
    gcrmf::Timestamp max_t = 20;
    bool amounts = true;
};

inline gcrmf::TemporalHeteroGraph random_graph(std::uint64_t seed, const RandomGraphSpec& spec) {
    auto rng = gcrmf::make_rng(seed);
    gcrmf::TemporalHeteroGraph g(spec.feature_dim);
    for (int v = 0; v < spec.nodes; ++v) {
        const auto cat = static_cast<gcrmf::IndustryCategory>(rng() % 4);
        const auto label = static_cast<gcrmf::NodeLabel>(rng() % 3);
        g.add_node(cat, random_vec(spec.feature_dim, rng), label, 0);
    }
    for (int e = 0; e < spec.edges; ++e) {
        const auto src = static_cast<gcrmf::NodeId>(rng() % static_cast<std::uint64_t>(spec.nodes));
        const auto dst = static_cast<gcrmf::NodeId>(rng() % static_cast<std::uint64_t>(spec.nodes));
        const auto rel = static_cast<gcrmf::RelationType>(rng() % 5);
        const auto t = static_cast<gcrmf::Timestamp>(
            rng() % static_cast<std::uint64_t>(spec.max_t + 1));
        if (spec.amounts)
            g.add_edge(src, dst, rel, t, 1.0 + 100.0 * unit(rng));
        else
            g.add_edge(src, dst, rel, t);
    }
    return g;
}

// ---- the 10-node composed fixture -------------------------------------------
//
// Two realizable schemas, mixed labels, parallel edges, one isolated node.
struct SmallFixture {
    gcrmf::TemporalHeteroGraph graph{4};
    std::vector<gcrmf::MetaPath> schemas;
    gcrmf::ModelConfig cfg;
    std::vector<gcrmf::NodeId> anchors{0, 1, 3, 4};
    std::vector<gcrmf::NodeId> labeled{0, 1, 2, 4, 5};
};

inline SmallFixture small_fixture(std::uint64_t seed = 7) {
    using C = gcrmf::IndustryCategory;
    using R = gcrmf::RelationType;
    using L = gcrmf::NodeLabel;
    SmallFixture f;
    auto rng = gcrmf::make_rng(seed);

    const C cats[10] = {C::Mobility, C::Fintech, C::Energy,   C::Mobility, C::Fintech,
                        C::Energy,   C::Fintech, C::Energy,   C::Mobility, C::Fintech};
    const L labels[10] = {L::Licit,   L::Illicit, L::Licit,   L::Unknown, L::Illicit,
                          L::Licit,   L::Unknown, L::Unknown, L::Unknown, L::Unknown};
    for (int v = 0; v < 10; ++v)
        f.graph.add_node(cats[v], random_vec(4, rng), labels[v], 0);

    // schema 1: Mobility -FundTransfer-> Fintech -FundTransfer-> Energy
    // schema 2: Fintech -CreditIssue-> Energy
    f.graph.add_edge(0, 1, R::FundTransfer, 1, 120.0);
    f.graph.add_edge(1, 2, R::FundTransfer, 3, 110.0);
    f.graph.add_edge(3, 4, R::FundTransfer, 2, 95.0);
    f.graph.add_edge(4, 5, R::FundTransfer, 5, 90.0);
    f.graph.add_edge(3, 1, R::FundTransfer, 4, 80.0);
    f.graph.add_edge(1, 5, R::FundTransfer, 6, 75.0);
    f.graph.add_edge(1, 2, R::CreditIssue, 4, 60.0);
    f.graph.add_edge(4, 7, R::CreditIssue, 6, 55.0);
    f.graph.add_edge(6, 7, R::CreditIssue, 2, 50.0);
    f.graph.add_edge(9, 5, R::CreditIssue, 7, 45.0);
    f.graph.add_edge(0, 4, R::Settlement, 3, 30.0);
    f.graph.add_edge(2, 6, R::EnergyTrade, 5, 20.0);
    f.graph.add_edge(0, 1, R::FundTransfer, 7, 25.0); // parallel to (0,1,t=1)
    f.graph.add_edge(7, 9, R::Settlement, 8, 15.0);
    // node 8 stays edge-free to exercise the self-loop fallback
    f.graph.freeze();

    f.schemas = {
        gcrmf::MetaPath::from_strings(
            {"Mobility", "FundTransfer", "Fintech", "FundTransfer", "Energy"}),
        gcrmf::MetaPath::from_strings({"Fintech", "CreditIssue", "Energy"}),
    };
    f.cfg.encoder.layer_count = 2;
    f.cfg.encoder.hidden_dim = 6;
    f.cfg.attention_dim = 5;
    f.cfg.max_per_hop = 4;
    f.cfg.max_total = 16;
    return f;
}

inline gcrmf::ParamStore fixture_store(const SmallFixture& f, std::uint64_t seed = 11) {
    gcrmf::ParamStore store;
    store.set_rng_seed(seed);
    gcrmf::SubgraphModel model(f.cfg, f.schemas);
    model.register_params(store, f.graph.feature_dim());
    return store;
}

// ---- finite differences ------------------------------------------------------

// rel = |a-f| / max(1e-8, |a|+|f|); central differences, h = 1e-5
template <class F>
inline double gradcheck_worst_rel(gcrmf::ParamStore& store, F&& objective, double h = 1e-5) {
    store.zero_grads();
    std::map<std::string, gcrmf::Tensor> analytic;
    {
        gcrmf::Tape tape(true);
        gcrmf::ParamBinding bind(store, tape);
        gcrmf::Var loss = objective(tape, bind);
        tape.backward(loss);
        bind.harvest();
    }
    for (const std::string& name : store.names())
        if (store.trainable(name)) analytic.emplace(name, store.grad(name));
    store.zero_grads();

    auto value_at = [&]() {
        gcrmf::Tape tape(false);
        gcrmf::ParamBinding bind(store, tape);
        return tape.val(objective(tape, bind)).scalar_value();
    };

    double worst = 0.0;
    for (const std::string& name : store.names()) {
        if (!store.trainable(name)) continue;
        gcrmf::Tensor& value = store.value(name);
        const gcrmf::Tensor& a = analytic.at(name);
        for (int i = 0; i < value.size(); ++i) {
            const double keep = value[i];
            value[i] = keep + h;
            const double up = value_at();
            value[i] = keep - h;
            const double down = value_at();
            value[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double rel = std::abs(a[i] - fd) / std::max(1e-8, std::abs(a[i]) + std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

// the full training objective on the small fixture, as one differentiable value
struct FixtureObjective {
    const SmallFixture& f;
    gcrmf::ContrastiveConfig cc;
    gcrmf::LossWeights weights;
    std::map<gcrmf::NodeId, gcrmf::Tensor> prev; // drift targets
    std::uint64_t batch_seed = 99;

    gcrmf::Var operator()(gcrmf::Tape& tape, gcrmf::ParamBinding& bind) const {
        gcrmf::SubgraphModel model(f.cfg, f.schemas);
        const gcrmf::GraphView view = f.graph.full_view();
        const gcrmf::Timestamp now = f.graph.time_horizon();

        auto pairs = gcrmf::build_pairs(tape, bind, model, view, now, f.anchors, batch_seed, cc);
        gcrmf::Var l_struct = gcrmf::contrastive_loss(tape, pairs, cc.tau);

        auto canon = model.forward_targets(tape, bind, view, now, f.anchors,
                                           gcrmf::mix_seed(batch_seed, {0x5EED}));
        std::vector<gcrmf::Var> cur, old;
        for (gcrmf::NodeId v : f.anchors) {
            cur.push_back(canon.z.at(v));
            old.push_back(tape.constant(prev.at(v)));
        }
        gcrmf::Var l_temp = gcrmf::temporal_loss(tape, cur, old);

        std::vector<std::pair<gcrmf::Var, double>> labeled;
        for (gcrmf::NodeId v : f.anchors) {
            const gcrmf::NodeLabel l = f.graph.node(v).label;
            if (l == gcrmf::NodeLabel::Unknown) continue;
            labeled.emplace_back(model.classify(tape, bind, canon.z.at(v)),
                                 l == gcrmf::NodeLabel::Illicit ? 1.0 : 0.0);
        }
        gcrmf::Var l_cls = gcrmf::classification_loss(tape, labeled);
        return gcrmf::total_loss(tape, l_struct, l_temp, l_cls, weights);
    }
};

inline FixtureObjective fixture_objective(const SmallFixture& f, std::uint64_t seed = 23) {
    FixtureObjective obj{f, {}, {}, {}, 99};
    obj.cc.tau = 0.2;
    obj.cc.negatives_per_anchor = 3;
    auto rng = gcrmf::make_rng(seed);
    for (gcrmf::NodeId v : f.anchors)
        obj.prev.emplace(v, random_vec(f.cfg.encoder.hidden_dim, rng, 0.3));
    return obj;
}

// ---- scratch directories ------------------------------------------------------

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / ("gcrmf_" + tag);
        std::filesystem::remove_all(base);
        std::filesystem::create_directories(base);
        path_ = base.string();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace support
