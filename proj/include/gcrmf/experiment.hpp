// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcrmf/config.hpp"
#include "gcrmf/csv.hpp"
#include "gcrmf/elliptic.hpp"
#include "gcrmf/errors.hpp"
#include "gcrmf/gcn.hpp"
#include "gcrmf/graph_io.hpp"
#include "gcrmf/metrics.hpp"
#include "gcrmf/model.hpp"
#include "gcrmf/rules.hpp"
#include "gcrmf/synthetic.hpp"
#include "gcrmf/training.hpp"

namespace gcrmf {

struct Dataset {
    TemporalHeteroGraph graph{1};
    GroundTruth truth;
};

inline Dataset build_dataset(const RunConfig& cfg) {
    Dataset d;
    switch (cfg.dataset.kind) {
        case DatasetConfig::Kind::Synthetic: {
            SyntheticResult r = generate_synthetic(cfg.dataset.synthetic);
            d.graph = std::move(r.graph);
            d.truth = std::move(r.truth);
            break;
        }
        case DatasetConfig::Kind::Elliptic: {
            d.graph = load_elliptic(EllipticPaths::in_dir(cfg.dataset.elliptic_dir));
            break;
        }
        case DatasetConfig::Kind::GraphFile: {
            d.graph = import_graph(cfg.dataset.graph_path);
            if (!cfg.dataset.truth_path.empty()) d.truth = load_truth(cfg.dataset.truth_path);
            break;
        }
    }
    if (!d.graph.frozen()) d.graph.freeze();
    return d;
}

inline std::vector<MetaPath> resolve_schemas(const RunConfig& cfg) {
    return cfg.schema_file.empty() ? default_metapaths() : load_metapaths(cfg.schema_file);
}

struct LabeledSplit {
    std::vector<std::pair<NodeId, int>> train; // (node, 0/1)
    std::vector<std::pair<NodeId, int>> test;
};

// Stratified split of the labeled nodes (Unknown excluded). Each class is
// shuffled independently so both sides keep the class mix.
inline LabeledSplit split_labeled(const TemporalHeteroGraph& g, double fraction,
                                  std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw DomainError("split: fraction must lie in (0,1)");
    std::vector<NodeId> illicit, licit;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const NodeLabel l = g.node(v).label;
        if (l == NodeLabel::Illicit) illicit.push_back(v);
        else if (l == NodeLabel::Licit) licit.push_back(v);
    }
    if (illicit.empty() && licit.empty()) throw DataError("split: no labeled nodes");

    LabeledSplit out;
    auto take = [&](std::vector<NodeId>& ids, int y, std::uint64_t salt) {
        auto rng = make_rng(mix_seed(seed, {fnv1a64("split"), salt}));
        shuffle_vec(ids, rng);
        const std::size_t n_train = static_cast<std::size_t>(
            fraction * static_cast<double>(ids.size()));
        for (std::size_t i = 0; i < ids.size(); ++i)
            (i < n_train ? out.train : out.test).emplace_back(ids[i], y);
    };
    take(illicit, 1, 1);
    take(licit, 0, 2);
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

// Per-method scorer over cumulative snapshots. Construction trains the
// method; score() is then reusable across evaluation windows.
class MethodScorer {
public:
    MethodScorer(const RunConfig& cfg, const TemporalHeteroGraph& g,
                 const std::vector<std::pair<NodeId, int>>& train)
        : cfg_(cfg), g_(&g) {
        switch (cfg.method) {
            case Method::Gcrmf:
            case Method::GatAmlp: {
                model_.emplace(cfg.model, resolve_schemas(cfg));
                store_.set_rng_seed(cfg.seed);
                model_->register_params(store_, g.feature_dim());
                std::vector<NodeId> labeled;
                labeled.reserve(train.size());
                for (const auto& [v, y] : train) labeled.push_back(v);
                Trainer trainer(cfg.training);
                const auto windows = partition_windows(g.time_horizon(), cfg.eval.windows);
                train_result_ = trainer.run(g, *model_, store_, windows, labeled);
                break;
            }
            case Method::SemiGcn: {
                GcnConfig gc = cfg.gcn;
                gc.seed = cfg.seed;
                gcn_.emplace(g.full_view(), gc);
                gcn_->train(train);
                break;
            }
            case Method::RuleMatch: {
                rules_ = cfg.rules_file.empty() ? matched_rules(cfg.dataset.synthetic)
                                                : load_rules(cfg.rules_file);
                break;
            }
        }
    }

    // scores for `targets` on the cumulative snapshot through `end`
    std::map<NodeId, double> score(Timestamp end, const std::vector<NodeId>& targets) {
        const GraphView view = g_->snapshot(0, end);
        std::map<NodeId, double> out;
        switch (cfg_.method) {
            case Method::Gcrmf:
            case Method::GatAmlp: {
                const auto z = model_->z_values(store_, view, end, targets,
                                                SubgraphModel::canonical_path_seed(store_));
                for (const auto& [v, t] : z) out.emplace(v, model_->classify_value(store_, t));
                break;
            }
            case Method::SemiGcn: {
                GcnConfig gc = cfg_.gcn;
                gc.seed = cfg_.seed;
                GcnBaseline snap(view, gc);
                for (const std::string& name : gcn_->params().names())
                    snap.params().value(name) = gcn_->params().value(name);
                const std::vector<double> s = snap.scores();
                for (NodeId v : targets) out.emplace(v, s[static_cast<std::size_t>(v)]);
                break;
            }
            case Method::RuleMatch: {
                const RuleMatchResult r = rulematch_score(view, rules_);
                std::vector<double> s(static_cast<std::size_t>(g_->node_count()), 0.0);
                for (const auto& [v, sc] : r.ranked) s[static_cast<std::size_t>(v)] = sc;
                for (NodeId v : targets) out.emplace(v, s[static_cast<std::size_t>(v)]);
                break;
            }
        }
        return out;
    }

    std::vector<LossRow> loss_trace() const {
        switch (cfg_.method) {
            case Method::Gcrmf:
            case Method::GatAmlp:
                return train_result_.trace;
            case Method::SemiGcn: {
                std::vector<LossRow> rows;
                int epoch = 0;
                for (double v : gcn_->training_losses()) {
                    LossRow r;
                    r.window = 0;
                    r.epoch = epoch++;
                    r.l_cls = v;
                    r.l_total = v;
                    rows.push_back(r);
                }
                return rows;
            }
            case Method::RuleMatch:
                return {};
        }
        return {};
    }

    bool has_checkpoint() const {
        return cfg_.method == Method::Gcrmf || cfg_.method == Method::GatAmlp;
    }
    const ParamStore& store() const { return store_; }
    const SubgraphModel& model() const { return *model_; }

private:
    RunConfig cfg_;
    const TemporalHeteroGraph* g_;
    std::optional<SubgraphModel> model_;
    ParamStore store_;
    TrainResult train_result_;
    std::optional<GcnBaseline> gcn_;
    RuleSet rules_;
};

namespace detail {

// windows.csv: fixed column order
inline void write_windows_csv(const std::string& path, const std::vector<WindowMetrics>& rows) {
    std::ofstream out = open_csv(path);
    out << "window,precision,recall,f1,fpr\n";
    for (const WindowMetrics& w : rows)
        out << w.window << ',' << format_double(w.stats.precision) << ','
            << format_double(w.stats.recall) << ',' << format_double(w.stats.f1) << ','
            << format_double(w.stats.fpr) << '\n';
    if (!out) throw DataError("csv: write failed: " + path);
}

class ArtifactSink {
public:
    explicit ArtifactSink(std::string dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        const std::string p = (std::filesystem::path(dir_) / name).string();
        written_.push_back(p);
        return p;
    }

    // on failure, partial outputs must not survive
    void discard_all() {
        for (const std::string& p : written_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
};

} // namespace detail

inline constexpr double kDecisionThreshold = 0.5;

inline EvalReport run_experiment(const RunConfig& cfg) {
    cfg.validate();
    detail::ArtifactSink sink(cfg.out_dir);
    try {
        Dataset data = build_dataset(cfg);
        const TemporalHeteroGraph& g = data.graph;
        LabeledSplit split = split_labeled(g, cfg.train_fraction, cfg.seed);
        MethodScorer scorer(cfg, g, split.train);

        EvalReport report;
        report.method = to_string(cfg.method);
        report.seed = cfg.seed;
        report.config_hash = cfg.config_hash();
        report.decision_threshold = kDecisionThreshold;

        const Timestamp horizon = std::max<Timestamp>(g.time_horizon(), 0);
        const auto windows = partition_windows(horizon, cfg.eval.windows);

        // final-horizon scores back every headline metric and the alert file
        std::vector<NodeId> test_ids;
        test_ids.reserve(split.test.size());
        for (const auto& [v, y] : split.test) test_ids.push_back(v);
        std::map<NodeId, double> final_scores = scorer.score(horizon, test_ids);

        {
            std::vector<int> y_true, y_pred;
            for (const auto& [v, y] : split.test) {
                y_true.push_back(y);
                y_pred.push_back(final_scores.at(v) >= kDecisionThreshold ? 1 : 0);
            }
            report.headline = evaluate_binary(y_true, y_pred);
        }

        // per-window records: test nodes whose first activity falls in the
        // window, scored on the cumulative snapshot through the window end
        for (std::size_t w = 0; w < windows.size(); ++w) {
            const auto [start, end] = windows[w];
            std::vector<NodeId> in_window;
            std::vector<int> y_true;
            for (const auto& [v, y] : split.test) {
                const Timestamp fs = g.node(v).first_seen;
                if (fs >= start && fs <= end) {
                    in_window.push_back(v);
                    y_true.push_back(y);
                }
            }
            WindowMetrics wm;
            wm.window = static_cast<int>(w);
            wm.start = start;
            wm.end = end;
            wm.n_scored = static_cast<int>(in_window.size());
            if (!in_window.empty()) {
                const std::map<NodeId, double> s = scorer.score(end, in_window);
                std::vector<int> y_pred;
                y_pred.reserve(in_window.size());
                for (NodeId v : in_window)
                    y_pred.push_back(s.at(v) >= kDecisionThreshold ? 1 : 0);
                wm.stats = evaluate_binary(y_true, y_pred);
            }
            report.windows.push_back(wm);
        }

        // ranked precision@K across the configured risk thresholds
        {
            std::vector<std::pair<NodeId, double>> scored;
            std::vector<NodeId> positives;
            for (const auto& [v, y] : split.test) {
                scored.emplace_back(v, final_scores.at(v));
                if (y == 1) positives.push_back(v);
            }
            for (double t : cfg.eval.thresholds)
                report.at_k.push_back(precision_at_k(scored, positives, t));
        }

        {
            std::ofstream out(sink.path("report.json"), std::ios::binary);
            if (!out) throw DataError("report: cannot open for writing");
            out << report_to_json(report).dump(1) << '\n';
        }
        detail::write_windows_csv(sink.path("windows.csv"), report.windows);
        write_loss_csv(sink.path("loss.csv"), scorer.loss_trace());

        {
            std::vector<NodeId> all;
            all.reserve(static_cast<std::size_t>(g.node_count()));
            for (NodeId v = 0; v < g.node_count(); ++v) all.push_back(v);
            std::map<NodeId, double> s = scorer.score(horizon, all);
            std::vector<std::pair<NodeId, double>> ranked(s.begin(), s.end());
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            write_alerts_csv(sink.path("alerts.csv"), ranked);
        }

        if (scorer.has_checkpoint()) scorer.store().save(sink.path("checkpoint.json"));
        return report;
    } catch (...) {
        sink.discard_all();
        throw;
    }
}

} // namespace gcrmf
