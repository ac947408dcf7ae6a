// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: dataset generation, ingestion, training,
// evaluation sweeps, streaming updates, and rule-based scoring.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcrmf/config.hpp"
#include "gcrmf/csv.hpp"
#include "gcrmf/experiment.hpp"
#include "gcrmf/graph_io.hpp"
#include "gcrmf/metapath.hpp"
#include "gcrmf/online.hpp"
#include "gcrmf/rules.hpp"
#include "gcrmf/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "run configuration (TOML)")->required();
    sub->add_option("--seed", args.seed, "override the configured seed");
    sub->add_option("--out", args.out, "override the configured output directory");
}

gcrmf::RunConfig load_config(const CommonArgs& args) {
    gcrmf::RunConfig cfg = gcrmf::load_run_config(args.config_path);
    if (args.seed) cfg = cfg.with_seed(*args.seed);
    if (args.out) cfg.out_dir = *args.out;
    cfg.validate();
    return cfg;
}

std::string out_path(const gcrmf::RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

// a short post-horizon background batch so the streaming path has food
std::vector<gcrmf::StreamEdge> follow_on_stream(const gcrmf::TemporalHeteroGraph& g,
                                                const gcrmf::SyntheticSpec& spec) {
    auto rng = gcrmf::make_rng(gcrmf::mix_seed(spec.seed, {gcrmf::fnv1a64("stream")}));
    const int n = g.node_count();
    const int count = std::max(20, n / 20);
    std::vector<gcrmf::StreamEdge> out;
    out.reserve(static_cast<std::size_t>(count));
    const gcrmf::Timestamp base = spec.horizon() + 1;
    for (int k = 0; k < count; ++k) {
        gcrmf::StreamEdge se;
        se.src = static_cast<gcrmf::NodeId>(rng() % static_cast<std::uint64_t>(n));
        se.dst = static_cast<gcrmf::NodeId>(
            (se.src + 1 + static_cast<gcrmf::NodeId>(rng() % static_cast<std::uint64_t>(n - 1))) %
            n);
        se.rel = gcrmf::detail::background_relation(g.node(se.src).category,
                                                    g.node(se.dst).category, rng);
        se.t = base + static_cast<gcrmf::Timestamp>(
                          rng() % static_cast<std::uint64_t>(spec.steps_per_window));
        se.amount = std::exp(5.0 + gcrmf::detail::gauss(rng));
        out.push_back(se);
    }
    std::sort(out.begin(), out.end(),
              [](const gcrmf::StreamEdge& a, const gcrmf::StreamEdge& b) { return a.t < b.t; });
    return out;
}

int cmd_generate(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    if (cfg.dataset.kind != gcrmf::DatasetConfig::Kind::Synthetic)
        throw gcrmf::ConfigError("generate: dataset.kind must be synthetic");
    gcrmf::SyntheticResult r = gcrmf::generate_synthetic(cfg.dataset.synthetic);
    gcrmf::export_graph(r.graph, out_path(cfg, "graph.json"));
    gcrmf::save_truth(r.truth, out_path(cfg, "truth.json"));
    gcrmf::save_metapaths(gcrmf::resolve_schemas(cfg), out_path(cfg, "metapaths.json"));
    gcrmf::save_rules(gcrmf::matched_rules(cfg.dataset.synthetic), out_path(cfg, "rules.json"));
    gcrmf::save_stream(follow_on_stream(r.graph, cfg.dataset.synthetic),
                       out_path(cfg, "stream.jsonl"));
    std::cout << "generated " << r.graph.node_count() << " nodes, " << r.graph.edge_count()
              << " edges, " << r.truth.size() << " planted motifs -> " << cfg.out_dir << '\n';
    return kExitOk;
}

int cmd_ingest(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    if (cfg.dataset.kind != gcrmf::DatasetConfig::Kind::Elliptic)
        throw gcrmf::ConfigError("ingest: dataset.kind must be elliptic");
    gcrmf::TemporalHeteroGraph g =
        gcrmf::load_elliptic(gcrmf::EllipticPaths::in_dir(cfg.dataset.elliptic_dir));
    gcrmf::export_graph(g, out_path(cfg, "graph.json"));
    std::cout << "ingested " << g.node_count() << " nodes, " << g.edge_count() << " edges -> "
              << cfg.out_dir << "/graph.json\n";
    return kExitOk;
}

int cmd_train(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    gcrmf::Dataset data = gcrmf::build_dataset(cfg);
    gcrmf::LabeledSplit split = gcrmf::split_labeled(data.graph, cfg.train_fraction, cfg.seed);
    gcrmf::MethodScorer scorer(cfg, data.graph, split.train);

    gcrmf::write_loss_csv(out_path(cfg, "loss.csv"), scorer.loss_trace());
    if (scorer.has_checkpoint()) scorer.store().save(out_path(cfg, "checkpoint.json"));

    const gcrmf::Timestamp horizon = std::max<gcrmf::Timestamp>(data.graph.time_horizon(), 0);
    std::vector<gcrmf::NodeId> all;
    for (gcrmf::NodeId v = 0; v < data.graph.node_count(); ++v) all.push_back(v);
    std::map<gcrmf::NodeId, double> s = scorer.score(horizon, all);
    std::vector<std::pair<gcrmf::NodeId, double>> ranked(s.begin(), s.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    gcrmf::write_alerts_csv(out_path(cfg, "alerts.csv"), ranked);
    std::cout << "trained " << gcrmf::to_string(cfg.method) << " on "
              << split.train.size() << " labeled nodes -> " << cfg.out_dir << '\n';
    return kExitOk;
}

int cmd_eval(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    if (cfg.eval.seeds.empty()) {
        gcrmf::EvalReport rep = gcrmf::run_experiment(cfg);
        std::cout << "method " << rep.method << " headline f1 "
                  << gcrmf::format_double(rep.headline.f1) << " -> " << cfg.out_dir
                  << "/report.json\n";
        return kExitOk;
    }
    std::vector<double> f1s, precisions, recalls, fprs;
    for (std::uint64_t s : cfg.eval.seeds) {
        gcrmf::RunConfig sub = cfg.with_seed(s);
        sub.eval.seeds.clear();
        sub.out_dir =
            (std::filesystem::path(cfg.out_dir) / ("seed_" + std::to_string(s))).string();
        gcrmf::EvalReport rep = gcrmf::run_experiment(sub);
        f1s.push_back(rep.headline.f1);
        precisions.push_back(rep.headline.precision);
        recalls.push_back(rep.headline.recall);
        fprs.push_back(rep.headline.fpr);
        std::cout << "seed " << s << " f1 " << gcrmf::format_double(rep.headline.f1) << '\n';
    }
    std::vector<std::pair<std::string, gcrmf::BoxStats>> rows{
        {"f1", gcrmf::box_stats(f1s)},
        {"precision", gcrmf::box_stats(precisions)},
        {"recall", gcrmf::box_stats(recalls)},
        {"fpr", gcrmf::box_stats(fprs)},
    };
    gcrmf::write_boxstats_csv(out_path(cfg, "boxstats.csv"), rows);
    std::cout << "median f1 " << gcrmf::format_double(gcrmf::box_stats(f1s).median) << " over "
              << cfg.eval.seeds.size() << " seeds -> " << cfg.out_dir << "/boxstats.csv\n";
    return kExitOk;
}

int cmd_stream(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    if (cfg.online.checkpoint.empty())
        throw gcrmf::ConfigError("stream: online.checkpoint required");
    if (cfg.online.stream_file.empty())
        throw gcrmf::ConfigError("stream: online.stream_file required");

    gcrmf::Dataset data = gcrmf::build_dataset(cfg);
    gcrmf::SubgraphModel model(cfg.model, gcrmf::resolve_schemas(cfg));
    gcrmf::ParamStore store = gcrmf::ParamStore::load(cfg.online.checkpoint);
    std::vector<gcrmf::StreamEdge> edges = gcrmf::load_stream(cfg.online.stream_file);

    gcrmf::OnlineMonitor monitor(std::move(data.graph), std::move(model), std::move(store),
                                 cfg.online.alpha, cfg.online.frontier);
    gcrmf::IngestReport rep = monitor.ingest(edges);
    gcrmf::write_alerts_csv(out_path(cfg, "alerts.csv"), monitor.score_alerts());
    std::cout << "ingested " << rep.edges_added << " edges, refreshed " << rep.affected.size()
              << " nodes, watermark " << rep.last_processed << " -> " << cfg.out_dir
              << "/alerts.csv\n";
    return kExitOk;
}

int cmd_rules(const CommonArgs& args) {
    gcrmf::RunConfig cfg = load_config(args);
    gcrmf::Dataset data = gcrmf::build_dataset(cfg);
    gcrmf::RuleSet rs = cfg.rules_file.empty() ? gcrmf::matched_rules(cfg.dataset.synthetic)
                                               : gcrmf::load_rules(cfg.rules_file);
    gcrmf::RuleMatchResult r = gcrmf::rulematch_score(data.graph.full_view(), rs);
    gcrmf::write_alerts_csv(out_path(cfg, "alerts.csv"), r.ranked);
    std::size_t flagged = 0;
    for (const auto& [v, s] : r.ranked)
        if (s > 0.0) ++flagged;
    std::cout << "rules flagged " << flagged << " of " << r.ranked.size() << " nodes -> "
              << cfg.out_dir << "/alerts.csv\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heterogeneous temporal-graph transaction monitor"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* generate = app.add_subcommand("generate", "emit a synthetic labeled dataset");
    CLI::App* ingest = app.add_subcommand("ingest", "convert an elliptic bundle to a graph file");
    CLI::App* train = app.add_subcommand("train", "train the configured method");
    CLI::App* eval = app.add_subcommand("eval", "train and evaluate, optionally across seeds");
    CLI::App* stream = app.add_subcommand("stream", "apply a JSON-lines edge stream online");
    CLI::App* rules = app.add_subcommand("rules", "score nodes with the rule engine");
    for (CLI::App* sub : {generate, ingest, train, eval, stream, rules}) add_common(sub, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the usage message
        return kExitUsage;
    }

    if (!std::filesystem::exists(args.config_path)) {
        std::cerr << "config file not found: " << args.config_path << '\n';
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(args);
        if (ingest->parsed()) return cmd_ingest(args);
        if (train->parsed()) return cmd_train(args);
        if (eval->parsed()) return cmd_eval(args);
        if (stream->parsed()) return cmd_stream(args);
        if (rules->parsed()) return cmd_rules(args);
        std::cerr << "no subcommand selected\n";
        return kExitUsage;
    } catch (const gcrmf::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
