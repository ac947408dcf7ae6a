// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/gcn.hpp"
#include "gcrmf/model.hpp"
#include "gcrmf/rng.hpp"
#include "gcrmf/synthetic.hpp"
#include "gcrmf/toml.hpp"
#include "gcrmf/training.hpp"

namespace gcrmf {

enum class Method { Gcrmf, GatAmlp, SemiGcn, RuleMatch };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Gcrmf: return "gcrmf";
        case Method::GatAmlp: return "gat-amlp";
        case Method::SemiGcn: return "semi-gcn";
        case Method::RuleMatch: return "rulematch";
    }
    throw DomainError("unknown method");
}

inline Method parse_method(const std::string& s) {
    if (s == "gcrmf") return Method::Gcrmf;
    if (s == "gat-amlp") return Method::GatAmlp;
    if (s == "semi-gcn") return Method::SemiGcn;
    if (s == "rulematch") return Method::RuleMatch;
    throw ConfigError("config: unknown method '" + s +
                      "' (expected gcrmf, gat-amlp, semi-gcn, or rulematch)");
}

struct DatasetConfig {
    enum class Kind { Synthetic, Elliptic, GraphFile };
    Kind kind = Kind::Synthetic;
    SyntheticSpec synthetic;
    std::string elliptic_dir;
    std::string graph_path;
    std::string truth_path; // optional companion of graph_path
};

struct OnlineRunConfig {
    double alpha = 0.3;
    int frontier = 0; // 0 means "match the encoder depth"
    std::string checkpoint;
    std::string stream_file;
};

struct EvalRunConfig {
    int windows = 5;
    std::vector<double> thresholds{0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<std::uint64_t> seeds; // empty means "just the top-level seed"
};

struct RunConfig {
    Method method = Method::Gcrmf;
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    DatasetConfig dataset;
    ModelConfig model;
    std::string schema_file; // empty means built-in schemas
    TrainConfig training;
    double train_fraction = 0.6;
    OnlineRunConfig online;
    EvalRunConfig eval;
    std::string rules_file; // empty means generator-matched defaults
    GcnConfig gcn;

    void validate() const {
        if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
        if (train_fraction <= 0.0 || train_fraction >= 1.0)
            throw ConfigError("config: train_fraction must lie in (0,1)");
        if (online.alpha < 0.0 || online.alpha > 1.0)
            throw ConfigError("config: online alpha must lie in [0,1]");
        if (online.frontier < 0) throw ConfigError("config: online frontier must be >= 0");
        if (eval.windows < 1) throw ConfigError("config: eval windows must be >= 1");
        for (double t : eval.thresholds)
            if (t <= 0.0 || t >= 1.0)
                throw ConfigError("config: thresholds must lie in (0,1)");
        if (eval.thresholds.empty()) throw ConfigError("config: at least one threshold");
        if (dataset.kind == DatasetConfig::Kind::Synthetic) dataset.synthetic.validate();
        if (dataset.kind == DatasetConfig::Kind::Elliptic && dataset.elliptic_dir.empty())
            throw ConfigError("config: dataset.dir required for the elliptic kind");
        if (dataset.kind == DatasetConfig::Kind::GraphFile && dataset.graph_path.empty())
            throw ConfigError("config: dataset.path required for the graph-file kind");
        training.validate();
        gcn.validate();
        if (model.encoder.layer_count < 1 || model.encoder.hidden_dim < 1)
            throw ConfigError("config: encoder layers and hidden must be >= 1");
        if (model.attention_dim < 1) throw ConfigError("config: attention_dim must be >= 1");
        if (model.max_per_hop < 1 || model.max_total < 1)
            throw ConfigError("config: path sampling caps must be >= 1");
    }

    // canonical flat rendering of every effective setting; hashing this keeps
    // report provenance stable across byte-level config formatting changes
    std::string canonical() const {
        std::ostringstream o;
        o << "method=" << to_string(method) << '\n';
        o << "seed=" << seed << '\n';
        auto kind_name = [&]() {
            switch (dataset.kind) {
                case DatasetConfig::Kind::Synthetic: return "synthetic";
                case DatasetConfig::Kind::Elliptic: return "elliptic";
                case DatasetConfig::Kind::GraphFile: return "graph-file";
            }
            return "?";
        };
        o << "dataset.kind=" << kind_name() << '\n';
        const SyntheticSpec& sp = dataset.synthetic;
        o << "dataset.nodes=" << sp.n_background_nodes << '\n';
        o << "dataset.windows=" << sp.n_windows << '\n';
        o << "dataset.steps_per_window=" << sp.steps_per_window << '\n';
        o << "dataset.circular=" << sp.circular << '\n';
        o << "dataset.microburst=" << sp.microburst << '\n';
        o << "dataset.layered=" << sp.layered << '\n';
        o << "dataset.avg_out_degree=" << sp.avg_out_degree << '\n';
        o << "dataset.licit_fraction=" << sp.licit_fraction << '\n';
        o << "dataset.cycle_len_min=" << sp.cycle_len_min << '\n';
        o << "dataset.cycle_len_max=" << sp.cycle_len_max << '\n';
        o << "dataset.burst_min_count=" << sp.burst_min_count << '\n';
        o << "dataset.burst_senders=" << sp.burst_senders << '\n';
        o << "dataset.burst_max_amount=" << sp.burst_max_amount << '\n';
        o << "dataset.layer_chain_min=" << sp.layer_chain_min << '\n';
        o << "dataset.layer_decay=" << sp.layer_decay << '\n';
        o << "dataset.dir=" << dataset.elliptic_dir << '\n';
        o << "dataset.path=" << dataset.graph_path << '\n';
        o << "dataset.truth=" << dataset.truth_path << '\n';
        o << "encoder.layers=" << model.encoder.layer_count << '\n';
        o << "encoder.hidden=" << model.encoder.hidden_dim << '\n';
        o << "encoder.temporal=" << (model.encoder.temporal_channel ? 1 : 0) << '\n';
        o << "encoder.category_onehot=" << (model.encoder.category_onehot ? 1 : 0) << '\n';
        o << "encoder.direction="
          << (model.encoder.direction == Direction::In
                  ? "in"
                  : model.encoder.direction == Direction::Out ? "out" : "both")
          << '\n';
        o << "metapath.schema_file=" << schema_file << '\n';
        o << "metapath.attention_dim=" << model.attention_dim << '\n';
        o << "metapath.max_per_hop=" << model.max_per_hop << '\n';
        o << "metapath.max_total=" << model.max_total << '\n';
        o << "training.tau=" << training.contrastive.tau << '\n';
        o << "training.negatives=" << training.contrastive.negatives_per_anchor << '\n';
        o << "training.augmentation="
          << (training.contrastive.augmentation == Augmentation::EdgeDropout ? "edge-dropout"
                                                                             : "resample")
          << '\n';
        o << "training.dropout_rate=" << training.contrastive.dropout_rate << '\n';
        o << "training.batch_size=" << training.batch_size << '\n';
        o << "training.epochs_per_window=" << training.epochs_per_window << '\n';
        o << "training.lr=" << training.lr << '\n';
        o << "training.gamma_loss=" << training.weights.gamma_loss << '\n';
        o << "training.eta=" << training.weights.eta << '\n';
        o << "training.train_fraction=" << train_fraction << '\n';
        o << "online.alpha=" << online.alpha << '\n';
        o << "online.frontier=" << online.frontier << '\n';
        o << "eval.windows=" << eval.windows << '\n';
        o << "eval.thresholds=";
        for (double t : eval.thresholds) o << t << ';';
        o << '\n';
        o << "eval.seeds=";
        for (std::uint64_t s : eval.seeds) o << s << ';';
        o << '\n';
        o << "rules.file=" << rules_file << '\n';
        o << "gcn.hidden=" << gcn.hidden << '\n';
        o << "gcn.epochs=" << gcn.epochs << '\n';
        o << "gcn.lr=" << gcn.lr << '\n';
        return o.str();
    }

    std::string config_hash() const {
        const std::uint64_t h = fnv1a64(canonical());
        std::ostringstream o;
        o << std::hex;
        for (int shift = 60; shift >= 0; shift -= 4) o << ((h >> shift) & 0xF);
        return o.str();
    }

    // the top-level seed feeds every seeded component
    RunConfig with_seed(std::uint64_t s) const {
        RunConfig c = *this;
        c.seed = s;
        c.dataset.synthetic.seed = s;
        c.training.seed = s;
        c.gcn.seed = s;
        return c;
    }
};

namespace detail {

inline const std::set<std::string>& allowed_config_keys() {
    static const std::set<std::string> keys{
        "method", "seed", "out_dir",
        "dataset.kind", "dataset.nodes", "dataset.windows", "dataset.steps_per_window",
        "dataset.circular", "dataset.microburst", "dataset.layered", "dataset.avg_out_degree",
        "dataset.licit_fraction", "dataset.cycle_len_min", "dataset.cycle_len_max",
        "dataset.burst_min_count", "dataset.burst_senders", "dataset.burst_max_amount",
        "dataset.layer_chain_min", "dataset.layer_decay", "dataset.dir", "dataset.path",
        "dataset.truth",
        "encoder.layers", "encoder.hidden", "encoder.temporal", "encoder.category_onehot",
        "encoder.direction",
        "metapath.schema_file", "metapath.attention_dim", "metapath.max_per_hop",
        "metapath.max_total",
        "training.tau", "training.negatives", "training.augmentation", "training.dropout_rate",
        "training.batch_size", "training.epochs_per_window", "training.lr",
        "training.gamma_loss", "training.eta", "training.train_fraction",
        "online.alpha", "online.frontier", "online.checkpoint", "online.stream_file",
        "eval.windows", "eval.thresholds", "eval.seeds",
        "rules.file",
        "gcn.hidden", "gcn.epochs", "gcn.lr",
    };
    return keys;
}

inline int toml_int(const TomlTable& t, const std::string& key, int fallback) {
    if (!t.has(key)) return fallback;
    const std::int64_t v = t.get(key).as_int(key);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": out of range");
    return static_cast<int>(v);
}

inline double toml_double(const TomlTable& t, const std::string& key, double fallback) {
    return t.has(key) ? t.get(key).as_double(key) : fallback;
}

inline bool toml_bool(const TomlTable& t, const std::string& key, bool fallback) {
    return t.has(key) ? t.get(key).as_bool(key) : fallback;
}

inline std::string toml_string(const TomlTable& t, const std::string& key,
                               const std::string& fallback) {
    return t.has(key) ? t.get(key).as_string(key) : fallback;
}

} // namespace detail

inline RunConfig config_from_toml(const TomlTable& t) {
    for (const std::string& k : t.keys())
        if (!detail::allowed_config_keys().count(k))
            throw ConfigError("config: unknown key '" + k + "'");

    RunConfig c;
    c.method = parse_method(detail::toml_string(t, "method", "gcrmf"));
    if (t.has("seed")) {
        const std::int64_t s = t.get("seed").as_int("seed");
        if (s < 0) throw ConfigError("seed: must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    c.out_dir = detail::toml_string(t, "out_dir", c.out_dir);

    const std::string kind = detail::toml_string(t, "dataset.kind", "synthetic");
    if (kind == "synthetic")
        c.dataset.kind = DatasetConfig::Kind::Synthetic;
    else if (kind == "elliptic")
        c.dataset.kind = DatasetConfig::Kind::Elliptic;
    else if (kind == "graph-file")
        c.dataset.kind = DatasetConfig::Kind::GraphFile;
    else
        throw ConfigError("dataset.kind: unknown kind '" + kind + "'");

    SyntheticSpec& sp = c.dataset.synthetic;
    sp.n_background_nodes = detail::toml_int(t, "dataset.nodes", sp.n_background_nodes);
    sp.n_windows = detail::toml_int(t, "dataset.windows", sp.n_windows);
    sp.steps_per_window = detail::toml_int(t, "dataset.steps_per_window", sp.steps_per_window);
    sp.circular = detail::toml_int(t, "dataset.circular", sp.circular);
    sp.microburst = detail::toml_int(t, "dataset.microburst", sp.microburst);
    sp.layered = detail::toml_int(t, "dataset.layered", sp.layered);
    sp.avg_out_degree = detail::toml_double(t, "dataset.avg_out_degree", sp.avg_out_degree);
    sp.licit_fraction = detail::toml_double(t, "dataset.licit_fraction", sp.licit_fraction);
    sp.cycle_len_min = detail::toml_int(t, "dataset.cycle_len_min", sp.cycle_len_min);
    sp.cycle_len_max = detail::toml_int(t, "dataset.cycle_len_max", sp.cycle_len_max);
    sp.burst_min_count = detail::toml_int(t, "dataset.burst_min_count", sp.burst_min_count);
    sp.burst_senders = detail::toml_int(t, "dataset.burst_senders", sp.burst_senders);
    sp.burst_max_amount =
        detail::toml_double(t, "dataset.burst_max_amount", sp.burst_max_amount);
    sp.layer_chain_min = detail::toml_int(t, "dataset.layer_chain_min", sp.layer_chain_min);
    sp.layer_decay = detail::toml_double(t, "dataset.layer_decay", sp.layer_decay);
    sp.seed = c.seed;
    c.dataset.elliptic_dir = detail::toml_string(t, "dataset.dir", "");
    c.dataset.graph_path = detail::toml_string(t, "dataset.path", "");
    c.dataset.truth_path = detail::toml_string(t, "dataset.truth", "");

    EncoderConfig& ec = c.model.encoder;
    ec.layer_count = detail::toml_int(t, "encoder.layers", ec.layer_count);
    ec.hidden_dim = detail::toml_int(t, "encoder.hidden", ec.hidden_dim);
    ec.temporal_channel = detail::toml_bool(t, "encoder.temporal", ec.temporal_channel);
    ec.category_onehot = detail::toml_bool(t, "encoder.category_onehot", ec.category_onehot);
    const std::string dir = detail::toml_string(t, "encoder.direction", "both");
    if (dir == "in")
        ec.direction = Direction::In;
    else if (dir == "out")
        ec.direction = Direction::Out;
    else if (dir == "both")
        ec.direction = Direction::Both;
    else
        throw ConfigError("encoder.direction: expected in, out, or both");
    // the ablated encoder drops the recency channel
    if (c.method == Method::GatAmlp) ec.temporal_channel = false;

    c.schema_file = detail::toml_string(t, "metapath.schema_file", "");
    c.model.attention_dim = detail::toml_int(t, "metapath.attention_dim", c.model.attention_dim);
    c.model.max_per_hop = detail::toml_int(t, "metapath.max_per_hop", c.model.max_per_hop);
    c.model.max_total = detail::toml_int(t, "metapath.max_total", c.model.max_total);

    TrainConfig& tc = c.training;
    tc.contrastive.tau = detail::toml_double(t, "training.tau", tc.contrastive.tau);
    tc.contrastive.negatives_per_anchor =
        detail::toml_int(t, "training.negatives", tc.contrastive.negatives_per_anchor);
    const std::string aug = detail::toml_string(t, "training.augmentation", "resample");
    if (aug == "resample")
        tc.contrastive.augmentation = Augmentation::InstanceResample;
    else if (aug == "edge-dropout")
        tc.contrastive.augmentation = Augmentation::EdgeDropout;
    else
        throw ConfigError("training.augmentation: expected resample or edge-dropout");
    tc.contrastive.dropout_rate =
        detail::toml_double(t, "training.dropout_rate", tc.contrastive.dropout_rate);
    tc.batch_size = detail::toml_int(t, "training.batch_size", tc.batch_size);
    tc.epochs_per_window = detail::toml_int(t, "training.epochs_per_window", tc.epochs_per_window);
    tc.lr = detail::toml_double(t, "training.lr", tc.lr);
    tc.weights.gamma_loss = detail::toml_double(t, "training.gamma_loss", tc.weights.gamma_loss);
    tc.weights.eta = detail::toml_double(t, "training.eta", tc.weights.eta);
    tc.seed = c.seed;
    c.train_fraction = detail::toml_double(t, "training.train_fraction", c.train_fraction);

    c.online.alpha = detail::toml_double(t, "online.alpha", c.online.alpha);
    c.online.frontier = detail::toml_int(t, "online.frontier", c.online.frontier);
    c.online.checkpoint = detail::toml_string(t, "online.checkpoint", "");
    c.online.stream_file = detail::toml_string(t, "online.stream_file", "");

    c.eval.windows = detail::toml_int(t, "eval.windows", c.eval.windows);
    if (t.has("eval.thresholds")) {
        c.eval.thresholds.clear();
        for (const TomlValue& v : t.get("eval.thresholds").as_array("eval.thresholds"))
            c.eval.thresholds.push_back(v.as_double("eval.thresholds"));
    }
    if (t.has("eval.seeds")) {
        for (const TomlValue& v : t.get("eval.seeds").as_array("eval.seeds")) {
            const std::int64_t s = v.as_int("eval.seeds");
            if (s < 0) throw ConfigError("eval.seeds: must be >= 0");
            c.eval.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }

    c.rules_file = detail::toml_string(t, "rules.file", "");

    c.gcn.hidden = detail::toml_int(t, "gcn.hidden", c.gcn.hidden);
    c.gcn.epochs = detail::toml_int(t, "gcn.epochs", c.gcn.epochs);
    c.gcn.lr = detail::toml_double(t, "gcn.lr", c.gcn.lr);
    c.gcn.seed = c.seed;

    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    return config_from_toml(load_toml(path));
}

} // namespace gcrmf
