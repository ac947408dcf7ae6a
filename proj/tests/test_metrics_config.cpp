// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gcrmf/config.hpp"
#include "gcrmf/csv.hpp"
#include "gcrmf/metrics.hpp"
#include "gcrmf/toml.hpp"

#include "test_support.hpp"

using namespace gcrmf;

TEST_CASE("confusion counts produce the four standard rates") {
    BinaryStats s = confusion_stats(3, 1, 5, 1);
    CHECK(s.precision == 0.75);
    CHECK(s.recall == 0.75);
    CHECK(s.f1 == Catch::Approx(0.75));
    CHECK(s.fpr == Catch::Approx(1.0 / 6.0));

    // zero-denominator conventions pin every rate to 0
    s = confusion_stats(0, 0, 5, 2);
    CHECK(s.precision == 0.0);
    CHECK(s.f1 == 0.0);
    s = confusion_stats(0, 3, 4, 0);
    CHECK(s.recall == 0.0);
    s = confusion_stats(2, 0, 0, 1);
    CHECK(s.fpr == 0.0);
    s = confusion_stats(0, 0, 0, 0);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
    CHECK(s.fpr == 0.0);

    CHECK_THROWS_AS(confusion_stats(-1, 0, 0, 0), DomainError);
}

TEST_CASE("f1 agrees with its confusion-count form") {
    auto rng = make_rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int tp = static_cast<int>(rng() % 20), fp = static_cast<int>(rng() % 20);
        const int tn = static_cast<int>(rng() % 20), fn = static_cast<int>(rng() % 20);
        BinaryStats s = confusion_stats(tp, fp, tn, fn);
        const double denom = 2.0 * tp + fp + fn;
        const double direct = denom > 0.0 ? 2.0 * tp / denom : 0.0;
        CHECK(s.f1 == Catch::Approx(direct).margin(1e-12));
    }
}

TEST_CASE("label vectors reduce to the right confusion matrix") {
    BinaryStats s = evaluate_binary({1, 1, 0, 0, 1, 0}, {1, 0, 1, 0, 1, 0});
    CHECK(s.tp == 2);
    CHECK(s.fn == 1);
    CHECK(s.fp == 1);
    CHECK(s.tn == 2);
    CHECK_THROWS_AS(evaluate_binary({1, 0}, {1}), DimensionError);
    CHECK_THROWS_AS(evaluate_binary({1, 2}, {1, 0}), DomainError);
    CHECK_THROWS_AS(evaluate_binary({1, 0}, {1, -1}), DomainError);
}

TEST_CASE("threshold precision counts exactly the selected nodes") {
    std::vector<std::pair<NodeId, double>> scored = {
        {0, 0.9}, {1, 0.8}, {2, 0.7}, {3, 0.2}};
    auto p = precision_at_k(scored, {0, 2}, 0.5);
    CHECK(p.valid);
    CHECK(p.k == 3);
    CHECK(p.precision == Catch::Approx(2.0 / 3.0));

    p = precision_at_k(scored, {0, 2}, 0.95); // nothing selected
    CHECK_FALSE(p.valid);
    CHECK(p.k == 0);

    CHECK_THROWS_AS(precision_at_k({{0, 0.5}, {0, 0.6}}, {}, 0.1), DataError);
    CHECK_THROWS_AS(precision_at_k(scored, {9}, 0.1), DataError);
}

TEST_CASE("threshold precision matches a direct recount") {
    auto rng = make_rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::pair<NodeId, double>> scored;
        std::vector<NodeId> positives;
        const int n = 10 + static_cast<int>(rng() % 30);
        for (NodeId v = 0; v < n; ++v) {
            scored.emplace_back(v, support::unit(rng));
            if (rng() % 3 == 0) positives.push_back(v);
        }
        const double thr = support::unit(rng);
        auto got = precision_at_k(scored, positives, thr);
        int k = 0, hits = 0;
        for (const auto& [v, s] : scored) {
            if (s < thr) continue;
            ++k;
            for (NodeId pv : positives)
                if (pv == v) ++hits;
        }
        CHECK(got.k == k);
        CHECK(got.valid == (k > 0));
        if (k > 0) CHECK(got.precision == Catch::Approx(double(hits) / k));
    }
}

TEST_CASE("box summaries interpolate quartiles linearly") {
    BoxStats b = box_stats({4.0, 1.0, 3.0, 2.0}); // sorting is the function's job
    CHECK(b.min == 1.0);
    CHECK(b.q1 == Catch::Approx(1.75));
    CHECK(b.median == Catch::Approx(2.5));
    CHECK(b.q3 == Catch::Approx(3.25));
    CHECK(b.max == 4.0);

    b = box_stats({7.0});
    CHECK(b.min == 7.0);
    CHECK(b.q1 == 7.0);
    CHECK(b.median == 7.0);
    CHECK(b.max == 7.0);

    b = box_stats({1.0, 2.0, 100.0});
    CHECK(b.median == 2.0); // odd length: exact middle

    CHECK_THROWS_AS(box_stats({}), DomainError);
}

TEST_CASE("report serialization uses null for unselectable thresholds") {
    EvalReport r;
    r.method = "gcrmf";
    r.seed = 7;
    r.config_hash = "abc";
    PrecisionAtK good;
    good.threshold = 0.5;
    good.k = 4;
    good.precision = 0.25;
    good.valid = true;
    PrecisionAtK empty;
    empty.threshold = 0.9;
    r.at_k = {good, empty};
    WindowMetrics w;
    w.window = 2;
    w.start = 10;
    w.end = 19;
    w.n_scored = 12;
    w.stats = confusion_stats(1, 2, 3, 4);
    r.windows = {w};

    nlohmann::json j = report_to_json(r);
    CHECK(j["method"] == "gcrmf");
    CHECK(j["precision_at_k"][0]["precision"] == 0.25);
    CHECK(j["precision_at_k"][1]["precision"].is_null());
    CHECK(j["precision_at_k"][1]["k"] == 0);
    CHECK(j["windows"][0]["window"] == 2);
    CHECK(j["windows"][0]["stats"]["tp"] == 1);
    CHECK(j["windows"][0]["stats"]["recall"] == 0.2);
}

TEST_CASE("csv doubles survive a parse round trip") {
    auto rng = make_rng(77);
    std::vector<double> samples = {0.0, -0.0, 1.0, 0.1, -3.25, 1e-300, 1e300,
                                   std::numeric_limits<double>::min(),
                                   std::numeric_limits<double>::denorm_min()};
    for (int i = 0; i < 200; ++i)
        samples.push_back((support::unit(rng) - 0.5) * std::pow(10.0, double(rng() % 40) - 20.0));
    for (double x : samples) {
        const std::string s = format_double(x);
        double back = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(res.ec == std::errc{});
        CHECK(back == x);
    }
}

TEST_CASE("csv writers emit stable bytes") {
    support::TempDir dir("csv");
    const std::string alerts = dir.file("alerts.csv");
    write_alerts_csv(alerts, {{3, 0.5}, {1, 0.25}});
    CHECK(support::read_file(alerts) == "node_id,score\n3,0.5\n1,0.25\n");

    struct Row {
        int window, epoch;
        double l_struct, l_temp, l_cls, l_total;
    };
    const std::string loss = dir.file("loss.csv");
    write_loss_csv(loss, std::vector<Row>{{0, 1, 0.5, 0.25, 1.0, 1.75}});
    CHECK(support::read_file(loss) ==
          "window,epoch,l_struct,l_temp,l_cls,l_total\n0,1,0.5,0.25,1,1.75\n");

    const std::string box = dir.file("box.csv");
    BoxStats b;
    b.min = 0.0;
    b.q1 = 0.25;
    b.median = 0.5;
    b.q3 = 0.75;
    b.max = 1.0;
    write_boxstats_csv(box, {{"f1", b}});
    CHECK(support::read_file(box) == "metric,min,q1,median,q3,max\nf1,0,0.25,0.5,0.75,1\n");
}

TEST_CASE("the config reader understands its toml subset") {
    TomlTable t = parse_toml(
        "top = 1\n"
        "[alpha]\n"
        "name = \"fraud # not a comment\"  # real comment\n"
        "rate = 0.25\n"
        "count = -3\n"
        "on = true\n"
        "off = false\n"
        "arr = [1, 2, 3,]\n"
        "nested = [[1, 2], [3]]\n"
        "esc = \"a\\\"b\\\\c\\nd\\te\"\n"
        "\n"
        "[beta]\n"
        "name = \"other\"\n");
    CHECK(t.get("top").as_int("top") == 1);
    CHECK(t.get("alpha.name").as_string("x") == "fraud # not a comment");
    CHECK(t.get("alpha.rate").as_double("x") == 0.25);
    CHECK(t.get("alpha.count").as_int("x") == -3);
    CHECK(t.get("alpha.on").as_bool("x"));
    CHECK_FALSE(t.get("alpha.off").as_bool("x"));
    const auto& arr = t.get("alpha.arr").as_array("x");
    REQUIRE(arr.size() == 3); // trailing comma tolerated
    CHECK(arr[2].as_int("x") == 3);
    const auto& nested = t.get("alpha.nested").as_array("x");
    REQUIRE(nested.size() == 2);
    CHECK(nested[0].as_array("x").size() == 2);
    CHECK(nested[1].as_array("x")[0].as_int("x") == 3);
    CHECK(t.get("alpha.esc").as_string("x") == "a\"b\\c\nd\te");
    CHECK(t.get("beta.name").as_string("x") == "other");
    CHECK(t.has("alpha.rate"));
    CHECK_FALSE(t.has("alpha.missing"));
    CHECK_THROWS_AS(t.get("alpha.missing"), ConfigError);

    // ints read as doubles, but not the reverse
    CHECK(t.get("alpha.count").as_double("x") == -3.0);
    CHECK_THROWS_AS(t.get("alpha.rate").as_int("x"), ConfigError);
    CHECK_THROWS_AS(t.get("alpha.on").as_string("x"), ConfigError);
}

TEST_CASE("config syntax errors name the offending line") {
    auto line_of = [](const std::string& text) -> std::string {
        try {
            parse_toml(text);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(line_of("a = 1\nb 2\n").find("line 2") != std::string::npos);
    CHECK(line_of("a = 1\na = 2\n").find("duplicate key") != std::string::npos);
    CHECK(line_of("x = \"unterminated\n").find("line 1") != std::string::npos);
    CHECK(line_of("x = \"bad \\q escape\"\n").find("escape") != std::string::npos);
    CHECK(line_of("[bad section\n").find("line 1") != std::string::npos);
    CHECK(line_of("[]\n").find("invalid section") != std::string::npos);
    CHECK(line_of("bad key! = 1\n").find("invalid key") != std::string::npos);
    CHECK(line_of("x = @nope\n").find("cannot parse value") != std::string::npos);
    CHECK(line_of("x =\n").find("empty value") != std::string::npos);
    CHECK(line_of("x = [1, 2\n").find("malformed array") != std::string::npos);
    CHECK_THROWS_AS(load_toml("/nonexistent/cfg.toml"), DataError);
}

TEST_CASE("run configs start from usable defaults") {
    RunConfig c = config_from_toml(parse_toml(""));
    CHECK(c.method == Method::Gcrmf);
    CHECK(c.seed == 42);
    CHECK(c.out_dir == "out");
    CHECK(c.dataset.kind == DatasetConfig::Kind::Synthetic);
    CHECK(c.eval.windows == 5);
    REQUIRE(c.eval.thresholds.size() == 5);
    CHECK(c.eval.thresholds.front() == 0.5);
    CHECK(c.eval.thresholds.back() == 0.9);
    CHECK(c.model.encoder.temporal_channel);
    CHECK(c.training.seed == c.seed);
    CHECK(c.gcn.seed == c.seed);
    CHECK(c.dataset.synthetic.seed == c.seed);
}

TEST_CASE("run configs propagate every overridden key") {
    RunConfig c = config_from_toml(parse_toml(
        "method = \"semi-gcn\"\n"
        "seed = 9\n"
        "out_dir = \"runs/x\"\n"
        "[dataset]\n"
        "nodes = 500\n"
        "windows = 4\n"
        "circular = 2\n"
        "[encoder]\n"
        "layers = 3\n"
        "hidden = 12\n"
        "direction = \"out\"\n"
        "category_onehot = false\n"
        "[metapath]\n"
        "attention_dim = 9\n"
        "[training]\n"
        "tau = 0.4\n"
        "negatives = 7\n"
        "augmentation = \"edge-dropout\"\n"
        "batch_size = 16\n"
        "epochs_per_window = 2\n"
        "lr = 0.002\n"
        "gamma_loss = 0.5\n"
        "eta = 2.0\n"
        "train_fraction = 0.7\n"
        "[online]\n"
        "alpha = 0.2\n"
        "frontier = 3\n"
        "[eval]\n"
        "windows = 2\n"
        "thresholds = [0.4, 0.6]\n"
        "seeds = [1, 2, 3]\n"
        "[gcn]\n"
        "hidden = 5\n"
        "epochs = 11\n"
        "lr = 0.3\n"));
    CHECK(c.method == Method::SemiGcn);
    CHECK(c.seed == 9);
    CHECK(c.out_dir == "runs/x");
    CHECK(c.dataset.synthetic.n_background_nodes == 500);
    CHECK(c.dataset.synthetic.n_windows == 4);
    CHECK(c.dataset.synthetic.circular == 2);
    CHECK(c.dataset.synthetic.seed == 9);
    CHECK(c.model.encoder.layer_count == 3);
    CHECK(c.model.encoder.hidden_dim == 12);
    CHECK(c.model.encoder.direction == Direction::Out);
    CHECK_FALSE(c.model.encoder.category_onehot);
    CHECK(c.model.attention_dim == 9);
    CHECK(c.training.contrastive.tau == 0.4);
    CHECK(c.training.contrastive.negatives_per_anchor == 7);
    CHECK(c.training.contrastive.augmentation == Augmentation::EdgeDropout);
    CHECK(c.training.batch_size == 16);
    CHECK(c.training.epochs_per_window == 2);
    CHECK(c.training.lr == 0.002);
    CHECK(c.training.weights.gamma_loss == 0.5);
    CHECK(c.training.weights.eta == 2.0);
    CHECK(c.training.seed == 9);
    CHECK(c.train_fraction == 0.7);
    CHECK(c.online.alpha == 0.2);
    CHECK(c.online.frontier == 3);
    CHECK(c.eval.windows == 2);
    CHECK(c.eval.thresholds == std::vector<double>{0.4, 0.6});
    CHECK(c.eval.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.gcn.hidden == 5);
    CHECK(c.gcn.epochs == 11);
    CHECK(c.gcn.lr == 0.3);
    CHECK(c.gcn.seed == 9);
}

TEST_CASE("the ablated method forces the recency channel off") {
    RunConfig c = config_from_toml(parse_toml(
        "method = \"gat-amlp\"\n[encoder]\ntemporal = true\n"));
    CHECK(c.method == Method::GatAmlp);
    CHECK_FALSE(c.model.encoder.temporal_channel);

    for (const char* name : {"gcrmf", "gat-amlp", "semi-gcn", "rulematch"})
        CHECK(to_string(parse_method(name)) == name);
    CHECK_THROWS_AS(parse_method("deepwalk"), ConfigError);
}

TEST_CASE("run configs reject out-of-contract values") {
    CHECK_THROWS_AS(config_from_toml(parse_toml("mystery = 1\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[dataset]\nmystery = 1\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("seed = -1\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("method = \"bogus\"\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[dataset]\nkind = \"bogus\"\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[dataset]\nkind = \"elliptic\"\n")),
                    ConfigError); // dir required
    CHECK_THROWS_AS(config_from_toml(parse_toml("[dataset]\nkind = \"graph-file\"\n")),
                    ConfigError); // path required
    CHECK_THROWS_AS(config_from_toml(parse_toml("[encoder]\ndirection = \"sideways\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[training]\naugmentation = \"prune\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[training]\ntrain_fraction = 1.0\n")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[online]\nalpha = 1.5\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[eval]\nwindows = 0\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[eval]\nthresholds = [1.5]\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[eval]\nthresholds = []\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[eval]\nseeds = [-4]\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("[gcn]\nhidden = 0\n")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(parse_toml("seed = \"lots\"\n")), ConfigError);
}

TEST_CASE("config hashes identify effective settings") {
    RunConfig a = config_from_toml(parse_toml("seed = 5\n"));
    RunConfig b = config_from_toml(parse_toml("seed = 5\n# cosmetic\n"));
    CHECK(a.config_hash() == b.config_hash());
    CHECK(a.config_hash().size() == 16);
    for (char ch : a.config_hash()) CHECK(std::isxdigit(static_cast<unsigned char>(ch)));

    RunConfig c = config_from_toml(parse_toml("seed = 6\n"));
    CHECK(a.config_hash() != c.config_hash());
    RunConfig d = config_from_toml(parse_toml("seed = 5\n[training]\nlr = 0.123\n"));
    CHECK(a.config_hash() != d.config_hash());

    RunConfig reseeded = a.with_seed(99);
    CHECK(reseeded.seed == 99);
    CHECK(reseeded.dataset.synthetic.seed == 99);
    CHECK(reseeded.training.seed == 99);
    CHECK(reseeded.gcn.seed == 99);
    CHECK(a.seed == 5); // original untouched
}

TEST_CASE("configs load from disk like from memory") {
    support::TempDir dir("cfg");
    const std::string path = dir.file("run.toml");
    support::write_file(path, "method = \"rulematch\"\nseed = 3\n");
    RunConfig c = load_run_config(path);
    CHECK(c.method == Method::RuleMatch);
    CHECK(c.seed == 3);
    CHECK_THROWS_AS(load_run_config(dir.file("missing.toml")), DataError);
}
