// stancegraph: two-stage stance labeling over social-media interaction graphs.
//
// Stage 1 propagates seed-hashtag stances across a user-hashtag bipartite
// graph; stage 2 trains a graph neural network on the resulting soft labels
// over the signed user-user interaction graph. Every run that writes files
// also writes a manifest (inputs, outputs, digests, resolved config) beside
// them, so any artifact can be traced back to exactly one invocation.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sg/annotate.hpp"
#include "sg/bipartite_graph.hpp"
#include "sg/embed_ingest.hpp"
#include "sg/errors.hpp"
#include "sg/experiments.hpp"
#include "sg/kernels.hpp"
#include "sg/label_prop.hpp"
#include "sg/layers.hpp"
#include "sg/manifest.hpp"
#include "sg/metrics.hpp"
#include "sg/rng.hpp"
#include "sg/snapshot.hpp"
#include "sg/synthgen.hpp"
#include "sg/text_io.hpp"
#include "sg/train.hpp"
#include "sg/tweet_record.hpp"
#include "sg/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";
constexpr uint64_t kDefaultSeed = 42;  // fixed constant: reproducibility is opt-out

int g_exit_code = 0;  // set by handlers that fail without throwing (annotate)

// Collects inputs/outputs while a command runs, then writes the manifest.
// If the command throws, partially written outputs are removed.
struct RunContext {
    sg::RunManifest manifest;
    std::string manifest_path;
    std::vector<std::string> outputs;
    bool preserve_on_failure = false;  // resumable commands keep partial output
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit RunContext(std::string command) { manifest.command = std::move(command); }

    void input(const std::string& path) { manifest.add_input(path); }
    void output(const std::string& path) { outputs.push_back(path); }

    void finish() {
        manifest.artifact_version = kArtifactVersion;
        manifest.kernel_isa = sg::kern::active_isa();
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const std::string& p : outputs) manifest.add_output(p);
        if (!manifest_path.empty()) manifest.write(manifest_path);
        std::cerr << "[" << manifest.command << "] done in "
                  << sg::format_double(manifest.wall_seconds) << " s\n";
    }

    void cleanup() noexcept {
        if (preserve_on_failure) return;
        std::error_code ec;
        for (const std::string& p : outputs) fs::remove(p, ec);
        if (!manifest_path.empty()) fs::remove(manifest_path, ec);
    }
};

// Shared flag groups -------------------------------------------------------

struct StanceNames {
    std::string s1 = "s1";
    std::string s2 = "s2";

    void attach(CLI::App* cmd) {
        cmd->add_option("--stance-s1", s1, "Display name of the first stance class")
            ->capture_default_str();
        cmd->add_option("--stance-s2", s2, "Display name of the second stance class")
            ->capture_default_str();
    }
    sg::StancePair pair() const { return {s1, s2}; }
};

struct PropagationFlags {
    std::string seeds_s1_path, seeds_s2_path;
    uint32_t max_iterations = 50;
    double stdev_multiplier = 1.0;
    std::string tie_policy = "unlabeled";
    std::string stdev_estimator = "population";
    bool high_scores_to_s1 = false;

    void attach(CLI::App* cmd, bool seeds_required) {
        auto* a = cmd->add_option("--seeds-s1", seeds_s1_path,
                                  "Seed hashtags of the first stance (one per line)")
                      ->check(CLI::ExistingFile);
        auto* b = cmd->add_option("--seeds-s2", seeds_s2_path,
                                  "Seed hashtags of the second stance (one per line)")
                      ->check(CLI::ExistingFile);
        if (seeds_required) {
            a->required();
            b->required();
        }
        cmd->add_option("--max-iterations", max_iterations, "Propagation iteration cap")
            ->capture_default_str();
        cmd->add_option("--stdev-multiplier", stdev_multiplier,
                        "k in the mean +- k*stdev hashtag thresholds")
            ->capture_default_str();
        cmd->add_option("--tie-policy", tie_policy, "User-step tie handling")
            ->check(CLI::IsMember({"unlabeled", "prefer-s1", "prefer-s2"}))
            ->capture_default_str();
        cmd->add_option("--stdev-estimator", stdev_estimator, "Stdev over hashtag scores")
            ->check(CLI::IsMember({"population", "sample"}))
            ->capture_default_str();
        cmd->add_flag("--high-scores-to-s1", high_scores_to_s1,
                      "Map scores above the upper threshold to the first stance");
    }

    sg::PropagationConfig config(const sg::StancePair& stances) const {
        sg::PropagationConfig cfg;
        if (!seeds_s1_path.empty()) cfg.seeds_s1 = sg::read_seed_lines(seeds_s1_path);
        if (!seeds_s2_path.empty()) cfg.seeds_s2 = sg::read_seed_lines(seeds_s2_path);
        cfg.max_iterations = max_iterations;
        cfg.stdev_multiplier = stdev_multiplier;
        cfg.tie_policy = tie_policy == "prefer-s1"   ? sg::TiePolicy::prefer_s1
                         : tie_policy == "prefer-s2" ? sg::TiePolicy::prefer_s2
                                                     : sg::TiePolicy::unlabeled;
        cfg.stdev_estimator = stdev_estimator == "sample" ? sg::StdevEstimator::sample
                                                          : sg::StdevEstimator::population;
        cfg.high_scores_to_s1 = high_scores_to_s1;
        cfg.stances = stances;
        return cfg;
    }

    void describe(ordered_json& j) const {
        j["seeds_s1"] = seeds_s1_path;
        j["seeds_s2"] = seeds_s2_path;
        j["max_iterations"] = max_iterations;
        j["stdev_multiplier"] = stdev_multiplier;
        j["tie_policy"] = tie_policy;
        j["stdev_estimator"] = stdev_estimator;
        j["high_scores_to_s1"] = high_scores_to_s1;
    }
};

struct TrainFlags {
    uint32_t hidden_dim = 64;
    double learning_rate = 1e-3;
    uint32_t epochs = 200;
    std::string optimizer = "adam";
    uint64_t seed = kDefaultSeed;
    double val_fraction = 0.1;
    uint32_t patience = 20;
    bool no_class_weights = false;
    bool sentiment_weighted_mean = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--hidden-dim", hidden_dim, "Hidden layer width")->capture_default_str();
        cmd->add_option("--learning-rate,--lr", learning_rate, "Optimizer step size")
            ->capture_default_str();
        cmd->add_option("--epochs", epochs, "Training epoch cap")->capture_default_str();
        cmd->add_option("--optimizer", optimizer, "Parameter update rule")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for split and initialization")
            ->capture_default_str();
        cmd->add_option("--val-fraction", val_fraction,
                        "Stratified share of labeled users held out for early stopping")
            ->capture_default_str();
        cmd->add_option("--patience", patience, "Early-stopping patience in epochs")
            ->capture_default_str();
        cmd->add_flag("--no-class-weights", no_class_weights,
                      "Disable inverse-frequency loss weighting");
        cmd->add_flag("--sentiment-weighted-mean", sentiment_weighted_mean,
                      "Weight neighbor means by mean absolute sentiment");
    }

    sg::TrainConfig config() const {
        sg::TrainConfig cfg;
        cfg.hidden_dim = hidden_dim;
        cfg.learning_rate = learning_rate;
        cfg.epochs = epochs;
        cfg.optimizer = *sg::parse_optimizer(optimizer);
        cfg.seed = seed;
        cfg.val_fraction = val_fraction;
        cfg.class_weights = !no_class_weights;
        cfg.patience = patience;
        cfg.sentiment_weighted_mean = sentiment_weighted_mean;
        return cfg;
    }

    void describe(ordered_json& j) const {
        j["hidden_dim"] = hidden_dim;
        j["learning_rate"] = learning_rate;
        j["epochs"] = epochs;
        j["optimizer"] = optimizer;
        j["seed"] = seed;
        j["val_fraction"] = val_fraction;
        j["patience"] = patience;
        j["class_weights"] = !no_class_weights;
        j["sentiment_weighted_mean"] = sentiment_weighted_mean;
    }
};

// Output helpers -----------------------------------------------------------

void print_report(std::ostream& os, const sg::EvalReport& r, const sg::StancePair& stances) {
    auto pct = [](double v) { return sg::format_double(v); };
    os << "scored " << r.scored << " entities";
    if (r.undetermined_truth) os << " (" << r.undetermined_truth << " undetermined excluded)";
    os << "\n";
    os << "accuracy        " << pct(r.accuracy) << "\n";
    os << "macro precision " << pct(r.macro_precision) << "\n";
    os << "macro recall    " << pct(r.macro_recall) << "\n";
    os << "macro F1        " << pct(r.macro_f1) << "\n";
    for (int c = 0; c < 2; ++c) {
        const sg::ClassMetrics& k = r.per_class[c];
        os << "[" << stances.name(sg::StanceId(c)) << "] precision=" << pct(k.precision)
           << " recall=" << pct(k.recall) << " f1=" << pct(k.f1) << " support=" << k.support
           << "\n";
    }
    os << "confusion (rows: truth; cols: predicted " << stances.name_s1 << ", "
       << stances.name_s2 << ", none):\n";
    for (int c = 0; c < 2; ++c)
        os << "  " << r.confusion.m[c][0] << " " << r.confusion.m[c][1] << " "
           << r.confusion.m[c][2] << "\n";
}

void write_history_json(const std::string& path, const sg::TrainResult& tr) {
    ordered_json j;
    j["best_epoch"] = tr.best_epoch;
    j["early_stopped"] = tr.early_stopped;
    j["train_count"] = tr.train_count;
    j["val_count"] = tr.val_count;
    ordered_json rows = ordered_json::array();
    for (const sg::EpochStats& e : tr.history)
        rows.push_back({{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"val_loss", e.val_loss},
                        {"val_macro_f1", e.val_macro_f1}});
    j["epochs"] = rows;
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw sg::RuntimeError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
}

void write_probabilities_tsv(const std::string& path, const sg::Prediction& pred,
                             const sg::Interner& names) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw sg::RuntimeError("cannot open '" + path + "' for writing");
    for (size_t v = 0; v < pred.probabilities.rows; ++v)
        os << names.name(uint32_t(v)) << '\t' << sg::format_double(pred.probabilities.at(v, 0))
           << '\t' << sg::format_double(pred.probabilities.at(v, 1)) << '\n';
    if (!os) throw sg::RuntimeError("write failed for '" + path + "'");
}

sg::BipartiteGraph load_bipartite(const std::string& graph_path, const std::string& posts_path) {
    if (!graph_path.empty()) return sg::read_bipartite_snapshot(graph_path);
    return sg::BipartiteGraph::from_posts(sg::read_posts_tsv(posts_path));
}

// Subcommand handlers ------------------------------------------------------

struct GlobalOpts {
    std::string isa = "auto";
};

void cmd_build_graph(const GlobalOpts& g, const std::string& posts, const std::string& out) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("build-graph");
    ctx.manifest_path = out + ".manifest.json";
    try {
        ctx.input(posts);
        sg::BipartiteGraph graph = sg::BipartiteGraph::from_posts(sg::read_posts_tsv(posts));
        sg::write_snapshot(out, graph);
        ctx.output(out);
        ordered_json cfg{{"posts", posts}, {"out", out}};
        ctx.manifest.resolved_config_json = cfg.dump();
        std::cout << "users " << graph.user_count() << "\nhashtags " << graph.hashtag_count()
                  << "\nedges " << graph.edge_count() << "\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_ingest(const GlobalOpts& g, const std::string& tweets, const std::string& out) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("ingest");
    ctx.manifest_path = out + ".manifest.json";
    try {
        ctx.input(tweets);
        std::vector<sg::TweetRecord> records = sg::read_tweets_auto(tweets);
        sg::UserFeatureTable features = sg::pool_user_features(records);
        sg::IngestStats stats;
        sg::InteractionGraph graph = sg::build_interaction_graph(records, features, &stats);
        sg::write_snapshot(out, graph);
        ctx.output(out);
        ordered_json cfg{{"tweets", tweets}, {"out", out}};
        ctx.manifest.resolved_config_json = cfg.dump();
        std::cout << "tweets " << stats.records << "\ninteractions " << stats.interactions
                  << "\nself-loops-dropped " << stats.self_loops_dropped << "\nusers "
                  << graph.node_count() << "\nfeatureless-targets " << stats.featureless_targets
                  << "\nedges " << graph.edge_count() << "\nfeature-dim " << graph.feature_dim()
                  << "\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_propagate(const GlobalOpts& g, const std::string& graph_path,
                   const std::string& posts_path, const PropagationFlags& pf,
                   const StanceNames& sn, const std::string& out_users,
                   const std::string& out_hashtags) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("propagate");
    ctx.manifest_path = out_users + ".manifest.json";
    try {
        ctx.input(graph_path.empty() ? posts_path : graph_path);
        ctx.input(pf.seeds_s1_path);
        ctx.input(pf.seeds_s2_path);
        sg::BipartiteGraph graph = load_bipartite(graph_path, posts_path);
        sg::PropagationConfig cfg = pf.config(sn.pair());
        sg::PropagationResult res = sg::run_propagation(graph, cfg);
        for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";

        sg::write_labels_tsv(out_users, sg::to_named_labels(res.users, graph.users()),
                             cfg.stances);
        ctx.output(out_users);
        if (!out_hashtags.empty()) {
            sg::write_labels_tsv(out_hashtags, sg::to_named_labels(res.hashtags, graph.hashtags()),
                                 cfg.stances);
            ctx.output(out_hashtags);
        }
        ordered_json cj{{"graph", graph_path}, {"posts", posts_path}};
        pf.describe(cj);
        cj["stance_s1"] = sn.s1;
        cj["stance_s2"] = sn.s2;
        cj["out_users"] = out_users;
        cj["out_hashtags"] = out_hashtags;
        ctx.manifest.resolved_config_json = cj.dump();
        std::cout << "iterations " << res.iterations << "\nconverged "
                  << (res.converged ? "true" : "false") << "\nlabeled-users "
                  << res.users.size() << " (" << cfg.stances.name_s1 << " "
                  << res.users.count(sg::StanceId::s1) << ", " << cfg.stances.name_s2 << " "
                  << res.users.count(sg::StanceId::s2) << ")\nlabeled-hashtags "
                  << res.hashtags.size() << "\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_train(const GlobalOpts& g, const std::string& graph_path, const std::string& labels_path,
               const std::string& arch, const TrainFlags& tf, const StanceNames& sn,
               const std::string& out, const std::string& history_path) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("train");
    ctx.manifest_path = out + ".manifest.json";
    try {
        ctx.input(graph_path);
        ctx.input(labels_path);
        sg::InteractionGraph graph = sg::read_interaction_snapshot(graph_path);
        std::vector<sg::NamedLabel> rows = sg::read_labels_tsv(labels_path, sn.pair());
        std::vector<std::string> unknown;
        sg::StanceAssignment labels = sg::to_assignment(rows, graph.users(), &unknown);
        if (!unknown.empty())
            std::cerr << "warning: " << unknown.size()
                      << " labeled users absent from the graph were ignored\n";

        sg::TrainConfig cfg = tf.config();
        auto kind = sg::parse_layer_kind(arch);
        if (!kind) throw sg::ConfigError("unknown architecture '" + arch + "'");
        cfg.arch = *kind;
        sg::TrainResult tr = cfg.arch == sg::LayerKind::dense
                                 ? sg::mlp_baseline(graph, labels, cfg)
                                 : sg::train(graph, labels, cfg);
        sg::save_model(out, tr.model);
        ctx.output(out);
        if (!history_path.empty()) {
            write_history_json(history_path, tr);
            ctx.output(history_path);
        }
        ctx.manifest.seed = cfg.seed;
        ordered_json cj{{"graph", graph_path}, {"labels", labels_path}, {"arch", arch}};
        tf.describe(cj);
        cj["stance_s1"] = sn.s1;
        cj["stance_s2"] = sn.s2;
        cj["out"] = out;
        cj["history"] = history_path;
        ctx.manifest.resolved_config_json = cj.dump();
        const sg::EpochStats& last = tr.history.at(tr.best_epoch - 1);
        std::cout << "train-users " << tr.train_count << "\nval-users " << tr.val_count
                  << "\nepochs-run " << tr.history.size() << "\nbest-epoch " << tr.best_epoch
                  << "\nbest-val-loss " << sg::format_double(last.val_loss)
                  << "\nbest-val-macro-f1 " << sg::format_double(last.val_macro_f1) << "\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_predict(const GlobalOpts& g, const std::string& graph_path,
                 const std::string& model_path, const StanceNames& sn, const std::string& out,
                 const std::string& probs_path) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("predict");
    ctx.manifest_path = out + ".manifest.json";
    try {
        ctx.input(graph_path);
        ctx.input(model_path);
        sg::InteractionGraph graph = sg::read_interaction_snapshot(graph_path);
        sg::Model model = sg::load_model(model_path);
        sg::Prediction pred = sg::predict(model, graph);
        sg::write_labels_tsv(out, sg::to_named_labels(pred.labels, graph.users()), sn.pair());
        ctx.output(out);
        if (!probs_path.empty()) {
            write_probabilities_tsv(probs_path, pred, graph.users());
            ctx.output(probs_path);
        }
        ordered_json cj{{"graph", graph_path},
                        {"model", model_path},
                        {"stance_s1", sn.s1},
                        {"stance_s2", sn.s2},
                        {"out", out},
                        {"probabilities", probs_path}};
        ctx.manifest.resolved_config_json = cj.dump();
        std::cout << "predicted " << pred.labels.size() << " users (" << sn.s1 << " "
                  << pred.labels.count(sg::StanceId::s1) << ", " << sn.s2 << " "
                  << pred.labels.count(sg::StanceId::s2) << ")\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_evaluate(const GlobalOpts& g, const std::string& pred_path,
                  const std::string& truth_path, const StanceNames& sn, const std::string& out) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("evaluate");
    if (!out.empty()) ctx.manifest_path = out + ".manifest.json";
    try {
        ctx.input(pred_path);
        ctx.input(truth_path);
        sg::StancePair stances = sn.pair();
        std::vector<sg::NamedLabel> pred = sg::read_labels_tsv(pred_path, stances);
        std::vector<sg::TruthLabel> truth = sg::read_truth_tsv(truth_path, stances);
        sg::EvalReport rep = sg::score_named(pred, truth);
        print_report(std::cout, rep, stances);
        if (!out.empty()) {
            sg::write_report_json(out, "evaluate", sg::summarize_trials({&rep, 1}));
            ctx.output(out);
        }
        ordered_json cj{{"pred", pred_path},
                        {"truth", truth_path},
                        {"stance_s1", sn.s1},
                        {"stance_s2", sn.s2},
                        {"out", out}};
        ctx.manifest.resolved_config_json = cj.dump();
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

struct SynthOverrides {
    std::optional<uint32_t> users_s1, users_s2, hashtags_per_community, neutral_hashtags;
    std::optional<uint32_t> feature_dim, seeds_per_side;
    std::optional<double> mean_usages, neutral_rate, leak, mean_interactions, homophily;
    std::optional<double> sentiment_in, sentiment_cross, sentiment_noise, solo_tweets;
    std::optional<double> centroid_scale, feature_noise;

    void attach(CLI::App* cmd) {
        cmd->add_option("--users-s1", users_s1, "First-community user count");
        cmd->add_option("--users-s2", users_s2, "Second-community user count");
        cmd->add_option("--hashtags-per-community", hashtags_per_community);
        cmd->add_option("--neutral-hashtags", neutral_hashtags);
        cmd->add_option("--mean-usages", mean_usages, "Mean hashtag usages per user");
        cmd->add_option("--neutral-rate", neutral_rate);
        cmd->add_option("--leak", leak, "Cross-community hashtag usage probability");
        cmd->add_option("--mean-interactions", mean_interactions);
        cmd->add_option("--homophily", homophily, "In-community interaction probability");
        cmd->add_option("--sentiment-in", sentiment_in);
        cmd->add_option("--sentiment-cross", sentiment_cross);
        cmd->add_option("--sentiment-noise", sentiment_noise);
        cmd->add_option("--solo-tweets", solo_tweets, "Mean non-interaction tweets per user");
        cmd->add_option("--feature-dim", feature_dim);
        cmd->add_option("--centroid-scale", centroid_scale);
        cmd->add_option("--feature-noise", feature_noise);
        cmd->add_option("--seeds-per-side", seeds_per_side);
    }

    void apply(sg::SynthConfig& cfg) const {
        if (users_s1) cfg.users_s1 = *users_s1;
        if (users_s2) cfg.users_s2 = *users_s2;
        if (hashtags_per_community) cfg.hashtags_per_community = *hashtags_per_community;
        if (neutral_hashtags) cfg.neutral_hashtags = *neutral_hashtags;
        if (mean_usages) cfg.mean_usages_per_user = *mean_usages;
        if (neutral_rate) cfg.neutral_rate = *neutral_rate;
        if (leak) cfg.leak = *leak;
        if (mean_interactions) cfg.mean_interactions_per_user = *mean_interactions;
        if (homophily) cfg.homophily = *homophily;
        if (sentiment_in) cfg.sentiment_in = *sentiment_in;
        if (sentiment_cross) cfg.sentiment_cross = *sentiment_cross;
        if (sentiment_noise) cfg.sentiment_noise = *sentiment_noise;
        if (solo_tweets) cfg.mean_solo_tweets_per_user = *solo_tweets;
        if (feature_dim) cfg.feature_dim = *feature_dim;
        if (centroid_scale) cfg.centroid_scale = *centroid_scale;
        if (feature_noise) cfg.feature_noise = *feature_noise;
        if (seeds_per_side) cfg.seeds_per_side = *seeds_per_side;
    }
};

ordered_json synth_config_json(const sg::SynthConfig& c) {
    ordered_json j;
    j["users_s1"] = c.users_s1;
    j["users_s2"] = c.users_s2;
    j["hashtags_per_community"] = c.hashtags_per_community;
    j["neutral_hashtags"] = c.neutral_hashtags;
    j["mean_usages_per_user"] = c.mean_usages_per_user;
    j["neutral_rate"] = c.neutral_rate;
    j["leak"] = c.leak;
    j["mean_interactions_per_user"] = c.mean_interactions_per_user;
    j["homophily"] = c.homophily;
    j["sentiment_in"] = c.sentiment_in;
    j["sentiment_cross"] = c.sentiment_cross;
    j["sentiment_noise"] = c.sentiment_noise;
    j["mean_solo_tweets_per_user"] = c.mean_solo_tweets_per_user;
    j["feature_dim"] = c.feature_dim;
    j["centroid_scale"] = c.centroid_scale;
    j["feature_noise"] = c.feature_noise;
    j["seeds_per_side"] = c.seeds_per_side;
    j["seed"] = c.seed;
    j["stance_s1"] = c.stances.name_s1;
    j["stance_s2"] = c.stances.name_s2;
    return j;
}

std::string strip_preset_prefix(std::string s) {
    if (s.rfind("preset=", 0) == 0) s.erase(0, 7);
    return s;
}

std::vector<std::string> synth_file_set(const std::string& dir, bool jsonl) {
    std::vector<std::string> files = {dir + "/posts.tsv",    dir + "/tweets.twe1",
                                      dir + "/interactions.tsv", dir + "/truth.tsv",
                                      dir + "/seeds_s1.txt", dir + "/seeds_s2.txt"};
    if (jsonl) files.push_back(dir + "/tweets.jsonl");
    return files;
}

void cmd_synth(const GlobalOpts& g, const std::string& preset, const SynthOverrides& ov,
               const StanceNames& sn, uint64_t seed, const std::string& dir, bool jsonl) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("synth");
    ctx.manifest_path = dir + "/manifest.json";
    try {
        sg::SynthConfig cfg = sg::synth_preset(strip_preset_prefix(preset));
        ov.apply(cfg);
        cfg.seed = seed;
        cfg.stances = sn.pair();
        cfg.validate();
        sg::SynthResult r = sg::generate(cfg);
        sg::write_synth_dataset(dir, r, jsonl);
        for (const std::string& f : synth_file_set(dir, jsonl)) ctx.output(f);
        ctx.manifest.seed = seed;
        ordered_json cj = synth_config_json(cfg);
        cj["preset"] = strip_preset_prefix(preset);
        cj["out_dir"] = dir;
        cj["jsonl"] = jsonl;
        ctx.manifest.resolved_config_json = cj.dump();
        std::cout << "users " << (cfg.users_s1 + cfg.users_s2) << "\nposts " << r.posts.size()
                  << "\ntweets " << r.tweets.size() << "\nseeds " << r.seeds_s1.size() << "+"
                  << r.seeds_s2.size() << "\n";
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

void cmd_annotate(const GlobalOpts& g, const std::string& requests_path, const std::string& topic,
                  const sg::EndpointConfig& ep, const std::string& out, std::string journal) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("annotate");
    ctx.preserve_on_failure = true;  // journaled output is the resume point
    ctx.manifest_path = out + ".manifest.json";
    if (journal.empty()) journal = out + ".journal";
    ctx.input(requests_path);
    auto t = sg::parse_topic(topic);
    if (!t) throw sg::ConfigError("unknown topic '" + topic + "' (gun-control, climate-change)");
    std::vector<sg::AnnotationRequest> requests = sg::read_annotation_requests(requests_path, *t);
    sg::AnnotationClient client(ep);
    std::vector<std::string> failed = client.annotate_batch(requests, out, journal);
    ctx.output(out);
    ctx.output(journal);
    ordered_json cj{{"requests", requests_path}, {"topic", sg::topic_name(*t)},
                    {"endpoint", ep.base_url + ep.path}, {"model", ep.model},
                    {"temperature", ep.temperature}, {"max_attempts", ep.max_attempts},
                    {"rate_limit_per_s", ep.rate_limit_per_s}, {"out", out},
                    {"journal", journal}};
    ctx.manifest.resolved_config_json = cj.dump();
    std::cout << "requested " << requests.size() << "\nfailed " << failed.size() << "\n";
    ctx.finish();
    if (!failed.empty()) {
        for (const std::string& id : failed) std::cerr << "failed: " << id << "\n";
        std::cerr << "rerun the same command to retry the failed users\n";
        g_exit_code = 4;
    }
}

void cmd_pipeline(const GlobalOpts& g, const std::string& synth_preset_name,
                  const SynthOverrides& ov, uint64_t data_seed, const std::string& posts_path,
                  const std::string& tweets_path, const std::string& truth_path,
                  const PropagationFlags& pf, const std::string& model_name, const TrainFlags& tf,
                  const StanceNames& sn, uint32_t trials, uint64_t base_seed,
                  const std::string& dir, bool keep_data) {
    sg::kern::select_isa(g.isa);
    RunContext ctx("pipeline");
    ctx.manifest_path = dir + "/manifest.json";
    try {
        auto model = sg::parse_model_kind(model_name);
        if (!model) throw sg::ConfigError("unknown model '" + model_name + "'");
        if (trials < 1) throw sg::ConfigError("--trials must be at least 1");
        const bool synth_mode = !synth_preset_name.empty();
        if (!synth_mode && (posts_path.empty() || tweets_path.empty() || truth_path.empty()))
            throw sg::ConfigError(
                "pipeline needs either --synth PRESET or --posts/--tweets/--truth");

        fs::create_directories(dir);
        sg::StancePair stances = sn.pair();

        // Assemble the dataset bundle.
        sg::SynthResult data;
        sg::SynthConfig scfg;
        if (synth_mode) {
            scfg = sg::synth_preset(strip_preset_prefix(synth_preset_name));
            ov.apply(scfg);
            scfg.seed = data_seed;
            scfg.stances = stances;
            scfg.validate();
            data = sg::generate(scfg);
            if (keep_data) {
                sg::write_synth_dataset(dir + "/data", data, false);
                for (const std::string& f : synth_file_set(dir + "/data", false)) ctx.output(f);
            }
        } else {
            ctx.input(posts_path);
            ctx.input(tweets_path);
            ctx.input(truth_path);
            ctx.input(pf.seeds_s1_path);
            ctx.input(pf.seeds_s2_path);
            data.posts = sg::read_posts_tsv(posts_path);
            data.tweets = sg::read_tweets_auto(tweets_path);
            data.truth = sg::read_truth_tsv(truth_path, stances);
            data.stances = stances;
        }

        sg::PropagationConfig pcfg = pf.config(stances);
        if (pcfg.seeds_s1.empty()) pcfg.seeds_s1 = data.seeds_s1;
        if (pcfg.seeds_s2.empty()) pcfg.seeds_s2 = data.seeds_s2;
        sg::TrainConfig tcfg = tf.config();

        std::vector<sg::PipelineRun> runs;
        std::vector<sg::EvalReport> reports;
        for (uint32_t t = 0; t < trials; ++t) {
            runs.push_back(sg::run_pipeline_once(data, *model, tcfg, pcfg,
                                                 sg::derive_seed(base_seed, t)));
            reports.push_back(runs.back().report);
        }
        const sg::PipelineRun& first = runs.front();
        for (const std::string& w : first.propagation.warnings)
            std::cerr << "warning: " << w << "\n";

        // Stage-1 labels (deterministic across trials, written once).
        sg::BipartiteGraph bg = sg::BipartiteGraph::from_posts(data.posts);
        sg::write_labels_tsv(dir + "/stage1_users.tsv",
                             sg::to_named_labels(first.propagation.users, bg.users()), stances);
        ctx.output(dir + "/stage1_users.tsv");
        sg::write_labels_tsv(dir + "/stage1_hashtags.tsv",
                             sg::to_named_labels(first.propagation.hashtags, bg.hashtags()),
                             stances);
        ctx.output(dir + "/stage1_hashtags.tsv");

        // Trial-0 model and predictions.
        if (first.training) {
            sg::save_model(dir + "/model.sgm", first.training->model);
            ctx.output(dir + "/model.sgm");
            sg::UserFeatureTable features = sg::pool_user_features(data.tweets);
            sg::InteractionGraph ig = sg::build_interaction_graph(data.tweets, features);
            sg::Prediction pred = sg::predict(first.training->model, ig);
            sg::write_labels_tsv(dir + "/predictions.tsv",
                                 sg::to_named_labels(pred.labels, ig.users()), stances);
            ctx.output(dir + "/predictions.tsv");
        }

        sg::TrialSummary summary = sg::summarize_trials(reports);
        sg::write_report_json(dir + "/report.json", sg::model_kind_name(*model), summary);
        ctx.output(dir + "/report.json");
        std::pair<std::string, sg::TrialSummary> row{sg::model_kind_name(*model), summary};
        sg::write_metrics_table(dir + "/metrics.txt", {&row, 1});
        ctx.output(dir + "/metrics.txt");

        ctx.manifest.seed = base_seed;
        ordered_json cj;
        cj["model"] = sg::model_kind_name(*model);
        cj["trials"] = trials;
        cj["base_seed"] = base_seed;
        if (synth_mode) {
            cj["synth"] = synth_config_json(scfg);
            cj["synth"]["preset"] = strip_preset_prefix(synth_preset_name);
        } else {
            cj["posts"] = posts_path;
            cj["tweets"] = tweets_path;
            cj["truth"] = truth_path;
        }
        ordered_json pj;
        pf.describe(pj);
        cj["propagation"] = pj;
        ordered_json tj;
        tf.describe(tj);
        cj["train"] = tj;
        cj["stance_s1"] = sn.s1;
        cj["stance_s2"] = sn.s2;
        cj["out_dir"] = dir;
        ctx.manifest.resolved_config_json = cj.dump();

        std::cout << "stage1 iterations " << first.propagation.iterations << " converged "
                  << (first.propagation.converged ? "true" : "false") << "\n";
        std::cout << "stage1 labeled " << first.stage1_labeled << " accuracy "
                  << sg::format_double(first.stage1_accuracy) << "\n";
        std::cout << "trials " << trials << "\n";
        std::cout << "macro F1 mean " << sg::format_double(summary.macro_f1.mean) << " stdev "
                  << sg::format_double(summary.macro_f1.stdev) << "\n";
        print_report(std::cout, reports.front(), stances);
        ctx.finish();
    } catch (...) {
        ctx.cleanup();
        throw;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage stance labeling: hashtag label propagation + GNN training"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file (command-line flags win)");

    GlobalOpts g;
    app.add_option("--isa", g.isa, "Kernel backend: auto, scalar, avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
        ->capture_default_str();

    // build-graph
    std::string bg_posts, bg_out;
    auto* bg = app.add_subcommand("build-graph",
                                  "Build the user-hashtag bipartite graph from a posts file");
    bg->add_option("--posts", bg_posts, "Posts TSV: user<TAB>hashtag[,hashtag...]")
        ->required()
        ->check(CLI::ExistingFile);
    bg->add_option("--out", bg_out, "Output graph snapshot (SGR1)")->required();
    bg->callback([&] { cmd_build_graph(g, bg_posts, bg_out); });

    // ingest
    std::string in_tweets, in_out;
    auto* ing = app.add_subcommand(
        "ingest", "Pool tweet embeddings per user and build the interaction graph");
    ing->add_option("--tweets", in_tweets, "Tweet records (TWE1 binary or JSON lines)")
        ->required()
        ->check(CLI::ExistingFile);
    ing->add_option("--out", in_out, "Output graph snapshot (SGR1)")->required();
    ing->callback([&] { cmd_ingest(g, in_tweets, in_out); });

    // propagate
    std::string pr_graph, pr_posts, pr_out_users, pr_out_hashtags;
    PropagationFlags pr_flags;
    StanceNames pr_names;
    auto* pr = app.add_subcommand("propagate",
                                  "Propagate seed-hashtag stances across the bipartite graph");
    auto* pr_g = pr->add_option("--graph", pr_graph, "Bipartite graph snapshot")
                     ->check(CLI::ExistingFile);
    pr->add_option("--posts", pr_posts, "Posts TSV (alternative to --graph)")
        ->check(CLI::ExistingFile)
        ->excludes(pr_g);
    pr_flags.attach(pr, /*seeds_required=*/true);
    pr_names.attach(pr);
    pr->add_option("--out-users", pr_out_users, "Output labels TSV for users")->required();
    pr->add_option("--out-hashtags", pr_out_hashtags, "Output labels TSV for hashtags");
    pr->callback([&] {
        if (pr_graph.empty() && pr_posts.empty())
            throw sg::ConfigError("propagate needs --graph or --posts");
        cmd_propagate(g, pr_graph, pr_posts, pr_flags, pr_names, pr_out_users, pr_out_hashtags);
    });

    // train
    std::string tr_graph, tr_labels, tr_arch = "sage-mean", tr_out, tr_history;
    TrainFlags tr_flags;
    StanceNames tr_names;
    auto* tr = app.add_subcommand("train", "Train a stance classifier on soft labels");
    tr->add_option("--graph", tr_graph, "Interaction graph snapshot")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_option("--labels", tr_labels, "Soft labels TSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--arch", tr_arch, "Layer kind: sage-mean, gat, mlp")
        ->check(CLI::IsMember({"sage-mean", "sage", "gat", "mlp", "dense"}))
        ->capture_default_str();
    tr_flags.attach(tr);
    tr_names.attach(tr);
    tr->add_option("--out", tr_out, "Output model checkpoint (SGM1)")->required();
    tr->add_option("--history", tr_history, "Optional epoch-history JSON");
    tr->callback(
        [&] { cmd_train(g, tr_graph, tr_labels, tr_arch, tr_flags, tr_names, tr_out, tr_history); });

    // predict
    std::string pd_graph, pd_model, pd_out, pd_probs;
    StanceNames pd_names;
    auto* pd = app.add_subcommand("predict", "Label every user in a graph with a trained model");
    pd->add_option("--graph", pd_graph, "Interaction graph snapshot")
        ->required()
        ->check(CLI::ExistingFile);
    pd->add_option("--model", pd_model, "Model checkpoint (SGM1)")
        ->required()
        ->check(CLI::ExistingFile);
    pd_names.attach(pd);
    pd->add_option("--out", pd_out, "Output labels TSV")->required();
    pd->add_option("--probabilities", pd_probs, "Optional per-user probability TSV");
    pd->callback([&] { cmd_predict(g, pd_graph, pd_model, pd_names, pd_out, pd_probs); });

    // evaluate
    std::string ev_pred, ev_truth, ev_out;
    StanceNames ev_names;
    auto* ev = app.add_subcommand("evaluate", "Score predicted labels against truth labels");
    ev->add_option("--pred", ev_pred, "Predicted labels TSV")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--truth", ev_truth, "Truth TSV (stance or 'undetermined')")
        ->required()
        ->check(CLI::ExistingFile);
    ev_names.attach(ev);
    ev->add_option("--out", ev_out, "Optional report JSON");
    ev->callback([&] { cmd_evaluate(g, ev_pred, ev_truth, ev_names, ev_out); });

    // synth
    std::string sy_preset = "default", sy_dir;
    uint64_t sy_seed = kDefaultSeed;
    bool sy_jsonl = false;
    SynthOverrides sy_over;
    StanceNames sy_names;
    auto* sy = app.add_subcommand("synth", "Generate a planted two-community dataset");
    sy->add_option("--preset", sy_preset, "default, recovery, noisy, imbalance10")
        ->capture_default_str();
    sy_over.attach(sy);
    sy_names.attach(sy);
    sy->add_option("--seed", sy_seed, "Generator seed")->capture_default_str();
    sy->add_option("--out-dir", sy_dir, "Output directory")->required();
    sy->add_flag("--jsonl", sy_jsonl, "Also write tweets as JSON lines");
    sy->callback([&] { cmd_synth(g, sy_preset, sy_over, sy_names, sy_seed, sy_dir, sy_jsonl); });

    // annotate
    std::string an_requests, an_topic, an_out, an_journal;
    sg::EndpointConfig an_ep;
    auto* an = app.add_subcommand("annotate",
                                  "Label users through a chat-completion endpoint (resumable)");
    an->add_option("--requests", an_requests, "JSON-lines file with user_id and tweets")
        ->required()
        ->check(CLI::ExistingFile);
    an->add_option("--topic", an_topic, "gun-control or climate-change")->required();
    an->add_option("--endpoint", an_ep.base_url, "Endpoint base URL")->capture_default_str();
    an->add_option("--endpoint-path", an_ep.path, "Completion path")->capture_default_str();
    an->add_option("--model-name", an_ep.model, "Completion model name")->capture_default_str();
    an->add_option("--api-key-env", an_ep.api_key_env, "Environment variable holding the key")
        ->capture_default_str();
    an->add_option("--temperature", an_ep.temperature)->capture_default_str();
    an->add_option("--max-attempts", an_ep.max_attempts, "Tries per tweet with backoff")
        ->capture_default_str();
    an->add_option("--backoff-ms", an_ep.backoff_initial_ms, "Initial retry backoff")
        ->capture_default_str();
    an->add_option("--rate-limit", an_ep.rate_limit_per_s, "Requests per second (0 = unlimited)")
        ->capture_default_str();
    an->add_option("--timeout-s", an_ep.timeout_s, "Per-request timeout")->capture_default_str();
    an->add_option("--out", an_out, "Output TSV: user<TAB>label<TAB>classes")->required();
    an->add_option("--journal", an_journal, "Resume journal (default: OUT.journal)");
    an->callback([&] { cmd_annotate(g, an_requests, an_topic, an_ep, an_out, an_journal); });

    // pipeline
    std::string pl_synth, pl_posts, pl_tweets, pl_truth, pl_model = "gnn-sage", pl_dir;
    uint64_t pl_data_seed = kDefaultSeed, pl_base_seed = kDefaultSeed;
    uint32_t pl_trials = 1;
    bool pl_keep_data = false;
    SynthOverrides pl_over;
    PropagationFlags pl_prop;
    TrainFlags pl_train;
    StanceNames pl_names;
    auto* pl = app.add_subcommand("pipeline", "Run both stages end to end and score the result");
    pl->add_option("--synth", pl_synth, "Synthetic preset name (or preset=NAME)");
    pl_over.attach(pl);
    pl->add_option("--data-seed", pl_data_seed, "Synthetic dataset seed")->capture_default_str();
    pl->add_option("--posts", pl_posts, "Posts TSV (real-data mode)")->check(CLI::ExistingFile);
    pl->add_option("--tweets", pl_tweets, "Tweet records (real-data mode)")
        ->check(CLI::ExistingFile);
    pl->add_option("--truth", pl_truth, "Truth TSV to score against (real-data mode)")
        ->check(CLI::ExistingFile);
    pl_prop.attach(pl, /*seeds_required=*/false);
    pl->add_option("--model", pl_model, "gnn-sage, gnn-gat, mlp, weighted-random")
        ->capture_default_str();
    pl_train.attach(pl);
    pl_names.attach(pl);
    pl->add_option("--trials", pl_trials, "Stage-2 repetitions with derived seeds")
        ->capture_default_str();
    pl->add_option("--base-seed", pl_base_seed, "Base seed for per-trial derivation")
        ->capture_default_str();
    pl->add_option("--out-dir", pl_dir, "Output directory")->required();
    pl->add_flag("--keep-data", pl_keep_data, "Write the generated dataset under OUT_DIR/data");
    pl->callback([&] {
        cmd_pipeline(g, pl_synth, pl_over, pl_data_seed, pl_posts, pl_tweets, pl_truth, pl_prop,
                     pl_model, pl_train, pl_names, pl_trials, pl_base_seed, pl_dir, pl_keep_data);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad flags are configuration errors
    } catch (const sg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case sg::ErrorKind::config: return 2;
            case sg::ErrorKind::data: return 3;
            case sg::ErrorKind::runtime: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return g_exit_code;
}
