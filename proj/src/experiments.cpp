#include "sg/experiments.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sg/bipartite_graph.hpp"
#include "sg/embed_ingest.hpp"
#include "sg/errors.hpp"
#include "sg/rng.hpp"

namespace sg {

const char* model_kind_name(ModelKind m) {
    switch (m) {
        case ModelKind::gnn_sage: return "gnn-sage";
        case ModelKind::gnn_gat: return "gnn-gat";
        case ModelKind::mlp: return "mlp";
        case ModelKind::weighted_random: return "weighted-random";
    }
    return "gnn-sage";
}

std::optional<ModelKind> parse_model_kind(const std::string& s) {
    if (s == "gnn-sage" || s == "sage") return ModelKind::gnn_sage;
    if (s == "gnn-gat" || s == "gat") return ModelKind::gnn_gat;
    if (s == "mlp") return ModelKind::mlp;
    if (s == "weighted-random" || s == "random") return ModelKind::weighted_random;
    return std::nullopt;
}

PipelineRun run_pipeline_once(const SynthResult& data, ModelKind model, TrainConfig tcfg,
                              const PropagationConfig& pcfg, uint64_t train_seed) {
    PipelineRun out;

    // Stage 1: propagation over the user-hashtag graph.
    BipartiteGraph bg = BipartiteGraph::from_posts(data.posts);
    out.propagation = run_propagation(bg, pcfg);

    std::unordered_map<std::string, StanceId> truth_by_name;
    for (const TruthLabel& t : data.truth)
        if (t.stance) truth_by_name[t.entity] = *t.stance;

    for (const auto& e : out.propagation.users.entries()) {
        auto it = truth_by_name.find(bg.users().name(e.entity));
        if (it == truth_by_name.end()) continue;
        out.stage1_labeled += 1;
        if (it->second == e.stance) out.stage1_correct += 1;
    }
    out.stage1_accuracy =
        out.stage1_labeled ? double(out.stage1_correct) / double(out.stage1_labeled) : 0.0;

    // Stage 2: attributed interaction graph.
    UserFeatureTable features = pool_user_features(data.tweets);
    InteractionGraph ig = build_interaction_graph(data.tweets, features);

    StanceAssignment truth_ids;
    for (const TruthLabel& t : data.truth) {
        if (!t.stance) continue;
        if (auto id = ig.users().lookup(t.entity))
            truth_ids.assign(*id, *t.stance, Provenance::seed, 0);
    }
    if (truth_ids.empty()) throw DataError("pipeline: no truth user appears in the graph");

    if (model == ModelKind::weighted_random) {
        size_t n1 = out.propagation.users.count(StanceId::s1);
        size_t total = out.propagation.users.size();
        double p_s1 = total ? double(n1) / double(total) : 0.5;
        out.report = weighted_random_baseline(truth_ids, p_s1, 1, train_seed).per_trial.at(0);
        return out;
    }

    // Stage-1 user labels, mapped onto interaction-graph node ids, become the
    // semi-supervised training set.
    StanceAssignment train_labels;
    for (const auto& e : out.propagation.users.entries())
        if (auto id = ig.users().lookup(bg.users().name(e.entity)))
            train_labels.assign(*id, e.stance, e.provenance, e.iteration);

    switch (model) {
        case ModelKind::gnn_sage: tcfg.arch = LayerKind::sage_mean; break;
        case ModelKind::gnn_gat: tcfg.arch = LayerKind::gat; break;
        case ModelKind::mlp: tcfg.arch = LayerKind::dense; break;
        default: break;
    }
    tcfg.seed = train_seed;
    out.training = model == ModelKind::mlp ? mlp_baseline(ig, train_labels, tcfg)
                                           : train(ig, train_labels, tcfg);
    Prediction pred = predict(out.training->model, ig);
    out.report = score(pred.labels, truth_ids);
    return out;
}

ExperimentResult run_trials(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("experiment: need at least one trial");
    SynthResult data = generate(spec.data);

    PropagationConfig pcfg = spec.propagation;
    if (pcfg.seeds_s1.empty()) pcfg.seeds_s1 = data.seeds_s1;
    if (pcfg.seeds_s2.empty()) pcfg.seeds_s2 = data.seeds_s2;
    pcfg.stances = data.stances;

    ExperimentResult res;
    std::vector<EvalReport> reports;
    for (uint32_t t = 0; t < spec.trials; ++t) {
        try {
            res.runs.push_back(
                run_pipeline_once(data, spec.model, spec.train, pcfg, derive_seed(spec.base_seed, t)));
        } catch (const Error& e) {
            throw RuntimeError("trial " + std::to_string(t + 1) + " failed: " + e.what());
        }
        reports.push_back(res.runs.back().report);
    }
    res.summary = summarize_trials(reports);
    return res;
}

namespace {

nlohmann::ordered_json report_json(const EvalReport& r, const char* names[2]) {
    nlohmann::ordered_json j;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["macro_f1"] = r.macro_f1;
    j["accuracy"] = r.accuracy;
    j["scored"] = r.scored;
    j["undetermined_truth"] = r.undetermined_truth;
    for (int c = 0; c < 2; ++c) {
        nlohmann::ordered_json k;
        k["precision"] = r.per_class[c].precision;
        k["recall"] = r.per_class[c].recall;
        k["f1"] = r.per_class[c].f1;
        k["support"] = r.per_class[c].support;
        j["class"][names[c]] = k;
    }
    j["confusion_rows_truth_cols_pred_s1_s2_none"] = {
        {r.confusion.m[0][0], r.confusion.m[0][1], r.confusion.m[0][2]},
        {r.confusion.m[1][0], r.confusion.m[1][1], r.confusion.m[1][2]}};
    return j;
}

} // namespace

void write_report_json(const std::string& path, const std::string& title,
                       const TrialSummary& summary) {
    static const char* names[2] = {"s1", "s2"};
    nlohmann::ordered_json j;
    j["title"] = title;
    j["trials"] = summary.per_trial.size();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const EvalReport& r : summary.per_trial) rows.push_back(report_json(r, names));
    j["per_trial"] = rows;
    auto agg = [](const Aggregate& a) {
        return nlohmann::ordered_json{{"mean", a.mean}, {"stdev", a.stdev}};
    };
    j["macro_precision"] = agg(summary.macro_precision);
    j["macro_recall"] = agg(summary.macro_recall);
    j["macro_f1"] = agg(summary.macro_f1);
    j["accuracy"] = agg(summary.accuracy);
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

void write_metrics_table(const std::string& path,
                         std::span<const std::pair<std::string, TrialSummary>> rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    size_t w = 12;
    for (const auto& [name, s] : rows) w = std::max(w, name.size() + 2);
    auto pad = [&](const std::string& s, size_t width) {
        std::string out = s;
        while (out.size() < width) out.push_back(' ');
        return out;
    };
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
        return std::string(buf);
    };
    os << pad("Model", w) << pad("Prec.", 9) << pad("Recall", 9) << "F1\n";
    for (const auto& [name, s] : rows)
        os << pad(name, w) << pad(pct(s.macro_precision.mean), 9)
           << pad(pct(s.macro_recall.mean), 9) << pct(s.macro_f1.mean) << '\n';
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

} // namespace sg
