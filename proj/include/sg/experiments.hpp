#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sg/interaction_graph.hpp"
#include "sg/label_prop.hpp"
#include "sg/metrics.hpp"
#include "sg/synthgen.hpp"
#include "sg/train.hpp"

namespace sg {

enum class ModelKind : uint8_t { gnn_sage = 0, gnn_gat = 1, mlp = 2, weighted_random = 3 };
const char* model_kind_name(ModelKind m);
std::optional<ModelKind> parse_model_kind(const std::string& s);

// One full two-stage run over an in-memory dataset.
struct PipelineRun {
    PropagationResult propagation;
    double stage1_accuracy = 0.0;  // labeled stage-1 users matching planted truth
    uint64_t stage1_labeled = 0;
    uint64_t stage1_correct = 0;
    std::optional<TrainResult> training;  // absent for weighted_random
    EvalReport report;                    // stage-2 predictions vs truth, all users
};

// Runs propagation + (for model kinds with training) stage-2 fit/predict and
// scores against the planted truth. `train_seed` reseeds both the split and
// the initialization; the weighted-random baseline draws its predictions from
// the stage-1 class ratio.
PipelineRun run_pipeline_once(const SynthResult& data, ModelKind model, TrainConfig tcfg,
                              const PropagationConfig& pcfg, uint64_t train_seed);

struct ExperimentSpec {
    ModelKind model = ModelKind::gnn_sage;
    SynthConfig data;
    TrainConfig train;
    PropagationConfig propagation;  // seeds filled from the generated dataset when empty
    uint32_t trials = 5;
    uint64_t base_seed = 42;
};

struct ExperimentResult {
    TrialSummary summary;
    std::vector<PipelineRun> runs;
};

// Five-trial protocol: the dataset is generated once; trial t reruns stage 2
// with seed derive_seed(base_seed, t).
ExperimentResult run_trials(const ExperimentSpec& spec);

// Machine-readable report with every metric field, per trial and aggregated.
void write_report_json(const std::string& path, const std::string& title,
                       const TrialSummary& summary);

// Flat table: one row per labeled source, columns Prec. / Recall / F1
// (×100, two decimals).
void write_metrics_table(const std::string& path,
                         std::span<const std::pair<std::string, TrialSummary>> rows);

} // namespace sg
