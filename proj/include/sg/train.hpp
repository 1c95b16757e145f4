#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sg/interaction_graph.hpp"
#include "sg/layers.hpp"
#include "sg/stance.hpp"

namespace sg {

enum class OptimizerKind : uint8_t { sgd = 0, adam = 1 };
const char* optimizer_name(OptimizerKind k);
std::optional<OptimizerKind> parse_optimizer(const std::string& s);

struct TrainConfig {
    // When `layers` is empty, a default two-layer stack of `arch` kind is
    // built: in_dim -> hidden_dim (relu) -> 2 (identity logits).
    LayerKind arch = LayerKind::sage_mean;
    std::vector<LayerSpec> layers;
    uint32_t hidden_dim = 64;
    double learning_rate = 1e-3;
    uint32_t epochs = 200;
    OptimizerKind optimizer = OptimizerKind::adam;
    uint64_t seed = 42;
    double val_fraction = 0.1;   // stratified split of the labeled users
    bool class_weights = true;   // inverse-frequency loss weights
    uint32_t patience = 20;      // early stopping on validation loss
    bool sentiment_weighted_mean = false;

    void validate() const;
    std::vector<LayerSpec> resolve_layers(size_t in_dim) const;
};

struct EpochStats {
    uint32_t epoch = 0;      // 1-based
    double train_loss = 0.0; // loss with the parameters entering the epoch
    double val_loss = 0.0;   // after the update (train set when no val split)
    double val_macro_f1 = 0.0;
};

struct TrainResult {
    Model model;  // parameters of the best-validation epoch
    std::vector<EpochStats> history;
    uint32_t best_epoch = 0;  // 1-based
    bool early_stopped = false;
    uint64_t train_count = 0;
    uint64_t val_count = 0;
};

// Semi-supervised full-batch training: forward over the whole graph, loss on
// the labeled training nodes only. Deterministic given cfg.seed (and the
// selected kernel backend).
TrainResult train(const InteractionGraph& g, const StanceAssignment& labels,
                  const TrainConfig& cfg);

struct Prediction {
    StanceAssignment labels;    // every node, provenance=predicted
    Mat<float> probabilities;   // node_count × 2, rows sum to 1
};

Prediction predict(const Model& m, const InteractionGraph& g);

// Identical loop with the stack forced to dense layers (no message passing).
TrainResult mlp_baseline(const InteractionGraph& g, const StanceAssignment& labels,
                         TrainConfig cfg);

} // namespace sg
