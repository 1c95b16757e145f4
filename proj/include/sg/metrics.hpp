#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sg/stance.hpp"
#include "sg/text_io.hpp"

namespace sg {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    uint64_t support = 0;  // truth entities of this class among the scored set
};

// Rows: truth class; columns: predicted S1, predicted S2, unpredicted.
// Row sums therefore equal per-class support.
struct ConfusionMatrix {
    uint64_t m[2][3] = {{0, 0, 0}, {0, 0, 0}};
    uint64_t row_sum(StanceId s) const {
        const uint64_t* r = m[size_t(s)];
        return r[0] + r[1] + r[2];
    }
};

struct EvalReport {
    ClassMetrics per_class[2];
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    uint64_t scored = 0;              // truth entities entering the metrics
    uint64_t undetermined_truth = 0;  // truth rows excluded as undetermined
};

// Scores predictions against determined truth labels. Truth entities without
// a prediction count against recall and are credited to no predicted class;
// predictions for entities absent from truth are ignored. Zero-denominator
// precision/recall is 0. Empty truth is an error.
EvalReport score(const StanceAssignment& pred, const StanceAssignment& truth);

// Name-keyed variant; truth rows marked undetermined are excluded (counted).
EvalReport score_named(std::span<const NamedLabel> pred, std::span<const TruthLabel> truth);

struct Aggregate {
    double mean = 0.0;
    double stdev = 0.0;  // population stdev across trials
};

struct TrialSummary {
    std::vector<EvalReport> per_trial;
    Aggregate macro_precision, macro_recall, macro_f1, accuracy;
};

// Compensated-sum averaging of per-trial metrics.
TrialSummary summarize_trials(std::span<const EvalReport> trials);

// Predicts every truth entity independently: S1 with probability p_s1, else
// S2; one EvalReport per trial, aggregated. Trial t draws from the stream
// derived as (seed, t).
TrialSummary weighted_random_baseline(const StanceAssignment& truth, double p_s1, uint32_t trials,
                                      uint64_t seed);

} // namespace sg
