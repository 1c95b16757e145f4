#include "sg/metrics.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "sg/errors.hpp"
#include "sg/rng.hpp"
#include "sg/util.hpp"

namespace sg {

namespace {

EvalReport from_confusion(ConfusionMatrix cm, uint64_t undetermined) {
    EvalReport r;
    r.confusion = cm;
    r.undetermined_truth = undetermined;
    r.scored = cm.row_sum(StanceId::s1) + cm.row_sum(StanceId::s2);
    if (r.scored == 0) throw DataError("score: no determined truth entities");
    for (int c = 0; c < 2; ++c) {
        uint64_t tp = cm.m[c][c];
        uint64_t pred_c = cm.m[0][c] + cm.m[1][c];
        uint64_t support = cm.row_sum(StanceId(c));
        ClassMetrics& k = r.per_class[c];
        k.support = support;
        k.precision = pred_c ? double(tp) / double(pred_c) : 0.0;
        k.recall = support ? double(tp) / double(support) : 0.0;
        k.f1 = (k.precision + k.recall) > 0.0
                   ? 2.0 * k.precision * k.recall / (k.precision + k.recall)
                   : 0.0;
    }
    r.macro_precision = (r.per_class[0].precision + r.per_class[1].precision) / 2.0;
    r.macro_recall = (r.per_class[0].recall + r.per_class[1].recall) / 2.0;
    r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
    r.accuracy = double(cm.m[0][0] + cm.m[1][1]) / double(r.scored);
    return r;
}

} // namespace

EvalReport score(const StanceAssignment& pred, const StanceAssignment& truth) {
    if (truth.empty()) throw DataError("score: empty truth set");
    ConfusionMatrix cm;
    for (const auto& e : truth.entries()) {
        auto p = pred.stance_of(e.entity);
        size_t col = p ? size_t(*p) : 2;
        cm.m[size_t(e.stance)][col]++;
    }
    return from_confusion(cm, 0);
}

EvalReport score_named(std::span<const NamedLabel> pred, std::span<const TruthLabel> truth) {
    if (truth.empty()) throw DataError("score: empty truth set");
    std::unordered_map<std::string, StanceId> pmap;
    pmap.reserve(pred.size());
    for (const NamedLabel& l : pred) pmap[l.entity] = l.stance;  // last one wins
    ConfusionMatrix cm;
    uint64_t undetermined = 0;
    for (const TruthLabel& t : truth) {
        if (!t.stance) {
            ++undetermined;
            continue;
        }
        auto it = pmap.find(t.entity);
        size_t col = it != pmap.end() ? size_t(it->second) : 2;
        cm.m[size_t(*t.stance)][col]++;
    }
    return from_confusion(cm, undetermined);
}

TrialSummary summarize_trials(std::span<const EvalReport> trials) {
    if (trials.empty()) throw DataError("summarize_trials: no trials");
    TrialSummary s;
    s.per_trial.assign(trials.begin(), trials.end());
    auto aggregate = [&](auto pick) {
        KahanSum sum;
        for (const EvalReport& r : trials) sum.add(pick(r));
        double mean = sum.value() / double(trials.size());
        KahanSum var;
        for (const EvalReport& r : trials) {
            double d = pick(r) - mean;
            var.add(d * d);
        }
        return Aggregate{mean, std::sqrt(var.value() / double(trials.size()))};
    };
    s.macro_precision = aggregate([](const EvalReport& r) { return r.macro_precision; });
    s.macro_recall = aggregate([](const EvalReport& r) { return r.macro_recall; });
    s.macro_f1 = aggregate([](const EvalReport& r) { return r.macro_f1; });
    s.accuracy = aggregate([](const EvalReport& r) { return r.accuracy; });
    return s;
}

TrialSummary weighted_random_baseline(const StanceAssignment& truth, double p_s1, uint32_t trials,
                                      uint64_t seed) {
    if (truth.empty()) throw DataError("weighted_random_baseline: empty truth set");
    if (!(p_s1 >= 0.0 && p_s1 <= 1.0))
        throw ConfigError("weighted_random_baseline: p_s1 must lie in [0, 1]");
    if (trials == 0) throw ConfigError("weighted_random_baseline: need at least one trial");
    std::vector<EvalReport> reports;
    reports.reserve(trials);
    for (uint32_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, t));
        StanceAssignment pred;
        for (const auto& e : truth.entries()) {
            StanceId s = rng.uniform() < p_s1 ? StanceId::s1 : StanceId::s2;
            pred.assign(e.entity, s, Provenance::predicted, 0);
        }
        reports.push_back(score(pred, truth));
    }
    return summarize_trials(reports);
}

} // namespace sg
