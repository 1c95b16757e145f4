#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "sg/errors.hpp"
#include "sg/interaction_graph.hpp"
#include "sg/metrics.hpp"
#include "sg/rng.hpp"
#include "sg/train.hpp"

#include "test_support.hpp"

using namespace sg;

namespace {

struct Clustered {
    InteractionGraph g;
    StanceAssignment truth;   // every node
    StanceAssignment labels;  // the labeled subset used for training
};

// Two communities of n/2 users each. Community membership shows up in the
// features (separation `sep` on the first coordinate) and in the interaction
// structure (dense positive edges inside, sparse negative edges across).
Clustered two_cluster_graph(uint64_t seed, uint32_t n, size_t dim, double sep,
                            double label_fraction) {
    Rng rng(seed);
    Interner users;
    for (uint32_t i = 0; i < n; ++i) users.intern("u" + std::to_string(i));

    auto cls = [&](uint32_t i) { return i < n / 2 ? StanceId::s1 : StanceId::s2; };
    std::vector<float> feats(size_t(n) * dim);
    for (uint32_t i = 0; i < n; ++i) {
        double base = cls(i) == StanceId::s1 ? sep : -sep;
        for (size_t j = 0; j < dim; ++j)
            feats[size_t(i) * dim + j] = float(rng.normal(j == 0 ? base : 0.0, 1.0));
    }

    std::vector<RawInteraction> raw;
    for (uint32_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            uint32_t half = n / 2;
            uint32_t j = cls(i) == StanceId::s1 ? uint32_t(rng.below(half))
                                                : half + uint32_t(rng.below(n - half));
            raw.push_back({i, j, std::clamp(rng.normal(0.7, 0.1), -1.0, 1.0)});
        }
        if (rng.bernoulli(0.4)) {
            uint32_t half = n / 2;
            uint32_t j = cls(i) == StanceId::s1 ? half + uint32_t(rng.below(n - half))
                                                : uint32_t(rng.below(half));
            raw.push_back({i, j, std::clamp(rng.normal(-0.7, 0.1), -1.0, 1.0)});
        }
    }
    auto edges = consolidate_interactions(raw);

    Clustered out{InteractionGraph(users, std::move(edges), std::move(feats), dim,
                                   std::vector<uint32_t>(n, 1)),
                  {}, {}};
    for (uint32_t i = 0; i < n; ++i) {
        out.truth.assign(i, cls(i), Provenance::seed, 0);
        if (rng.uniform() < label_fraction)
            out.labels.assign(i, cls(i), Provenance::propagated, 1);
    }
    // The training entry point needs two labeled users per class.
    for (uint32_t i : {0u, 1u, n - 2, n - 1})
        out.labels.assign(i, cls(i), Provenance::propagated, 1);
    return out;
}

double accuracy_against(const StanceAssignment& pred, const StanceAssignment& truth) {
    return score(pred, truth).accuracy;
}

} // namespace

TEST_CASE("training reduces the loss and separates two clusters") {
    Clustered c = two_cluster_graph(11, 60, 4, 2.0, 0.3);
    TrainConfig cfg;
    cfg.arch = LayerKind::sage_mean;
    cfg.hidden_dim = 16;
    cfg.epochs = 150;
    cfg.seed = 7;

    TrainResult res = train(c.g, c.labels, cfg);
    REQUIRE(!res.history.empty());
    CHECK(res.history.back().train_loss < res.history.front().train_loss);
    CHECK(res.best_epoch >= 1);
    CHECK(res.train_count + res.val_count == c.labels.size());

    Prediction p = predict(res.model, c.g);
    CHECK(p.labels.size() == c.g.node_count());
    for (const auto& e : p.labels.entries()) CHECK(e.provenance == Provenance::predicted);
    for (size_t v = 0; v < c.g.node_count(); ++v) {
        float s = p.probabilities.at(v, 0) + p.probabilities.at(v, 1);
        CHECK(double(s) == doctest::Approx(1.0).epsilon(1e-5));
    }
    CHECK(accuracy_against(p.labels, c.truth) >= 0.99);
}

TEST_CASE("gat training also separates the clusters") {
    Clustered c = two_cluster_graph(13, 50, 4, 2.0, 0.3);
    TrainConfig cfg;
    cfg.arch = LayerKind::gat;
    cfg.hidden_dim = 8;
    cfg.epochs = 120;
    cfg.seed = 3;
    TrainResult res = train(c.g, c.labels, cfg);
    Prediction p = predict(res.model, c.g);
    CHECK(accuracy_against(p.labels, c.truth) >= 0.95);
}

TEST_CASE("training is bit-deterministic in the seed") {
    Clustered c = two_cluster_graph(21, 40, 3, 1.5, 0.4);
    TrainConfig cfg;
    cfg.arch = LayerKind::sage_mean;
    cfg.hidden_dim = 8;
    cfg.epochs = 40;
    cfg.seed = 99;

    TrainResult a = train(c.g, c.labels, cfg);
    TrainResult b = train(c.g, c.labels, cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_loss == b.history[i].val_loss);
        CHECK(a.history[i].val_macro_f1 == b.history[i].val_macro_f1);
    }
    CHECK(a.best_epoch == b.best_epoch);
    REQUIRE(a.model.params.size() == b.model.params.size());
    for (size_t i = 0; i < a.model.params.size(); ++i)
        CHECK(a.model.params[i].w.d == b.model.params[i].w.d);

    cfg.seed = 100;
    TrainResult other = train(c.g, c.labels, cfg);
    CHECK(other.history.front().train_loss != a.history.front().train_loss);
}

TEST_CASE("mlp baseline is exactly dense-architecture training") {
    Clustered c = two_cluster_graph(31, 40, 3, 1.5, 0.5);
    TrainConfig cfg;
    cfg.hidden_dim = 8;
    cfg.epochs = 30;
    cfg.seed = 5;

    TrainConfig dense_cfg = cfg;
    dense_cfg.arch = LayerKind::dense;
    TrainResult via_train = train(c.g, c.labels, dense_cfg);
    TrainResult via_baseline = mlp_baseline(c.g, c.labels, cfg);

    REQUIRE(via_train.history.size() == via_baseline.history.size());
    for (size_t i = 0; i < via_train.history.size(); ++i)
        CHECK(via_train.history[i].train_loss == via_baseline.history[i].train_loss);
    for (size_t i = 0; i < via_train.model.params.size(); ++i)
        CHECK(via_train.model.params[i].w.d == via_baseline.model.params[i].w.d);
    CHECK(!via_baseline.model.uses_message_passing());

    TrainConfig bad = cfg;
    bad.layers = {{LayerKind::sage_mean, 3, 8, Activation::relu, 0.2f},
                  {LayerKind::sage_mean, 8, 2, Activation::identity, 0.2f}};
    CHECK_THROWS_AS(mlp_baseline(c.g, c.labels, bad), ConfigError);
}

TEST_CASE("label prerequisites are validated") {
    Clustered c = two_cluster_graph(41, 20, 3, 1.5, 0.5);
    TrainConfig cfg;
    cfg.epochs = 5;

    StanceAssignment one_class;
    for (uint32_t i = 0; i < 6; ++i) one_class.assign(i, StanceId::s1, Provenance::seed, 0);
    CHECK_THROWS_AS(train(c.g, one_class, cfg), DataError);

    StanceAssignment lopsided;
    lopsided.assign(0, StanceId::s1, Provenance::seed, 0);
    for (uint32_t i = 10; i < 16; ++i) lopsided.assign(i, StanceId::s2, Provenance::seed, 0);
    CHECK_THROWS_AS(train(c.g, lopsided, cfg), DataError);

    StanceAssignment outside = c.labels;
    outside.assign(9999, StanceId::s1, Provenance::seed, 0);
    CHECK_THROWS_AS(train(c.g, outside, cfg), DataError);
}

TEST_CASE("config validation") {
    Clustered c = two_cluster_graph(51, 20, 3, 1.5, 0.5);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(c.g, c.labels, cfg), ConfigError);
    cfg = {};
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(c.g, c.labels, cfg), ConfigError);
    cfg = {};
    cfg.val_fraction = 1.0;
    CHECK_THROWS_AS(train(c.g, c.labels, cfg), ConfigError);
    cfg = {};
    cfg.layers = {{LayerKind::dense, 3, 8, Activation::relu, 0.2f},
                  {LayerKind::dense, 8, 3, Activation::identity, 0.2f}};
    CHECK_THROWS_AS(train(c.g, c.labels, cfg), ConfigError);  // final layer must emit 2 logits
    cfg = {};
    cfg.layers = {{LayerKind::dense, 7, 2, Activation::identity, 0.2f}};
    CHECK_THROWS_AS(train(c.g, c.labels, cfg), ConfigError);  // input dim mismatch
}

TEST_CASE("stratified split respects the validation fraction") {
    Clustered c = two_cluster_graph(61, 40, 3, 1.5, 0.0);
    StanceAssignment labels;
    for (uint32_t i = 0; i < 10; ++i) labels.assign(i, StanceId::s1, Provenance::seed, 0);
    for (uint32_t i = 20; i < 30; ++i) labels.assign(i, StanceId::s2, Provenance::seed, 0);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.val_fraction = 0.2;
    TrainResult res = train(c.g, labels, cfg);
    CHECK(res.val_count == 4);  // floor(0.2 * 10) per class
    CHECK(res.train_count == 16);
}

TEST_CASE("sentiment-weighted aggregation flag is carried on the model") {
    Clustered c = two_cluster_graph(71, 30, 3, 1.5, 0.5);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.sentiment_weighted_mean = true;
    TrainResult res = train(c.g, c.labels, cfg);
    CHECK(res.model.sentiment_weighted_mean);

    // Prediction rebuilds the weighted neighborhood; a plain model on the
    // same graph must generally disagree somewhere in the probabilities.
    cfg.sentiment_weighted_mean = false;
    TrainResult plain = train(c.g, c.labels, cfg);
    Prediction pa = predict(res.model, c.g);
    Prediction pb = predict(plain.model, c.g);
    CHECK(pa.probabilities.d != pb.probabilities.d);
}

TEST_CASE("predict validates model/graph compatibility") {
    Clustered c = two_cluster_graph(81, 20, 3, 1.5, 0.5);
    std::vector<LayerSpec> specs = {{LayerKind::dense, 5, 2, Activation::identity, 0.2f}};
    Model wrong_dim = init_model(specs, 1);
    CHECK_THROWS_AS(predict(wrong_dim, c.g), DataError);
}

TEST_CASE("early stopping can end training before the epoch budget") {
    Clustered c = two_cluster_graph(91, 24, 3, 0.3, 0.8);
    TrainConfig cfg;
    cfg.arch = LayerKind::dense;
    cfg.hidden_dim = 8;
    cfg.epochs = 400;
    cfg.learning_rate = 0.05;
    cfg.patience = 5;
    cfg.seed = 17;
    TrainResult res = train(c.g, c.labels, cfg);
    CHECK(res.early_stopped);
    CHECK(res.history.size() < 400);
    CHECK(res.best_epoch <= res.history.size());
    // The reported model is the best-validation snapshot, not the last epoch.
    CHECK(res.best_epoch == res.history.size() - cfg.patience);
}
