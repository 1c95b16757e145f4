#include "sg/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sg/errors.hpp"
#include "sg/metrics.hpp"
#include "sg/rng.hpp"

namespace sg {

const char* optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    return std::nullopt;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("train: validation fraction must lie in (0, 1)");
    if (layers.empty() && hidden_dim < 1) throw ConfigError("train: hidden dim must be >= 1");
}

std::vector<LayerSpec> TrainConfig::resolve_layers(size_t in_dim) const {
    if (in_dim < 1) throw DataError("train: graph carries no node features");
    if (!layers.empty()) {
        if (layers.front().in_dim != in_dim)
            throw ConfigError("train: first layer input dim " +
                              std::to_string(layers.front().in_dim) +
                              " does not match feature dim " + std::to_string(in_dim));
        if (layers.back().out_dim != 2)
            throw ConfigError("train: final layer must emit 2 logits");
        return layers;
    }
    LayerSpec l1{arch, uint32_t(in_dim), hidden_dim, Activation::relu, 0.2f};
    LayerSpec l2{arch, hidden_dim, 2, Activation::identity, 0.2f};
    return {l1, l2};
}

namespace {

struct Split {
    std::vector<uint32_t> train_nodes;
    std::vector<uint8_t> train_classes;
    std::vector<uint32_t> val_nodes;
    std::vector<uint8_t> val_classes;
};

// Stratified shuffle split: per class, the first floor(f·n_c) shuffled nodes
// go to validation. Guarantees at least one training node per class.
Split make_split(const StanceAssignment& labels, double f, Rng& rng) {
    std::vector<uint32_t> by_class[2];
    for (const auto& e : labels.entries()) by_class[size_t(e.stance)].push_back(e.entity);
    Split sp;
    for (int c = 0; c < 2; ++c) {
        auto& ids = by_class[c];
        for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
        size_t nval = size_t(f * double(ids.size()));
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i < nval) {
                sp.val_nodes.push_back(ids[i]);
                sp.val_classes.push_back(uint8_t(c));
            } else {
                sp.train_nodes.push_back(ids[i]);
                sp.train_classes.push_back(uint8_t(c));
            }
        }
    }
    return sp;
}

double eval_loss(const Mat<float>& logits, std::span<const uint32_t> nodes,
                 std::span<const uint8_t> classes, const double cw[2]) {
    double wtotal = 0.0, loss = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const float* l = logits.row(nodes[i]);
        double m = std::max(l[0], l[1]);
        double e0 = std::exp(double(l[0]) - m), e1 = std::exp(double(l[1]) - m);
        double p = (classes[i] == 0 ? e0 : e1) / (e0 + e1);
        double w = cw[classes[i]];
        wtotal += w;
        loss -= w * std::log(p);
    }
    return loss / wtotal;
}

double eval_macro_f1(const Mat<float>& logits, std::span<const uint32_t> nodes,
                     std::span<const uint8_t> classes) {
    StanceAssignment pred, truth;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const float* l = logits.row(nodes[i]);
        StanceId p = l[1] > l[0] ? StanceId::s2 : StanceId::s1;
        pred.assign(nodes[i], p, Provenance::predicted, 0);
        truth.assign(nodes[i], StanceId(classes[i]), Provenance::seed, 0);
    }
    return score(pred, truth).macro_f1;
}

struct AdamState {
    std::vector<Mat<float>> m, v;
    uint64_t t = 0;
};

void update_params(const std::vector<Mat<float>*>& params,
                   const std::vector<const Mat<float>*>& grads, const TrainConfig& cfg,
                   AdamState& adam) {
    if (cfg.optimizer == OptimizerKind::sgd) {
        for (size_t i = 0; i < params.size(); ++i) {
            Mat<float>& p = *params[i];
            const Mat<float>& g = *grads[i];
            for (size_t k = 0; k < p.size(); ++k) p.d[k] -= float(cfg.learning_rate) * g.d[k];
        }
        return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    adam.t += 1;
    double corr1 = 1.0 - std::pow(b1, double(adam.t));
    double corr2 = 1.0 - std::pow(b2, double(adam.t));
    for (size_t i = 0; i < params.size(); ++i) {
        Mat<float>& p = *params[i];
        const Mat<float>& g = *grads[i];
        Mat<float>& m = adam.m[i];
        Mat<float>& v = adam.v[i];
        for (size_t k = 0; k < p.size(); ++k) {
            double gk = g.d[k];
            double mk = b1 * m.d[k] + (1.0 - b1) * gk;
            double vk = b2 * v.d[k] + (1.0 - b2) * gk * gk;
            m.d[k] = float(mk);
            v.d[k] = float(vk);
            double mhat = mk / corr1;
            double vhat = vk / corr2;
            p.d[k] -= float(cfg.learning_rate * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

} // namespace

TrainResult train(const InteractionGraph& g, const StanceAssignment& labels,
                  const TrainConfig& cfg) {
    cfg.validate();
    size_t n = g.node_count();
    if (n == 0) throw DataError("train: empty graph");
    for (const auto& e : labels.entries())
        if (e.entity >= n)
            throw DataError("train: labeled entity " + std::to_string(e.entity) + " not in graph");
    size_t n_s1 = labels.count(StanceId::s1), n_s2 = labels.count(StanceId::s2);
    if (n_s1 < 2 || n_s2 < 2)
        throw DataError("train: need at least 2 labeled users per stance (got " +
                        std::to_string(n_s1) + " and " + std::to_string(n_s2) + ")");

    std::vector<LayerSpec> specs = cfg.resolve_layers(g.feature_dim());

    Rng split_rng(derive_seed(cfg.seed, 0));  // stream 0: the split
    Split sp = make_split(labels, cfg.val_fraction, split_rng);
    bool have_val = !sp.val_nodes.empty();

    double cw[2] = {1.0, 1.0};
    if (cfg.class_weights) {
        size_t tc[2] = {0, 0};
        for (uint8_t c : sp.train_classes) tc[c]++;
        double total = double(sp.train_nodes.size());
        cw[0] = total / (2.0 * double(tc[0]));
        cw[1] = total / (2.0 * double(tc[1]));
    }
    float cwf[2] = {float(cw[0]), float(cw[1])};

    Model model = init_model(specs, cfg.seed, cfg.sentiment_weighted_mean);
    NeighborhoodCsr nb;
    if (model.uses_message_passing()) nb = NeighborhoodCsr::from_graph(g, cfg.sentiment_weighted_mean);

    Mat<float> h0(n, g.feature_dim());
    std::copy(g.features().begin(), g.features().end(), h0.d.begin());

    AdamState adam;
    for (const LayerParams<float>& p : model.params) {
        adam.m.emplace_back(p.w.rows, p.w.cols);
        adam.v.emplace_back(p.w.rows, p.w.cols);
        adam.m.emplace_back(p.a_l.rows, p.a_l.cols);
        adam.v.emplace_back(p.a_l.rows, p.a_l.cols);
        adam.m.emplace_back(p.a_r.rows, p.a_r.cols);
        adam.v.emplace_back(p.a_r.rows, p.a_r.cols);
    }

    TrainResult res;
    res.train_count = sp.train_nodes.size();
    res.val_count = sp.val_nodes.size();
    Model best = model;
    double best_val = std::numeric_limits<double>::infinity();
    uint32_t bad_epochs = 0;

    for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Tape<float> tape;
        auto cur = tape.leaf(h0, false);
        std::vector<Tape<float>::Id> wids, alids, arids;
        for (size_t i = 0; i < model.params.size(); ++i) {
            wids.push_back(tape.leaf(model.params[i].w, true));
            bool is_gat = specs[i].kind == LayerKind::gat;
            alids.push_back(tape.leaf(model.params[i].a_l, is_gat));
            arids.push_back(tape.leaf(model.params[i].a_r, is_gat));
            cur = layer_forward(tape, specs[i], cur, wids[i], alids[i], arids[i],
                                model.uses_message_passing() ? &nb : nullptr);
        }
        auto loss_id = tape.weighted_ce_loss(cur, sp.train_nodes, sp.train_classes,
                                             std::span<const float>(cwf, 2));
        double train_loss = double(tape.scalar(loss_id));
        if (!std::isfinite(train_loss))
            throw RuntimeError("train: diverged at epoch " + std::to_string(epoch) +
                               " (non-finite loss); lower the learning rate");
        tape.backward(loss_id);

        std::vector<Mat<float>*> params;
        std::vector<const Mat<float>*> grads;
        for (size_t i = 0; i < model.params.size(); ++i) {
            params.push_back(&model.params[i].w);
            grads.push_back(&tape.grad(wids[i]));
            params.push_back(&model.params[i].a_l);
            grads.push_back(&tape.grad(alids[i]));
            params.push_back(&model.params[i].a_r);
            grads.push_back(&tape.grad(arids[i]));
        }
        update_params(params, grads, cfg, adam);

        Mat<float> logits = model_forward(model, h0, nb);
        const auto& vn = have_val ? sp.val_nodes : sp.train_nodes;
        const auto& vc = have_val ? sp.val_classes : sp.train_classes;
        double val_loss = eval_loss(logits, vn, vc, cw);
        double val_f1 = eval_macro_f1(logits, vn, vc);
        res.history.push_back({epoch, train_loss, val_loss, val_f1});

        if (val_loss < best_val) {
            best_val = val_loss;
            best = model;
            res.best_epoch = epoch;
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
            if (bad_epochs >= cfg.patience) {
                res.early_stopped = true;
                break;
            }
        }
    }

    res.model = std::move(best);
    return res;
}

Prediction predict(const Model& m, const InteractionGraph& g) {
    m.validate();
    if (g.feature_dim() != m.in_dim())
        throw DataError("predict: graph feature dim " + std::to_string(g.feature_dim()) +
                        " does not match model input dim " + std::to_string(m.in_dim()));
    if (m.out_dim() != 2) throw DataError("predict: model does not emit 2 logits");
    size_t n = g.node_count();
    Mat<float> h0(n, g.feature_dim());
    std::copy(g.features().begin(), g.features().end(), h0.d.begin());
    NeighborhoodCsr nb;
    if (m.uses_message_passing()) nb = NeighborhoodCsr::from_graph(g, m.sentiment_weighted_mean);
    Mat<float> logits = model_forward(m, h0, nb);

    Prediction out;
    out.probabilities = Mat<float>(n, 2);
    for (size_t v = 0; v < n; ++v) {
        const float* l = logits.row(v);
        double mx = std::max(l[0], l[1]);
        double e0 = std::exp(double(l[0]) - mx), e1 = std::exp(double(l[1]) - mx);
        double z = e0 + e1;
        out.probabilities.at(v, 0) = float(e0 / z);
        out.probabilities.at(v, 1) = float(e1 / z);
        StanceId s = l[1] > l[0] ? StanceId::s2 : StanceId::s1;
        out.labels.assign(uint32_t(v), s, Provenance::predicted, 0);
    }
    return out;
}

TrainResult mlp_baseline(const InteractionGraph& g, const StanceAssignment& labels,
                         TrainConfig cfg) {
    if (!cfg.layers.empty()) {
        for (const LayerSpec& s : cfg.layers)
            if (s.kind != LayerKind::dense)
                throw ConfigError("mlp_baseline: layer stack must be dense-only");
    }
    cfg.arch = LayerKind::dense;
    return train(g, labels, cfg);
}

} // namespace sg
