#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "sg/errors.hpp"
#include "sg/interaction_graph.hpp"
#include "sg/kernels.hpp"

namespace sg {

// Dense row-major matrix. T is float in the training path and double in the
// shadow path used by gradient checking.
template <typename T>
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<T> d;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), d(r * c, T(0)) {}

    T* row(size_t i) { return d.data() + i * cols; }
    const T* row(size_t i) const { return d.data() + i * cols; }
    T& at(size_t i, size_t j) { return d[i * cols + j]; }
    const T& at(size_t i, size_t j) const { return d[i * cols + j]; }
    size_t size() const { return d.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    template <typename U>
    Mat<U> cast() const {
        Mat<U> out(rows, cols);
        for (size_t i = 0; i < d.size(); ++i) out.d[i] = U(d[i]);
        return out;
    }
};

// Message-passing neighborhood: undirected view of the interaction edges with
// a self-loop added to every node. `coef` holds the aggregation coefficient
// per (node, neighbor) entry; each row sums to 1.
struct NeighborhoodCsr {
    size_t n = 0;
    std::vector<uint64_t> off;   // n+1
    std::vector<uint32_t> idx;   // neighbor ids (self included), ascending per row
    std::vector<double> coef;    // aligned with idx

    std::span<const uint32_t> neighbors(uint32_t v) const {
        return {idx.data() + off[v], idx.data() + off[v + 1]};
    }
    std::span<const double> coefs(uint32_t v) const {
        return {coef.data() + off[v], coef.data() + off[v + 1]};
    }
    size_t degree(uint32_t v) const { return size_t(off[v + 1] - off[v]); }

    // Uniform coefficients 1/|N(v)∪{v}|; with sentiment weighting, neighbor u
    // is weighted by the mean |sentiment| over the directed edges between v
    // and u (self-loop weight 1), renormalized per row.
    static NeighborhoodCsr from_graph(const InteractionGraph& g, bool sentiment_weighted = false);

    // Test/generator entry: explicit undirected edges over n nodes.
    static NeighborhoodCsr from_undirected(size_t n,
                                           std::span<const std::pair<uint32_t, uint32_t>> edges);
};

namespace detail {

inline float t_dot(const float* x, const float* y, size_t n) { return kern::dot(x, y, n); }
inline double t_dot(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s = std::fma(x[i], y[i], s);
    return s;
}
inline void t_axpy(float a, const float* x, float* y, size_t n) { kern::axpy(a, x, y, n); }
inline void t_axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

} // namespace detail

// Reverse-mode tape over Mat<T>. Nodes are recorded in creation order;
// backward() replays them in reverse. Closures capture node ids only, so the
// node vector may reallocate freely.
template <typename T>
class Tape {
public:
    using Id = uint32_t;

    Id leaf(Mat<T> v, bool needs_grad) {
        return push(std::move(v), needs_grad, {});
    }

    const Mat<T>& val(Id id) const { return nodes_[id].val; }
    const Mat<T>& grad(Id id) const { return nodes_[id].grad; }
    T scalar(Id id) const { return nodes_[id].val.d.at(0); }

    // C = A Bᵀ with A m×k, B n×k.
    Id matmul_nt(Id a, Id b) {
        const Mat<T>&A = nodes_[a].val, &B = nodes_[b].val;
        if (A.cols != B.cols) throw RuntimeError("matmul_nt: inner dimensions differ");
        Mat<T> c(A.rows, B.rows);
        for (size_t i = 0; i < A.rows; ++i)
            for (size_t j = 0; j < B.rows; ++j)
                c.at(i, j) = detail::t_dot(A.row(i), B.row(j), A.cols);
        bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
        return push(std::move(c), ng, [a, b](Tape& t, Id out) {
            const Mat<T>& dc = t.nodes_[out].grad;
            const Mat<T>&A = t.nodes_[a].val, &B = t.nodes_[b].val;
            if (t.nodes_[a].needs_grad) {
                Mat<T>& da = t.nodes_[a].grad;
                for (size_t i = 0; i < A.rows; ++i)
                    for (size_t j = 0; j < B.rows; ++j)
                        detail::t_axpy(dc.at(i, j), B.row(j), da.row(i), A.cols);
            }
            if (t.nodes_[b].needs_grad) {
                Mat<T>& db = t.nodes_[b].grad;
                for (size_t i = 0; i < A.rows; ++i)
                    for (size_t j = 0; j < B.rows; ++j)
                        detail::t_axpy(dc.at(i, j), A.row(i), db.row(j), A.cols);
            }
        });
    }

    // out[v] = Σ_u coef(v,u) · h[u] over the self-inclusive neighborhood.
    Id neighbor_mean(Id h, const NeighborhoodCsr& nb) {
        const Mat<T>& H = nodes_[h].val;
        if (H.rows != nb.n) throw RuntimeError("neighbor_mean: row count differs from node count");
        Mat<T> out(H.rows, H.cols);
        for (uint32_t v = 0; v < nb.n; ++v) {
            auto us = nb.neighbors(v);
            auto cs = nb.coefs(v);
            for (size_t k = 0; k < us.size(); ++k)
                detail::t_axpy(T(cs[k]), H.row(us[k]), out.row(v), H.cols);
        }
        return push(std::move(out), nodes_[h].needs_grad, [h, &nb](Tape& t, Id out_id) {
            const Mat<T>& dout = t.nodes_[out_id].grad;
            Mat<T>& dh = t.nodes_[h].grad;
            for (uint32_t v = 0; v < nb.n; ++v) {
                auto us = nb.neighbors(v);
                auto cs = nb.coefs(v);
                for (size_t k = 0; k < us.size(); ++k)
                    detail::t_axpy(T(cs[k]), dout.row(v), dh.row(us[k]), dout.cols);
            }
        });
    }

    // Edge-softmax attention aggregation: score(v,u) = leakyrelu(al·z_v + ar·z_u),
    // α = softmax over each row's neighborhood, out[v] = Σ_u α_vu z[u].
    // al and ar are 1×d leaves. Optionally exposes α (aligned with nb.idx).
    Id gat_attention(Id z, Id al, Id ar, const NeighborhoodCsr& nb, T slope,
                     std::vector<T>* alpha_out = nullptr) {
        const Mat<T>& Z = nodes_[z].val;
        if (Z.rows != nb.n) throw RuntimeError("gat_attention: row count differs from node count");
        if (nodes_[al].val.size() != Z.cols || nodes_[ar].val.size() != Z.cols)
            throw RuntimeError("gat_attention: attention vector dimension mismatch");
        size_t d = Z.cols;
        const T* av = nodes_[al].val.d.data();
        const T* bv = nodes_[ar].val.d.data();

        auto s = std::make_shared<std::vector<T>>(nb.n);   // al·z_v
        auto tt = std::make_shared<std::vector<T>>(nb.n);  // ar·z_u
        for (uint32_t v = 0; v < nb.n; ++v) {
            (*s)[v] = detail::t_dot(av, Z.row(v), d);
            (*tt)[v] = detail::t_dot(bv, Z.row(v), d);
        }
        auto pre = std::make_shared<std::vector<T>>(nb.idx.size());    // pre-activation scores
        auto alpha = std::make_shared<std::vector<T>>(nb.idx.size());  // softmax coefficients
        Mat<T> out(Z.rows, Z.cols);
        for (uint32_t v = 0; v < nb.n; ++v) {
            auto us = nb.neighbors(v);
            size_t base = nb.off[v];
            T mx = -std::numeric_limits<T>::infinity();
            for (size_t k = 0; k < us.size(); ++k) {
                T x = (*s)[v] + (*tt)[us[k]];
                T e = x >= T(0) ? x : slope * x;
                (*pre)[base + k] = x;
                (*alpha)[base + k] = e;
                mx = std::max(mx, e);
            }
            T denom = T(0);
            for (size_t k = 0; k < us.size(); ++k) {
                T ex = std::exp((*alpha)[base + k] - mx);
                (*alpha)[base + k] = ex;
                denom += ex;
            }
            for (size_t k = 0; k < us.size(); ++k) {
                (*alpha)[base + k] /= denom;
                detail::t_axpy((*alpha)[base + k], Z.row(us[k]), out.row(v), d);
            }
        }
        if (alpha_out) *alpha_out = *alpha;
        bool ng = nodes_[z].needs_grad || nodes_[al].needs_grad || nodes_[ar].needs_grad;
        return push(std::move(out), ng,
                    [z, al, ar, &nb, slope, pre, alpha](Tape& t, Id out_id) {
            const Mat<T>& dout = t.nodes_[out_id].grad;
            const Mat<T>& Z = t.nodes_[z].val;
            size_t d = Z.cols;
            const T* av = t.nodes_[al].val.d.data();
            const T* bv = t.nodes_[ar].val.d.data();
            bool gz = t.nodes_[z].needs_grad;
            bool gal = t.nodes_[al].needs_grad;
            bool gar = t.nodes_[ar].needs_grad;
            Mat<T>& dz = t.nodes_[z].grad;
            Mat<T>& dal = t.nodes_[al].grad;
            Mat<T>& dar = t.nodes_[ar].grad;
            std::vector<T> dalpha;
            for (uint32_t v = 0; v < nb.n; ++v) {
                auto us = nb.neighbors(v);
                size_t base = nb.off[v];
                dalpha.assign(us.size(), T(0));
                // dα_vu = dout_v · z_u ; also the direct path dz_u += α_vu dout_v.
                T inner = T(0);  // Σ_u α_vu dα_vu
                for (size_t k = 0; k < us.size(); ++k) {
                    dalpha[k] = detail::t_dot(dout.row(v), Z.row(us[k]), d);
                    if (gz) detail::t_axpy((*alpha)[base + k], dout.row(v), dz.row(us[k]), d);
                    inner += (*alpha)[base + k] * dalpha[k];
                }
                T gsum = T(0);  // Σ_u g_vu feeds da_l and dz_v
                for (size_t k = 0; k < us.size(); ++k) {
                    T de = (*alpha)[base + k] * (dalpha[k] - inner);  // softmax backward
                    T g = (*pre)[base + k] >= T(0) ? de : slope * de;
                    gsum += g;
                    if (gz) detail::t_axpy(g, bv, dz.row(us[k]), d);
                    if (gar) detail::t_axpy(g, Z.row(us[k]), dar.d.data(), d);
                }
                if (gal) detail::t_axpy(gsum, Z.row(v), dal.d.data(), d);
                if (gz) detail::t_axpy(gsum, av, dz.row(v), d);
            }
        });
    }

    Id relu(Id x) {
        const Mat<T>& X = nodes_[x].val;
        Mat<T> y(X.rows, X.cols);
        if constexpr (std::is_same_v<T, float>) {
            kern::relu_fwd(X.d.data(), y.d.data(), X.size());
        } else {
            for (size_t i = 0; i < X.size(); ++i) y.d[i] = X.d[i] > T(0) ? X.d[i] : T(0);
        }
        return push(std::move(y), nodes_[x].needs_grad, [x](Tape& t, Id out_id) {
            const Mat<T>& dy = t.nodes_[out_id].grad;
            const Mat<T>& X = t.nodes_[x].val;
            Mat<T>& dx = t.nodes_[x].grad;
            if constexpr (std::is_same_v<T, float>) {
                kern::relu_bwd(X.d.data(), dy.d.data(), dx.d.data(), X.size());
            } else {
                for (size_t i = 0; i < X.size(); ++i)
                    if (X.d[i] > T(0)) dx.d[i] += dy.d[i];
            }
        });
    }

    Id elu(Id x) {
        const Mat<T>& X = nodes_[x].val;
        Mat<T> y(X.rows, X.cols);
        for (size_t i = 0; i < X.size(); ++i)
            y.d[i] = X.d[i] > T(0) ? X.d[i] : std::expm1(X.d[i]);
        return push(std::move(y), nodes_[x].needs_grad, [x](Tape& t, Id out_id) {
            const Mat<T>& dy = t.nodes_[out_id].grad;
            const Mat<T>& X = t.nodes_[x].val;
            const Mat<T>& Y = t.nodes_[out_id].val;
            Mat<T>& dx = t.nodes_[x].grad;
            for (size_t i = 0; i < X.size(); ++i)
                dx.d[i] += dy.d[i] * (X.d[i] > T(0) ? T(1) : Y.d[i] + T(1));
        });
    }

    // Class-weighted softmax cross-entropy averaged over the labeled batch
    // (weighted-mean reduction). logits is n×2; batch pairs (node, class).
    Id weighted_ce_loss(Id logits, std::span<const uint32_t> nodes,
                        std::span<const uint8_t> classes, std::span<const T> class_w) {
        const Mat<T>& L = nodes_[logits].val;
        if (L.cols != 2) throw RuntimeError("weighted_ce_loss: expected 2 logit columns");
        if (nodes.size() != classes.size() || nodes.empty())
            throw RuntimeError("weighted_ce_loss: empty or mismatched batch");
        auto probs = std::make_shared<Mat<T>>(nodes.size(), 2);
        T wtotal = T(0);
        T loss = T(0);
        for (size_t i = 0; i < nodes.size(); ++i) {
            const T* l = L.row(nodes[i]);
            T m = std::max(l[0], l[1]);
            T e0 = std::exp(l[0] - m), e1 = std::exp(l[1] - m);
            T z = e0 + e1;
            probs->at(i, 0) = e0 / z;
            probs->at(i, 1) = e1 / z;
            T w = class_w[classes[i]];
            wtotal += w;
            loss -= w * std::log(probs->at(i, classes[i]));
        }
        loss /= wtotal;
        Mat<T> out(1, 1);
        out.d[0] = loss;
        std::vector<uint32_t> nodes_v(nodes.begin(), nodes.end());
        std::vector<uint8_t> classes_v(classes.begin(), classes.end());
        std::vector<T> cw(class_w.begin(), class_w.end());
        return push(std::move(out), nodes_[logits].needs_grad,
                    [logits, nodes_v, classes_v, cw, probs, wtotal](Tape& t, Id out_id) {
            T dl = t.nodes_[out_id].grad.d[0];
            Mat<T>& dlogits = t.nodes_[logits].grad;
            for (size_t i = 0; i < nodes_v.size(); ++i) {
                T w = cw[classes_v[i]] / wtotal;
                for (int c = 0; c < 2; ++c) {
                    T target = (uint8_t(c) == classes_v[i]) ? T(1) : T(0);
                    dlogits.at(nodes_v[i], c) += dl * w * (probs->at(i, c) - target);
                }
            }
        });
    }

    // Seeds d(loss)/d(loss)=1 and replays the tape in reverse creation order.
    void backward(Id loss) {
        if (nodes_[loss].val.size() != 1) throw RuntimeError("backward: loss must be scalar");
        if (nodes_[loss].grad.size() != 1) nodes_[loss].grad = Mat<T>(1, 1);
        nodes_[loss].grad.d[0] = T(1);
        for (size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (n.needs_grad && n.backward) n.backward(*this, Id(i));
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Mat<T> val;
        Mat<T> grad;
        bool needs_grad = false;
        std::function<void(Tape&, Id)> backward;
    };

    Id push(Mat<T> v, bool needs_grad, std::function<void(Tape&, Id)> bw) {
        Node n;
        n.val = std::move(v);
        n.needs_grad = needs_grad;
        if (needs_grad) n.grad = Mat<T>(n.val.rows, n.val.cols);
        n.backward = std::move(bw);
        nodes_.push_back(std::move(n));
        return Id(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
};

} // namespace sg
