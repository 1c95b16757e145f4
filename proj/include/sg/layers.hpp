#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sg/tensor.hpp"

namespace sg {

enum class LayerKind : uint8_t { dense = 0, sage_mean = 1, gat = 2 };
enum class Activation : uint8_t { relu = 0, elu = 1, identity = 2 };

const char* layer_kind_name(LayerKind k);
std::optional<LayerKind> parse_layer_kind(const std::string& s);
const char* activation_name(Activation a);
std::optional<Activation> parse_activation(const std::string& s);

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    uint32_t in_dim = 0;
    uint32_t out_dim = 0;
    Activation act = Activation::relu;
    float leaky_slope = 0.2f;  // attention nonlinearity, gat only

    void validate() const;
};

template <typename T>
struct LayerParams {
    Mat<T> w;    // out_dim × in_dim
    Mat<T> a_l;  // 1 × out_dim (gat only, else empty)
    Mat<T> a_r;  // 1 × out_dim (gat only, else empty)

    template <typename U>
    LayerParams<U> cast() const {
        return {w.template cast<U>(), a_l.template cast<U>(), a_r.template cast<U>()};
    }
};

// A trained (or freshly initialized) layer stack. The message-passing flag is
// part of the model because prediction must rebuild the same neighborhood
// coefficients that training used.
struct Model {
    std::vector<LayerSpec> specs;
    std::vector<LayerParams<float>> params;
    bool sentiment_weighted_mean = false;

    size_t depth() const { return specs.size(); }
    size_t in_dim() const { return specs.empty() ? 0 : specs.front().in_dim; }
    size_t out_dim() const { return specs.empty() ? 0 : specs.back().out_dim; }
    bool uses_message_passing() const;
    void validate() const;
};

// Glorot-uniform initialization, deterministic in the seed. Parameters are
// drawn layer by layer (W row-major, then the attention vectors).
Model init_model(std::span<const LayerSpec> specs, uint64_t seed,
                 bool sentiment_weighted_mean = false);

// One layer on the tape. `w`, `al`, `ar` are tape leaves (al/ar ignored for
// non-gat layers); `nb` is required for message-passing kinds.
template <typename T>
typename Tape<T>::Id layer_forward(Tape<T>& tape, const LayerSpec& spec, typename Tape<T>::Id h,
                                   typename Tape<T>::Id w, typename Tape<T>::Id al,
                                   typename Tape<T>::Id ar, const NeighborhoodCsr* nb,
                                   std::vector<T>* alpha_out = nullptr) {
    spec.validate();
    typename Tape<T>::Id z;
    switch (spec.kind) {
        case LayerKind::dense:
            z = tape.matmul_nt(h, w);
            break;
        case LayerKind::sage_mean: {
            if (!nb) throw RuntimeError("sage layer needs a neighborhood");
            auto m = tape.neighbor_mean(h, *nb);
            z = tape.matmul_nt(m, w);
            break;
        }
        case LayerKind::gat: {
            if (!nb) throw RuntimeError("gat layer needs a neighborhood");
            auto zw = tape.matmul_nt(h, w);
            z = tape.gat_attention(zw, al, ar, *nb, T(spec.leaky_slope), alpha_out);
            break;
        }
        default:
            throw RuntimeError("unknown layer kind");
    }
    switch (spec.act) {
        case Activation::relu: return tape.relu(z);
        case Activation::elu: return tape.elu(z);
        case Activation::identity: return z;
    }
    throw RuntimeError("unknown activation");
}

// Single-layer inference entry points (no gradients).
Mat<float> dense_forward(const Mat<float>& h, const LayerSpec& spec, const LayerParams<float>& p);
Mat<float> sage_forward(const Mat<float>& h, const NeighborhoodCsr& nb, const LayerSpec& spec,
                        const LayerParams<float>& p);
Mat<float> gat_forward(const Mat<float>& h, const NeighborhoodCsr& nb, const LayerSpec& spec,
                       const LayerParams<float>& p, std::vector<float>* alpha_out = nullptr);

// Whole-stack inference.
Mat<float> model_forward(const Model& m, const Mat<float>& h, const NeighborhoodCsr& nb);

// Versioned binary checkpoint (magic "SGM1"); round-trip is bit-exact.
void save_model(const std::string& path, const Model& m);
Model load_model(const std::string& path);

} // namespace sg
