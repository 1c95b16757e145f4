#include "sg/layers.hpp"

#include <cmath>
#include <fstream>

#include "sg/binary_io.hpp"
#include "sg/errors.hpp"
#include "sg/rng.hpp"

namespace sg {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::sage_mean: return "sage-mean";
        case LayerKind::gat: return "gat";
    }
    return "dense";
}

std::optional<LayerKind> parse_layer_kind(const std::string& s) {
    if (s == "dense" || s == "mlp") return LayerKind::dense;
    if (s == "sage-mean" || s == "sage") return LayerKind::sage_mean;
    if (s == "gat") return LayerKind::gat;
    return std::nullopt;
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::elu: return "elu";
        case Activation::identity: return "identity";
    }
    return "relu";
}

std::optional<Activation> parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "elu") return Activation::elu;
    if (s == "identity" || s == "none") return Activation::identity;
    return std::nullopt;
}

void LayerSpec::validate() const {
    if (in_dim < 1 || out_dim < 1) throw ConfigError("layer dims must be >= 1");
    if (kind == LayerKind::gat && !(leaky_slope > 0.0f && leaky_slope < 1.0f))
        throw ConfigError("gat leaky-relu slope must lie in (0, 1)");
}

bool Model::uses_message_passing() const {
    for (const LayerSpec& s : specs)
        if (s.kind != LayerKind::dense) return true;
    return false;
}

void Model::validate() const {
    if (specs.empty()) throw ConfigError("model has no layers");
    if (specs.size() != params.size()) throw ConfigError("model spec/parameter count mismatch");
    for (size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        s.validate();
        if (i + 1 < specs.size() && s.out_dim != specs[i + 1].in_dim)
            throw ConfigError("layer " + std::to_string(i) + " output dim does not chain");
        const LayerParams<float>& p = params[i];
        if (p.w.rows != s.out_dim || p.w.cols != s.in_dim)
            throw ConfigError("layer " + std::to_string(i) + " weight shape mismatch");
        bool need_attn = s.kind == LayerKind::gat;
        if (need_attn && (p.a_l.size() != s.out_dim || p.a_r.size() != s.out_dim))
            throw ConfigError("layer " + std::to_string(i) + " attention vector shape mismatch");
    }
}

Model init_model(std::span<const LayerSpec> specs, uint64_t seed, bool sentiment_weighted_mean) {
    if (specs.empty()) throw ConfigError("model has no layers");
    Model m;
    m.specs.assign(specs.begin(), specs.end());
    m.sentiment_weighted_mean = sentiment_weighted_mean;
    Rng rng(derive_seed(seed, 1));  // stream 1: parameter init
    for (const LayerSpec& s : specs) {
        s.validate();
        LayerParams<float> p;
        double limit = std::sqrt(6.0 / (double(s.in_dim) + double(s.out_dim)));
        p.w = Mat<float>(s.out_dim, s.in_dim);
        for (float& x : p.w.d) x = float((2.0 * rng.uniform() - 1.0) * limit);
        if (s.kind == LayerKind::gat) {
            double alimit = std::sqrt(6.0 / (2.0 * double(s.out_dim) + 1.0));
            p.a_l = Mat<float>(1, s.out_dim);
            p.a_r = Mat<float>(1, s.out_dim);
            for (float& x : p.a_l.d) x = float((2.0 * rng.uniform() - 1.0) * alimit);
            for (float& x : p.a_r.d) x = float((2.0 * rng.uniform() - 1.0) * alimit);
        }
        m.params.push_back(std::move(p));
    }
    m.validate();
    return m;
}

namespace {

Mat<float> one_layer(const Mat<float>& h, const NeighborhoodCsr* nb, const LayerSpec& spec,
                     const LayerParams<float>& p, std::vector<float>* alpha_out) {
    Tape<float> tape;
    auto hid = tape.leaf(h, false);
    auto wid = tape.leaf(p.w, false);
    auto al = tape.leaf(p.a_l, false);
    auto ar = tape.leaf(p.a_r, false);
    auto out = layer_forward(tape, spec, hid, wid, al, ar, nb, alpha_out);
    return tape.val(out);
}

} // namespace

Mat<float> dense_forward(const Mat<float>& h, const LayerSpec& spec, const LayerParams<float>& p) {
    return one_layer(h, nullptr, spec, p, nullptr);
}

Mat<float> sage_forward(const Mat<float>& h, const NeighborhoodCsr& nb, const LayerSpec& spec,
                        const LayerParams<float>& p) {
    return one_layer(h, &nb, spec, p, nullptr);
}

Mat<float> gat_forward(const Mat<float>& h, const NeighborhoodCsr& nb, const LayerSpec& spec,
                       const LayerParams<float>& p, std::vector<float>* alpha_out) {
    return one_layer(h, &nb, spec, p, alpha_out);
}

Mat<float> model_forward(const Model& m, const Mat<float>& h, const NeighborhoodCsr& nb) {
    m.validate();
    if (h.cols != m.in_dim()) throw DataError("model_forward: feature dimension mismatch");
    Tape<float> tape;
    auto cur = tape.leaf(h, false);
    for (size_t i = 0; i < m.specs.size(); ++i) {
        auto wid = tape.leaf(m.params[i].w, false);
        auto al = tape.leaf(m.params[i].a_l, false);
        auto ar = tape.leaf(m.params[i].a_r, false);
        cur = layer_forward(tape, m.specs[i], cur, wid, al, ar, &nb);
    }
    return tape.val(cur);
}

namespace {
constexpr char kMagic[5] = "SGM1";
}

void save_model(const std::string& path, const Model& m) {
    m.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    bin::put_magic(os, kMagic);
    bin::put_u8(os, m.sentiment_weighted_mean ? 1 : 0);
    bin::put_u32(os, uint32_t(m.specs.size()));
    for (size_t i = 0; i < m.specs.size(); ++i) {
        const LayerSpec& s = m.specs[i];
        bin::put_u8(os, uint8_t(s.kind));
        bin::put_u8(os, uint8_t(s.act));
        bin::put_u32(os, s.in_dim);
        bin::put_u32(os, s.out_dim);
        bin::put_f32(os, s.leaky_slope);
        const LayerParams<float>& p = m.params[i];
        for (float x : p.w.d) bin::put_f32(os, x);
        if (s.kind == LayerKind::gat) {
            for (float x : p.a_l.d) bin::put_f32(os, x);
            for (float x : p.a_r.d) bin::put_f32(os, x);
        }
    }
    os.flush();
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    bin::expect_magic(is, kMagic, path);
    uint8_t flags = bin::get_u8(is);
    if (flags > 1) throw DataError(path + ": unknown model flags");
    uint32_t n = bin::get_u32(is);
    if (n == 0 || n > 64) throw DataError(path + ": implausible layer count");
    Model m;
    m.sentiment_weighted_mean = flags & 1;
    for (uint32_t i = 0; i < n; ++i) {
        LayerSpec s;
        uint8_t kind = bin::get_u8(is);
        uint8_t act = bin::get_u8(is);
        if (kind > uint8_t(LayerKind::gat)) throw DataError(path + ": bad layer kind byte");
        if (act > uint8_t(Activation::identity)) throw DataError(path + ": bad activation byte");
        s.kind = LayerKind(kind);
        s.act = Activation(act);
        s.in_dim = bin::get_u32(is);
        s.out_dim = bin::get_u32(is);
        s.leaky_slope = bin::get_f32(is);
        LayerParams<float> p;
        p.w = Mat<float>(s.out_dim, s.in_dim);
        for (float& x : p.w.d) x = bin::get_f32(is);
        if (s.kind == LayerKind::gat) {
            p.a_l = Mat<float>(1, s.out_dim);
            p.a_r = Mat<float>(1, s.out_dim);
            for (float& x : p.a_l.d) x = bin::get_f32(is);
            for (float& x : p.a_r.d) x = bin::get_f32(is);
        }
        m.specs.push_back(s);
        m.params.push_back(std::move(p));
    }
    m.validate();
    return m;
}

} // namespace sg
