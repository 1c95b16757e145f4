#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "sg/errors.hpp"
#include "sg/layers.hpp"
#include "sg/rng.hpp"
#include "sg/tensor.hpp"

#include "gnn_checks.hpp"
#include "test_support.hpp"

using namespace sg;
using sgtest::random_edges;
using sgtest::random_mat;

TEST_CASE("matmul_nt forward matches hand-computed values") {
    Tape<double> tape;
    Mat<double> a(2, 3), b(2, 3);  // C = A B^T is 2x2
    a.d = {1, 2, 3, 4, 5, 6};
    b.d = {1, 0, 1, 0, 1, 0};
    auto ic = tape.matmul_nt(tape.leaf(a, false), tape.leaf(b, false));
    const Mat<double>& c = tape.val(ic);
    CHECK(c.at(0, 0) == doctest::Approx(4));   // 1+3
    CHECK(c.at(0, 1) == doctest::Approx(2));   // 2
    CHECK(c.at(1, 0) == doctest::Approx(10));  // 4+6
    CHECK(c.at(1, 1) == doctest::Approx(5));
    CHECK_THROWS_AS(tape.matmul_nt(tape.leaf(Mat<double>(2, 3), false),
                                   tape.leaf(Mat<double>(2, 4), false)),
                    RuntimeError);
}

TEST_CASE("matmul_nt backward: scalar dot product gives dA = B, dB = A") {
    Tape<double> tape;
    Mat<double> a(1, 3), b(1, 3);
    a.d = {1, 2, 3};
    b.d = {4, 5, 6};
    auto ia = tape.leaf(a, true);
    auto ib = tape.leaf(b, true);
    auto ic = tape.matmul_nt(ia, ib);  // 1x1 = a . b
    CHECK(tape.scalar(ic) == doctest::Approx(32));
    tape.backward(ic);
    CHECK(tape.grad(ia).d == std::vector<double>{4, 5, 6});
    CHECK(tape.grad(ib).d == std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(tape.backward(tape.leaf(Mat<double>(2, 2), true)), RuntimeError);
}

TEST_CASE("neighborhood csr: self-loops added, rows sum to one") {
    Rng rng(5);
    for (int t = 0; t < 5; ++t) {
        uint32_t n = 8 + uint32_t(rng.below(10));
        auto edges = random_edges(rng, n, n * 2);
        NeighborhoodCsr nb = NeighborhoodCsr::from_undirected(n, edges);
        REQUIRE(nb.n == n);
        for (uint32_t v = 0; v < n; ++v) {
            auto row = nb.neighbors(v);
            CHECK(std::find(row.begin(), row.end(), v) != row.end());
            CHECK(std::is_sorted(row.begin(), row.end()));
            double s = 0.0;
            for (double c : nb.coefs(v)) s += c;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            // Undirected: u in N(v) <=> v in N(u)
            for (uint32_t u : row) {
                auto back = nb.neighbors(u);
                CHECK(std::find(back.begin(), back.end(), v) != back.end());
            }
        }
    }
}

TEST_CASE("sage layer matches the dense mean-aggregation oracle within 1e-5") {
    Rng rng(17);
    CHECK(sgtest::max_sage_oracle_error(rng, 8) <= 1e-5);
}

TEST_CASE("gat layer matches per-edge recomputation; attention rows sum to 1") {
    Rng rng(23);
    sgtest::GatOracleErrors err = sgtest::gat_oracle_check(rng, 8);
    CHECK(err.value <= 1e-5);
    CHECK(err.alpha <= 1e-5);
    CHECK(err.row_sum <= 1e-6);
}

TEST_CASE("sage output is equivariant under node relabeling") {
    Rng rng(29);
    const uint32_t n = 14;
    auto edges = random_edges(rng, n, 30);
    Mat<float> h = random_mat(rng, n, 5);
    Mat<float> w = random_mat(rng, 3, 5, 0.5);
    LayerSpec spec{LayerKind::sage_mean, 5, 3, Activation::relu, 0.2f};

    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (uint32_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    NeighborhoodCsr nb = NeighborhoodCsr::from_undirected(n, edges);
    Mat<float> base = sage_forward(h, nb, spec, {w, {}, {}});

    std::vector<std::pair<uint32_t, uint32_t>> pedges;
    for (auto [a, b] : edges) pedges.emplace_back(perm[a], perm[b]);
    Mat<float> ph(n, 5);
    for (uint32_t v = 0; v < n; ++v)
        for (size_t i = 0; i < 5; ++i) ph.at(perm[v], i) = h.at(v, i);
    NeighborhoodCsr pnb = NeighborhoodCsr::from_undirected(n, pedges);
    Mat<float> permuted = sage_forward(ph, pnb, spec, {w, {}, {}});

    for (uint32_t v = 0; v < n; ++v)
        for (size_t j = 0; j < 3; ++j)
            CHECK(double(permuted.at(perm[v], j)) ==
                  doctest::Approx(double(base.at(v, j))).epsilon(1e-5).scale(1.0));
}

TEST_CASE("elu activation and its derivative") {
    Tape<double> tape;
    Mat<double> x(1, 3);
    x.d = {-1.0, 0.0, 2.0};
    auto ix = tape.leaf(x, true);
    auto iy = tape.elu(ix);
    CHECK(tape.val(iy).d[0] == doctest::Approx(std::expm1(-1.0)));
    CHECK(tape.val(iy).d[1] == doctest::Approx(0.0));
    CHECK(tape.val(iy).d[2] == doctest::Approx(2.0));
    Mat<double> ones(1, 3);
    ones.d = {1, 1, 1};
    auto s = tape.matmul_nt(iy, tape.leaf(ones, false));  // 1x1 sum(y)
    tape.backward(s);
    const Mat<double>& dx = tape.grad(ix);
    CHECK(dx.d[0] == doctest::Approx(std::exp(-1.0)));  // d/dx elu = y + 1 = e^x below zero
    CHECK(dx.d[2] == doctest::Approx(1.0));
}

TEST_CASE("finite-difference gradient check on 20 random small graphs") {
    Rng rng(4242);
    const LayerKind kinds[3] = {LayerKind::dense, LayerKind::sage_mean, LayerKind::gat};
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        sgtest::GradCheckNet net = sgtest::random_net(rng, kinds[t % 3]);
        worst = std::max(worst,
                         sgtest::max_grad_rel_error(net, sgtest::random_params(rng, net.specs),
                                                    1e-3));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("model initialization is deterministic and save/load is bit-exact") {
    std::vector<LayerSpec> specs = {{LayerKind::gat, 6, 4, Activation::elu, 0.2f},
                                    {LayerKind::gat, 4, 2, Activation::identity, 0.2f}};
    Model m1 = init_model(specs, 99, true);
    Model m2 = init_model(specs, 99, true);
    CHECK(m1.params[0].w.d == m2.params[0].w.d);
    CHECK(m1.params[1].a_l.d == m2.params[1].a_l.d);
    Model m3 = init_model(specs, 100, true);
    CHECK(m1.params[0].w.d != m3.params[0].w.d);
    CHECK(m1.uses_message_passing());

    sgtest::TempDir dir("model");
    std::string path = dir.file("m.sgm");
    save_model(path, m1);
    Model back = load_model(path);
    CHECK(back.sentiment_weighted_mean == m1.sentiment_weighted_mean);
    REQUIRE(back.specs.size() == 2);
    CHECK(back.specs[0].kind == LayerKind::gat);
    CHECK(back.specs[0].act == Activation::elu);
    CHECK(back.params[0].w.d == m1.params[0].w.d);
    CHECK(back.params[0].a_l.d == m1.params[0].a_l.d);
    CHECK(back.params[1].a_r.d == m1.params[1].a_r.d);

    std::string raw = sgtest::read_file(path);
    raw[1] = 'X';
    sgtest::write_file(path, raw);
    CHECK_THROWS_AS(load_model(path), DataError);
}

TEST_CASE("model validation rejects inconsistent stacks") {
    std::vector<LayerSpec> bad_chain = {{LayerKind::dense, 4, 3, Activation::relu, 0.2f},
                                        {LayerKind::dense, 5, 2, Activation::identity, 0.2f}};
    CHECK_THROWS_AS(init_model(bad_chain, 1), ConfigError);
    LayerSpec zero{LayerKind::dense, 0, 2, Activation::relu, 0.2f};
    CHECK_THROWS_AS(zero.validate(), ConfigError);
    LayerSpec slope{LayerKind::gat, 3, 2, Activation::relu, 1.5f};
    CHECK_THROWS_AS(slope.validate(), ConfigError);
}

TEST_CASE("sentiment-weighted neighborhood uses mean absolute sentiment, renormalized") {
    // Two directed edges a->b (0.8) and b->a (-0.4): pair weight (0.8+0.4)/2 = 0.6.
    // One edge a->c (-0.2): pair weight 0.2. Self-loop weight 1.
    Interner users;
    users.intern("a");
    users.intern("b");
    users.intern("c");
    std::vector<ConsolidatedEdge> edges = {{0, 1, 0.8}, {1, 0, -0.4}, {0, 2, -0.2}};
    std::vector<float> feats(3 * 1, 0.0f);
    InteractionGraph g(users, edges, feats, 1, {1, 1, 1});
    NeighborhoodCsr nb = NeighborhoodCsr::from_graph(g, true);
    // Row a: neighbors {a, b, c} with unnormalized weights {1, 0.6, 0.2}.
    auto row = nb.neighbors(0);
    REQUIRE(row.size() == 3);
    auto coefs = nb.coefs(0);
    double total = 1.0 + 0.6 + 0.2;
    CHECK(coefs[0] == doctest::Approx(1.0 / total));
    CHECK(coefs[1] == doctest::Approx(0.6 / total));
    CHECK(coefs[2] == doctest::Approx(0.2 / total));
    double s = 0.0;
    for (double c : coefs) s += c;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}
