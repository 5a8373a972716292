#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fgff/grassmann.hpp"
#include "fgff/moments.hpp"
#include "fgff/samplers.hpp"
#include "oracles.hpp"

using namespace fgff;
using Q = Rational;

namespace {

// fraction of wired spanning trees containing every edge of S
Q tree_fraction(const FiniteLattice& L, const EdgeSet& S) {
  const auto trees = oracle::wired_spanning_trees(L);
  std::int64_t hits = 0;
  for (const auto& t : trees) {
    bool all = true;
    for (const auto& f : S) all = all && std::find(t.begin(), t.end(), oracle::edge_rep(L, f)) != t.end();
    hits += all;
  }
  return Q(hits) / Q(static_cast<std::int64_t>(trees.size()));
}

// E[∏_{v∈B} deg_T(v)/c] over all wired spanning trees
Q tree_degree_moment(const FiniteLattice& L, const std::vector<int>& B) {
  const auto trees = oracle::wired_spanning_trees(L);
  Q total(0);
  for (const auto& t : trees) {
    Q prod(1);
    for (int v : B) {
      int deg = 0;
      for (const auto& e : t) deg += (e.tail == v) + (L.tip(e) == v);
      prod *= Q(deg) / Q(L.coordination());
    }
    total += prod;
  }
  return total / Q(static_cast<std::int64_t>(trees.size()));
}

Q grassmann_xy(const FiniteLattice& L, const std::vector<int>& V) {
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  auto F = GrassmannElement<Q>::one(alg);
  for (int v : V) F = F * x_field<Q>(alg, L, v) * y_field<Q>(alg, L, v);
  return dirichlet_state(F, L, true);
}

}  // namespace

TEST_CASE("zeta_moment basics") {
  const auto L1 = build_box(2, {1, 1});
  const GreenTable<Q> G1(L1);
  CHECK(zeta_moment(G1, {}) == Q(1));
  CHECK(zeta_moment(G1, {{0, 0}}) == Q(1, 4));
  CHECK(ust_contains_prob(G1, {{0, 0}, {0, 1}}) == Q(0));
  CHECK(zeta_moment(G1, {{0, 0}, {0, 0}}) == Q(0));
}

TEST_CASE("zeta_moment equals spanning-tree fractions") {
  for (const auto& L : {build_box(2, {2, 2}), build_box(2, {2, 3})}) {
    const GreenTable<Q> G(L);
    CHECK(zeta_moment(G, {{0, 0}}) == tree_fraction(L, {{0, 0}}));
    CHECK(zeta_moment(G, {{0, 1}, {1, 0}}) == tree_fraction(L, {{0, 1}, {1, 0}}));
    const EdgeSet star = edge_star(L, 0);
    CHECK(ust_contains_prob(G, star) == tree_fraction(L, star));
    const EdgeSet mixed{{0, 0}, {0, 2}, {3, 1}};
    CHECK(ust_contains_prob(G, mixed) == tree_fraction(L, mixed));
  }
}

TEST_CASE("zeta_moment: orientation, nilpotency, monotonicity") {
  const auto L = build_box(2, {3, 3});
  const GreenTable<Q> G(L);
  const DirectedEdge f{4, 0}, g{0, 1};
  CHECK(zeta_moment(G, {f, g}) == zeta_moment(G, {L.reversed(f), g}));
  CHECK(zeta_moment(G, {f, g, L.reversed(f)}) == Q(0));
  CHECK(ust_contains_prob(G, {f, g}) <= ust_contains_prob(G, {f}));
  CHECK(ust_contains_prob(G, {f, g, {8, 3}}) <= ust_contains_prob(G, {f, g}));
}

TEST_CASE("x_moment: exact cases and tree enumeration") {
  const GreenTable<Q> G1(build_box(2, {1, 1}));
  CHECK(x_moment(G1, {0}) == Q(1, 4));
  CHECK(x_moment(G1, {}) == Q(1));
  const auto L = build_box(2, {2, 3});
  const GreenTable<Q> G(L);
  CHECK(x_moment(G, {0}) == tree_degree_moment(L, {0}));
  CHECK(x_moment(G, {0, 4}) == tree_degree_moment(L, {0, 4}));
  CHECK(x_moment(G, {1, 3, 5}) == tree_degree_moment(L, {1, 3, 5}));
}

TEST_CASE("x_moment against Wilson samples") {
  const auto L = build_box(2, {5, 5});
  const GreenTable<double> G(L);
  const int v = L.index({1, 1}), w = L.index({2, 2});
  auto rng = make_rng(2718);
  const int N = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < N; ++i) {
    const auto deg = wilson_ust(L, rng).degrees(L);
    const double x = deg[v] / 4.0 * deg[w] / 4.0;
    sum += x;
    sq += x * x;
  }
  const double mean = sum / N, se = std::sqrt((sq / N - mean * mean) / N);
  CHECK(std::abs(mean - x_moment(G, {v, w})) < 4 * se);
}

TEST_CASE("xy_moment and height_one_prob: single vertex and bad sets") {
  const GreenTable<Q> G1(build_box(2, {1, 1}));
  CHECK(xy_moment(G1, {0}) == Q(1, 4));
  CHECK(height_one_prob(G1, {0}) == Q(1, 4));
  const auto L = build_box(2, {3, 3});
  const GreenTable<Q> G(L);
  CHECK(xy_moment(G, {4, 5}) == Q(0));
  CHECK(height_one_prob(G, {4, 5}) == Q(0));
  CHECK_THROWS_AS(xy_moment(G, {42}), InvalidInput);
}

TEST_CASE("3x3 box: determinant formulas equal recurrent-configuration enumeration") {
  const auto L = build_box(2, {3, 3});
  const auto rec = oracle::recurrent_configs(L);
  CHECK(Q(static_cast<std::int64_t>(rec.size())) == determinant(L.neg_laplacian<Q>()));
  const GreenTable<Q> G(L);
  const GreenTable<double> Gd(L);
  for (const std::vector<int>& V : std::vector<std::vector<int>>{{4}, {0}, {0, 8}, {1, 3}, {0, 4, 8}}) {
    const Q enumerated = oracle::enumerated_height_one(rec, V);
    CHECK(height_one_prob(G, V) == enumerated);
    CHECK(xy_moment(G, V) == enumerated);
    CHECK(std::abs(height_one_prob(Gd, V) - enumerated.convert_to<double>()) < 1e-12);
  }
}

TEST_CASE("2x3 box: determinant, Grassmann and enumeration paths agree exactly") {
  const auto L = build_box(2, {2, 3});
  const auto rec = oracle::recurrent_configs(L);
  const GreenTable<Q> G(L);
  for (const std::vector<int>& V : std::vector<std::vector<int>>{{0}, {2}, {0, 4}, {1, 3}}) {
    REQUIRE(is_good_set(L, V));
    const Q e = oracle::enumerated_height_one(rec, V);
    CHECK(xy_moment(G, V) == e);
    CHECK(height_one_prob(G, V) == e);
    CHECK(grassmann_xy(L, V) == e);
  }
}

TEST_CASE("height_one_prob: η-invariance and probability bounds") {
  const auto L = build_box(2, {5, 5});
  const GreenTable<Q> G(L);
  const std::vector<int> V{L.index({1, 1}), L.index({3, 2})};
  const Q ref = height_one_prob(G, V);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(height_one_prob(G, V, std::vector<int>{a, b}) == ref);
      CHECK(ref <= ust_contains_prob(G, {{V[0], a}, {V[1], b}}));
    }
  CHECK(ref > Q(0));
  CHECK(xy_moment(G, V) == ref);
  CHECK_THROWS_AS(height_one_prob(G, V, std::vector<int>{0}), InvalidInput);
}

TEST_CASE("height_one_prob: center of a 101x101 box") {
  using std::numbers::pi;
  const auto L = build_box(2, {101, 101});
  const GreenTable<double> G(L);
  const double p = height_one_prob(G, {L.index({50, 50})});
  CHECK(std::abs(p - (2 / (pi * pi) - 4 / (pi * pi * pi))) < 1e-3);
}

TEST_CASE("moment caps") {
  const auto T = build_triangular_patch(6);
  const GreenTable<double> G(T);
  const std::vector<int> V{T.index({-3, 0}), T.index({0, 0}), T.index({3, 0}), T.index({0, 3}), T.index({0, -3})};
  CHECK_THROWS_AS(xy_moment(G, V), CapacityError);
}
