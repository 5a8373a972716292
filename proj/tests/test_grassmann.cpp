#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fgff/grassmann.hpp"
#include "oracles.hpp"

using namespace fgff;
using Q = Rational;
using GE = GrassmannElement<Q>;

namespace {

GE xi(const GrassmannAlgebra& a, int i) { return GE::generator(a, i); }

// homogeneous random element of the given degree
GE random_homogeneous(const GrassmannAlgebra& a, int degree, std::mt19937_64& rng) {
  GE out(a);
  std::uniform_int_distribution<int> coef(-3, 3);
  const int m = a.generator_count();
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask)
    if (std::popcount(mask) == degree && rng() % 3 == 0) out.add_term(mask, Q(coef(rng)));
  return out;
}

oracle::NaiveGrassmann to_naive(const GE& x) {
  oracle::NaiveGrassmann out;
  for (const auto& [mask, c] : x.terms()) {
    std::vector<int> w;
    for (int i = 0; i < 64; ++i)
      if (mask >> i & 1) w.push_back(i);
    out += oracle::NaiveGrassmann::word(w, c);
  }
  return out;
}

}  // namespace

TEST_CASE("multiply: squares vanish and generators anticommute") {
  GrassmannAlgebra a(6);
  CHECK((xi(a, 1) * xi(a, 1)).is_zero());
  CHECK(multiply(xi(a, 2), xi(a, 1)) == -(xi(a, 1) * xi(a, 2)));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(multiply(xi(a, i), xi(a, j)) == -multiply(xi(a, j), xi(a, i)));
}

TEST_CASE("multiply: (1+ξ1ξ2)(1+ξ3ξ4) expands term by term") {
  GrassmannAlgebra a(4);
  const GE one = GE::one(a);
  const GE lhs = (one + xi(a, 0) * xi(a, 1)) * (one + xi(a, 2) * xi(a, 3));
  GE rhs = one;
  rhs.add_term(0b0011, Q(1));
  rhs.add_term(0b1100, Q(1));
  rhs.add_term(0b1111, Q(1));
  CHECK(lhs == rhs);
}

TEST_CASE("multiply: agrees with the naive word-sorting oracle") {
  std::mt19937_64 rng(11);
  GrassmannAlgebra a(6);
  for (int trial = 0; trial < 20; ++trial) {
    const GE x = random_homogeneous(a, 1 + trial % 3, rng) + random_homogeneous(a, 2, rng);
    const GE y = random_homogeneous(a, 2 + trial % 2, rng);
    CHECK((to_naive(x * y).terms == (to_naive(x) * to_naive(y)).terms));
  }
}

TEST_CASE("mismatched algebra instances are rejected") {
  GrassmannAlgebra a(4), b(4);
  CHECK_THROWS_AS(multiply(xi(a, 0), xi(b, 1)), InvalidInput);
}

TEST_CASE("derivative: position sign rule") {
  GrassmannAlgebra a(4);
  const GE x = xi(a, 0) * xi(a, 1);
  CHECK(derivative(0, x) == xi(a, 1));
  CHECK(derivative(1, x) == -xi(a, 0));
  CHECK(derivative(2, x).is_zero());
}

TEST_CASE("derivative: anti-derivation law on homogeneous elements") {
  std::mt19937_64 rng(5);
  GrassmannAlgebra alg(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int da = 1 + trial % 3, db = 1 + (trial / 3) % 3;
    const GE a = random_homogeneous(alg, da, rng), b = random_homogeneous(alg, db, rng);
    const int g = trial % 6;
    const GE lhs = derivative(g, a * b);
    const GE rhs = derivative(g, a) * b + (da % 2 ? Q(-1) : Q(1)) * (a * derivative(g, b));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("exp_even: trivial cases and rejection") {
  GrassmannAlgebra a(4);
  CHECK(exp_even(GE(a)) == GE::one(a));
  const GE x = xi(a, 0) * xi(a, 1);
  CHECK(exp_even(x) == GE::one(a) + x);
  CHECK_THROWS_AS(exp_even(xi(a, 0)), InvalidInput);
  CHECK_THROWS_AS(exp_even(GE::one(a) + x), InvalidInput);
}

TEST_CASE("exp_even of a quadratic form matches the naive series") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto A = oracle::random_rational_matrix(2 + trial % 2, rng);
    const auto alg = GrassmannAlgebra::paired(static_cast<int>(A.rows()));
    const GE e = exp_even(quadratic_form(alg, A));
    CHECK((to_naive(e).terms == oracle::naive_exp(oracle::naive_quadratic(A)).terms));
  }
}

TEST_CASE("berezin: Gaussian integral equals det(A)") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const auto A = oracle::random_rational_matrix(n, rng);
    const auto alg = GrassmannAlgebra::paired(n);
    CHECK(berezin(exp_even(quadratic_form(alg, A))) == oracle::leibniz_det(A));
  }
  const auto alg = GrassmannAlgebra::paired(3);
  CHECK(berezin(exp_even(quadratic_form<Q>(alg, Matrix<Q>::Identity(3, 3)))) == Q(1));
}

TEST_CASE("berezin: top coefficient equals the literal derivative chain") {
  std::mt19937_64 rng(8);
  const auto A = oracle::random_rational_matrix(3, rng);
  const auto alg = GrassmannAlgebra::paired(3);
  const GE e = exp_even(quadratic_form(alg, A)) * (xi(alg, 0) * xi(alg, 3));
  CHECK(berezin(e) == oracle::naive_berezin(to_naive(e), 3));
}

TEST_CASE("Wick: unequal index counts integrate to zero") {
  std::mt19937_64 rng(9);
  const auto A = oracle::random_rational_matrix(3, rng);
  const auto alg = GrassmannAlgebra::paired(3);
  const GE F = xi(alg, alg.psi(0)) * xi(alg, alg.psibar(1)) * xi(alg, alg.psi(2));
  CHECK(berezin(exp_even(quadratic_form(alg, A)) * F) == Q(0));
  CHECK(wick_moment<Q>(A, {0}, {1, 2}) == Q(0));
  CHECK(wick_moment<double>(Matrix<double>::Identity(2, 2), {0}, {0}) == doctest::Approx(1.0));
}

TEST_CASE("Wick item 1: det(A) det(A^{-T})_{IJ} equals the Berezin path") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix<Q> A = oracle::random_rational_matrix(4, rng);
    if (oracle::leibniz_det(A) == 0) continue;
    const auto alg = GrassmannAlgebra::paired(4);
    const std::vector<int> I{trial % 4, (trial + 1) % 4}, J{(trial + 2) % 4, (trial + 3 + trial / 4) % 4};
    if (J[0] == J[1]) continue;
    GE F = GE::one(alg);
    for (int k = 0; k < 2; ++k) F = F * xi(alg, alg.psi(I[k])) * xi(alg, alg.psibar(J[k]));
    const Q berez = berezin(exp_even(quadratic_form(alg, A)) * F);
    CHECK(wick_moment<Q>(A, I, J) == berez);
    CHECK(wick_moment<double>(oracle::to_double(A), I, J) ==
          doctest::Approx(berez.convert_to<double>()).epsilon(1e-12));
  }
}

TEST_CASE("Wick item 2: det(A) det(B A^{-1} C) equals the Berezin path") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3, k = 1 + trial % n;
    Matrix<Q> A = oracle::random_rational_matrix(n, rng);
    if (oracle::leibniz_det(A) == 0) continue;
    Matrix<Q> B = oracle::random_rational_matrix(n, rng).topRows(k);
    Matrix<Q> C = oracle::random_rational_matrix(n, rng).leftCols(k);
    const auto alg = GrassmannAlgebra::paired(n);
    GE F = GE::one(alg);
    for (int a = 0; a < k; ++a) {
      GE left(alg), right(alg);
      for (int u = 0; u < n; ++u) left += C(u, a) * xi(alg, alg.psi(u));
      for (int v = 0; v < n; ++v) right += B(a, v) * xi(alg, alg.psibar(v));
      F = F * left * right;
    }
    CHECK(wick_moment_bc<Q>(A, B, C) == berezin(exp_even(quadratic_form(alg, A)) * F));
  }
}

TEST_CASE("dirichlet_state basics") {
  const auto L1 = build_box(2, {1, 1});
  const auto alg1 = GrassmannAlgebra::for_lattice(L1, false);
  CHECK(dirichlet_state(GE::one(alg1), L1, true) == Q(1));
  const GE pp = xi(alg1, alg1.psi(0)) * xi(alg1, alg1.psibar(0));
  CHECK(dirichlet_state(pp, L1, true) == Q(1, 4));

  const auto L = build_box(2, {2, 2});
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  const Matrix<Q> G = exact_inverse<Q>(L.neg_laplacian<Q>());
  const GE F = xi(alg, alg.psi(0)) * xi(alg, alg.psibar(0)) * xi(alg, alg.psi(3)) * xi(alg, alg.psibar(3));
  CHECK(dirichlet_state(F, L, true) == G(0, 0) * G(3, 3) - G(0, 3) * G(0, 3));
}

TEST_CASE("pinned_state equals dirichlet_state on all monomials of a 1x2 box") {
  const auto L = build_box(2, {1, 2});
  const auto a0 = GrassmannAlgebra::for_lattice(L, false), ag = GrassmannAlgebra::for_lattice(L, true);
  CHECK(pinned_state(GE::one(ag), L, true) == Q(1));
  for (std::uint64_t mask = 0; mask < (1ULL << a0.generator_count()); ++mask) {
    GE F0(a0);
    F0.add_term(mask, Q(1));
    CHECK(pinned_state(lift(F0, ag), L, true) == dirichlet_state(F0, L, true));
  }
}

TEST_CASE("pinned_state of ζ_S is det(M)_S on a 2x2 box") {
  const auto L = build_box(2, {2, 2});
  const auto ag = GrassmannAlgebra::for_lattice(L, true);
  const Matrix<Q> G = exact_inverse<Q>(L.neg_laplacian<Q>());
  auto Gz = [&](int u, int v) { return (u == kGhost || v == kGhost) ? Q(0) : G(u, v); };
  for (const auto& f : edge_star(L, 0)) {
    const int t = L.tip(f);
    const Q M = Gz(t, t) - 2 * Gz(t, f.tail) + Gz(f.tail, f.tail);
    CHECK(pinned_state(zeta<Q>(ag, L, f), L, true) == M);
  }
}

TEST_CASE("ζ factors commute inside states") {
  const auto L = build_box(2, {1, 3});
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  const EdgeSet S{{0, 0}, {1, 1}, {2, 3}};
  const EdgeSet R{{2, 3}, {0, 0}, {1, 1}};
  CHECK(zeta<Q>(alg, L, S) == zeta<Q>(alg, L, R));
  CHECK(dirichlet_state(zeta<Q>(alg, L, S), L, true) == dirichlet_state(zeta<Q>(alg, L, R), L, true));
}

TEST_CASE("state engine capacity") {
  const auto L = build_box(2, {4, 5});
  const auto alg = GrassmannAlgebra::paired(L.size());
  (void)alg;
  CHECK_THROWS_AS(dirichlet_state(GE::one(GrassmannAlgebra::for_lattice(L, false)), L, true), CapacityError);
}
