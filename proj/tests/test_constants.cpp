#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fgff/constants.hpp"
#include "fgff/moments.hpp"

using namespace fgff;
using std::numbers::pi;

TEST_CASE("square lattice constant") {
  const auto c = c_d(2);
  CHECK(std::abs(c.value - (2 / pi - 4 / (pi * pi))) < 1e-9);
  REQUIRE(c.closed_form.has_value());
  CHECK(std::abs(c.value - *c.closed_form) < 1e-9);
  CHECK(c.terms.size() == 8);  // 2^{2d−1}
  CHECK(std::abs(single_site_height_one(c) - (2 / (pi * pi) - 4 / (pi * pi * pi))) < 1e-9);
  CHECK(single_site_height_one(c) == doctest::Approx(0.0736).epsilon(1e-3));
}

TEST_CASE("triangular constant") {
  const auto c = c_t();
  const double s3 = std::sqrt(3.0);
  const double closed = -25.0 / 36 + 162 / std::pow(pi, 4) - 99 * s3 / std::pow(pi, 3) + 99 / (2 * pi * pi) -
                        5 / (4 * s3 * pi);
  CHECK(std::abs(c.value - closed) < 1e-6);
  CHECK(std::abs(ct_closed_form() - closed) < 1e-15);
  CHECK(c.value == doctest::Approx(0.2241).epsilon(1e-3));
  CHECK(c.terms.size() == 32);
}

TEST_CASE("triangular single-site probability against a large patch") {
  const auto T = build_triangular_patch(40);
  const GreenTable<double> G(T);
  const double finite = height_one_prob(G, {T.index({0, 0})});
  CHECK(std::abs(finite - single_site_height_one(c_t())) < 1e-3);
}

TEST_CASE("square degeneration of the triangular template") {
  const auto sq = c_t_square_degeneration();
  const auto c2 = c_d(2);
  CHECK(std::abs(sq.value - c2.value) < 1e-9);
  REQUIRE(sq.terms.size() == c2.terms.size());
  const int opp = LatticeKind::hypercubic(2).opposite(0);
  for (std::size_t i = 0; i < sq.terms.size(); ++i) {
    const auto& a = sq.terms[i];
    const auto& b = c2.terms[i];
    CHECK(a.mask == b.mask);
    CHECK(a.det == doctest::Approx(b.det).epsilon(1e-14));
    // γ vanishes on the two perpendicular directions, so they contribute nothing
    for (int alpha = 1; alpha < 4; ++alpha)
      if (alpha != opp) CHECK(sq.gammas[alpha] * a.alt_dets[alpha] == 0.0);
    CHECK(a.alt_dets[opp] == doctest::Approx(b.alt_dets[opp]).epsilon(1e-14));
    CHECK(a.contribution == doctest::Approx(b.contribution).epsilon(1e-12));
  }
}

TEST_CASE("higher dimensions") {
  const auto c3 = c_d(3);
  const auto c3f = c_d(3, GreenEvaluator::Fourier);
  CHECK(std::abs(c3.value - c3f.value) < 1e-6);
  CHECK(c3.terms.size() == 32);
  CHECK(c3.value > 0);
  const auto c4 = c_d(4);
  CHECK(c4.terms.size() == 128);
  CHECK(c4.value > 0);
  CHECK(c4.value < c3.value);
  CHECK_THROWS(c_d(5));
  CHECK_THROWS(c_d(2, GreenEvaluator::Fourier));
}

TEST_CASE("subset ledger sums in any order") {
  auto c = c_t();
  std::mt19937_64 rng(5);
  double ref = 0;
  for (const auto& t : c.terms) ref += t.contribution;
  CHECK(ref == doctest::Approx(c.value).epsilon(1e-14));
  for (int k = 0; k < 10; ++k) {
    std::shuffle(c.terms.begin(), c.terms.end(), rng);
    long double s = 0;
    for (const auto& t : c.terms) s += t.contribution;
    CHECK(std::abs(static_cast<double>(s) - c.value) < 1e-14);
  }
  for (const auto& t : c.terms) {
    CHECK((t.mask & 1u) == 1u);
    CHECK(t.weight == (t.size % 2 ? -t.size : t.size));
  }
}

TEST_CASE("constant ledger CSV") {
  std::ostringstream os;
  write_constant_csv(os, c_d(2));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "#schema=constant_ledger@1");
  std::getline(is, line);
  CHECK(line.rfind("lattice,mask,size,weight,det,alt_sum,contribution", 0) == 0);
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows >= 8);
}
