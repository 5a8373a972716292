// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fgff/combinatorics.hpp"
#include "fgff/constants.hpp"
#include "fgff/cumulants.hpp"
#include "fgff/grassmann.hpp"
#include "fgff/moments.hpp"
#include "fgff/samplers.hpp"
#include "fgff/scaling.hpp"
#include "oracles.hpp"

using namespace fgff;
using Q = Rational;
using GE = GrassmannElement<Q>;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

GE xi(const GrassmannAlgebra& a, int i) { return GE::generator(a, i); }

std::vector<std::vector<int>> good_sets_up_to_two(const FiniteLattice& L) {
  std::vector<std::vector<int>> out;
  for (int a = 0; a < L.size(); ++a) {
    out.push_back({a});
    for (int b = a + 1; b < L.size(); ++b)
      if (is_good_set(L, {a, b})) out.push_back({a, b});
  }
  return out;
}

// 1. Gaussian integral and Wick formulas
Outcome gaussian_wick() {
  std::mt19937_64 rng(101);
  int det_ok = 0, det_total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const auto A = oracle::random_rational_matrix(n, rng);
    const auto alg = GrassmannAlgebra::paired(n);
    const Q lib = berezin(exp_even(quadratic_form(alg, A)));
    const Q naive = oracle::naive_berezin(oracle::naive_exp(oracle::naive_quadratic(A)), n);
    det_ok += lib == oracle::leibniz_det(A) && naive == lib;
    ++det_total;
  }
  double worst = 0;
  int wick_total = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const auto A = oracle::random_rational_matrix(n, rng);
    if (oracle::leibniz_det(A) == 0) continue;
    const auto base = oracle::naive_exp(oracle::naive_quadratic(A));
    if (trial % 2 == 0) {
      // item 1: ∏ ψ_{I_a} ψ̄_{J_a}
      const int k = 1 + trial % n;
      std::vector<int> I(n), J(n);
      std::iota(I.begin(), I.end(), 0);
      std::iota(J.begin(), J.end(), 0);
      std::shuffle(I.begin(), I.end(), rng);
      std::shuffle(J.begin(), J.end(), rng);
      I.resize(k);
      J.resize(k);
      auto F = oracle::NaiveGrassmann::scalar(1);
      for (int a = 0; a < k; ++a) F = F * oracle::NaiveGrassmann::word({2 * I[a]}) * oracle::NaiveGrassmann::word({2 * J[a] + 1});
      const double want = oracle::naive_berezin(base * F, n).convert_to<double>();
      worst = std::max(worst, std::abs(wick_moment<double>(oracle::to_double(A), I, J) - want));
    } else {
      // item 2: ∏_a (ψ^T C)_a (B ψ̄)_a
      const int k = 1 + trial % n;
      Matrix<Q> B = oracle::random_rational_matrix(n, rng).topRows(k);
      Matrix<Q> C = oracle::random_rational_matrix(n, rng).leftCols(k);
      auto F = oracle::NaiveGrassmann::scalar(1);
      for (int a = 0; a < k; ++a) {
        oracle::NaiveGrassmann left, right;
        for (int u = 0; u < n; ++u) left += oracle::NaiveGrassmann::word({2 * u}, C(u, a));
        for (int v = 0; v < n; ++v) right += oracle::NaiveGrassmann::word({2 * v + 1}, B(a, v));
        F = F * left * right;
      }
      const double want = oracle::naive_berezin(base * F, n).convert_to<double>();
      const double got =
          wick_moment_bc<double>(oracle::to_double(A), oracle::to_double(B), oracle::to_double(C));
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    ++wick_total;
  }
  return {det_ok == det_total && worst <= 1e-12,
          std::to_string(det_ok) + "/" + std::to_string(det_total) + " Gaussian integrals exact; " +
              std::to_string(wick_total) + " Wick checks, max dev " + fmt("%.2e", worst)};
}

// 2. pinned state equals Dirichlet state
Outcome pinned_dirichlet() {
  int total = 0, ok = 0;
  for (const auto& L : {build_box(2, {1, 1}), build_box(2, {1, 2}), build_box(2, {2, 2})}) {
    const auto a0 = GrassmannAlgebra::for_lattice(L, false), ag = GrassmannAlgebra::for_lattice(L, true);
    for (std::uint64_t mask = 0; mask <= a0.top(); ++mask) {
      GE F(a0);
      F.add_term(mask, Q(1));
      ok += pinned_state(lift(F, ag), L, true) == dirichlet_state(F, L, true);
      ++total;
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " monomials equal"};
}

// 3. enumeration = determinant = Grassmann state
Outcome triple_equality() {
  const auto L = build_box(2, {2, 3});
  const auto rec = oracle::recurrent_configs(L);
  const GreenTable<Q> G(L);
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  int ok = 0, total = 0;
  for (const auto& V : good_sets_up_to_two(L)) {
    const Q e = oracle::enumerated_height_one(rec, V);
    GE F = GE::one(alg);
    for (int v : V) F = F * x_field<Q>(alg, L, v) * y_field<Q>(alg, L, v);
    ok += e == height_one_prob(G, V) && e == dirichlet_state(F, L, true);
    ++total;
  }
  const auto L3 = build_box(2, {3, 3});
  const auto rec3 = oracle::recurrent_configs(L3);
  const GreenTable<double> G3(L3);
  double worst = 0;
  int total3 = 0;
  for (const auto& V : good_sets_up_to_two(L3)) {
    worst = std::max(worst, std::abs(height_one_prob(G3, V) - oracle::enumerated_height_one(rec3, V).convert_to<double>()));
    ++total3;
  }
  return {ok == total && worst <= 1e-12,
          "2x3: " + std::to_string(ok) + "/" + std::to_string(total) + " sets exact; 3x3: " + std::to_string(total3) +
              " sets, max dev " + fmt("%.2e", worst)};
}

// 4. degree-field closed form vs partition sum
Outcome degree_closed_form() {
  double worst = 0;
  int checks = 0;
  const std::vector<std::pair<int, std::vector<Point>>> cases{
      {7, {{1, 1}, {5, 5}}}, {7, {{1, 2}, {3, 4}, {5, 1}}}, {9, {{2, 2}, {6, 5}}}, {9, {{1, 1}, {4, 7}, {7, 3}}}};
  for (const auto& [side, pts] : cases) {
    const auto L = build_box(2, {side, side});
    const GreenTable<double> G(L);
    std::vector<int> V;
    for (const auto& p : pts) V.push_back(L.index(p));
    for (auto f : {FieldKind::NegX, FieldKind::Degree}) {
      worst = std::max(worst, rel(x_cumulant_closed(G, V, f), cumulant_partition_sum(G, V, f)));
      ++checks;
    }
  }
  return {worst <= 1e-12, std::to_string(checks) + " cumulants, max rel dev " + fmt("%.2e", worst)};
}

// 5. height-one closed form vs partition sum
Outcome height_closed_form() {
  const auto L = build_box(2, {7, 7});
  const GreenTable<double> G(L);
  double worst = 0;
  for (const auto& pts : std::vector<std::vector<Point>>{{{2, 2}, {4, 5}}, {{1, 3}, {5, 3}}, {{0, 0}, {6, 6}}}) {
    std::vector<int> V;
    for (const auto& p : pts) V.push_back(L.index(p));
    worst = std::max(worst, rel(xy_cumulant_closed(G, V), cumulant_partition_sum(G, V, FieldKind::XY)));
  }
  return {worst <= 1e-10, "3 pairs on 7x7, max rel dev " + fmt("%.2e", worst)};
}

// 6. lattice constants
Outcome constants() {
  const double s3 = std::sqrt(3.0);
  const double c2_want = 2 / pi - 4 / (pi * pi);
  const double ct_want = -25.0 / 36 + 162 / std::pow(pi, 4) - 99 * s3 / std::pow(pi, 3) + 99 / (2 * pi * pi) -
                         5 / (4 * s3 * pi);
  const double c2 = c_d(2).value, ct = c_t().value, sq = c_t_square_degeneration().value;
  const bool ok = std::abs(c2 - c2_want) <= 1e-9 && std::abs(ct - ct_want) <= 1e-6 && std::abs(sq - c2) <= 1e-9;
  return {ok, fmt("C2 = %.12f (dev %.1e), CT = %.4f (dev %.1e)", c2, c2 - c2_want, ct, ct - ct_want) +
                  fmt(", square degeneration dev %.1e", sq - c2)};
}

// 7. height-one probability at the centre of a large box
Outcome height_asymptotics() {
  const auto L = build_box(2, {101, 101});
  const GreenTable<double> G(L);
  const double p = height_one_prob(G, {L.index({50, 50})});
  const double want = 2 / (pi * pi) - 4 / (pi * pi * pi);
  return {std::abs(p - want) <= 1e-3, fmt("P = %.6f vs %.6f", p, want)};
}

// 8. Stirling identity
Outcome stirling() {
  bool ok = true;
  for (int m = 1; m <= 10; ++m) {
    boost::multiprecision::cpp_int alt = 0, fact = 1;
    for (int k = 1; k <= m; ++k) {
      if (k > 1) fact *= k - 1;
      const boost::multiprecision::cpp_int term = fact * oracle::stirling2_explicit(m, k);
      alt += k % 2 ? term : boost::multiprecision::cpp_int(-term);
    }
    const int want = m == 1 ? 1 : 0;
    ok = ok && alt == want && stirling_alternating_sum(m) == want;
  }
  return {ok, "m = 1..10"};
}

// 9. η-invariance
Outcome eta_invariance() {
  const auto L = build_box(2, {5, 5});
  const GreenTable<Q> G(L);
  int ok = 0, total = 0;
  for (const auto& V : std::vector<std::vector<int>>{{L.index({1, 1}), L.index({3, 2})},
                                                     {L.index({0, 0}), L.index({2, 0})}}) {
    const Q ref = height_one_prob(G, V);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        ok += height_one_prob(G, V, std::vector<int>{a, b}) == ref;
        ++total;
      }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " choices identical"};
}

// 10. Monte Carlo consistency
Outcome monte_carlo() {
  double worst = 0;
  int obs = 0;
  {
    const auto L = build_box(2, {5, 5});
    const GreenTable<double> G(L);
    const std::vector<int> sites{L.index({2, 2}), L.index({0, 0}), L.index({0, 2})};
    const std::vector<int> pair{L.index({1, 1}), L.index({3, 3})};
    ChainOptions o;
    o.steps = 2'000'000;
    o.burn_in = 10'000;
    o.seed = 424242;
    o.joint = {pair};
    const auto st = chain_sample(L, o);
    for (int v : sites) {
      const auto& e = st.height_freq[v][0];
      worst = std::max(worst, std::abs(e.mean - height_one_prob(G, {v})) / e.stderr_);
      ++obs;
    }
    worst = std::max(worst, std::abs(st.joint[0].mean - height_one_prob(G, pair)) / st.joint[0].stderr_);
    ++obs;
  }
  {
    const auto L = build_box(2, {8, 8});
    const GreenTable<double> G(L);
    const EdgeSet edges{{L.index({0, 0}), 2}, {L.index({3, 3}), 0}, {L.index({3, 4}), 1}, {L.index({7, 4}), 0}};
    const auto st = ust_sample(L, 100'000, 777, edges, 4);
    if (!st.all_valid) return {false, "Wilson produced an invalid tree"};
    for (std::size_t i = 0; i < edges.size(); ++i) {
      worst = std::max(worst, std::abs(st.edge_freq[i].mean - ust_contains_prob(G, {edges[i]})) / st.edge_freq[i].stderr_);
      ++obs;
    }
    for (int v : {L.index({3, 3}), L.index({0, 5})}) {
      worst = std::max(worst, std::abs(st.degree_field[v].mean - x_moment(G, {v})) / st.degree_field[v].stderr_);
      ++obs;
    }
  }
  return {worst <= 4, std::to_string(obs) + " observables, max |z| = " + fmt("%.2f", worst)};
}

// 11. triangular closed forms
Outcome triangular() {
  const auto T = build_triangular_patch(5);
  const GreenTable<double> G(T);
  const std::vector<int> V{T.index({-1, 0}), T.index({1, 0})};
  const double deg = rel(triangular_cumulants(G, V, FieldKind::Degree), cumulant_partition_sum(G, V, FieldKind::Degree));
  const double xy = rel(triangular_cumulants(G, V, FieldKind::XY), cumulant_partition_sum(G, V, FieldKind::XY));
  return {deg <= 1e-10 && xy <= 1e-8, fmt("Degree rel dev %.2e, XY rel dev %.2e", deg, xy)};
}

// 12. scaling limits
Outcome scaling() {
  const std::vector<Vec2> V{{-0.3, 0}, {0.3, 0}};
  const std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64};
  bool ok = true;
  std::string detail;
  for (auto f : {FieldKind::NegX, FieldKind::Degree}) {
    const auto s = convergence_sweep(f, V, eps);
    const double last = s.rows.back().rel_error;
    ok = ok && s.non_monotone_steps <= 1 && last < s.rows.front().rel_error && last <= 0.15;
    detail += to_string(f) + fmt(" errors %.3f/%.3f/%.3f; ", s.rows[0].rel_error, s.rows[1].rel_error, last);
  }
  // normalization audit on configurations whose points sit on the ε = 1/64 grid
  auto spread = [&](const std::vector<std::vector<Vec2>>& configs) {
    double lo = 1e300, hi = -1e300;
    for (const auto& W : configs) {
      const double r = scaled_cumulant(FieldKind::NegX, W, eps.back()) / continuum_target(FieldKind::NegX, W);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return std::pair{lo, hi};
  };
  const auto [lo, hi] = spread({{{-0.25, 0}, {0.25, 0}}, {{-0.25, -0.125}, {0.25, 0.25}}, {{-0.375, 0.125}, {0.125, -0.25}}});
  const auto [lo2, hi2] = spread({{{-0.3, 0}, {0.3, 0}}, {{0, -0.3}, {0.2, 0.25}}, {{-0.2, 0.1}, {0.35, -0.2}}});
  ok = ok && hi / lo - 1 <= 0.05;
  detail += fmt("audit ratios %.4f..%.4f (off-grid %.3f..%.3f)", lo, hi, lo2, hi2);
  return {ok, detail};
}

// 13. smeared cumulants
Outcome smeared() {
  const TestFunction f{{-0.4, 0}, 0.15, 1.0}, g{{0.4, 0}, 0.15, 1.0};
  SmearOptions o;
  o.threads = 4;
  const double eps = 1.0 / 48;
  const double val = smeared_cumulant(FieldKind::NegX, {f, g}, eps, o);
  const double target = smeared_target(FieldKind::NegX, {f, g}, o);
  TestFunction f3 = f;
  f3.amplitude = 3.0;
  const double scaled = smeared_cumulant(FieldKind::NegX, {f3, g}, eps, o);
  const bool linear = std::abs(scaled - 3 * val) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(3 * val);
  return {rel(val, target) <= 0.2 && linear,
          fmt("rel error %.4f; amplitude x3 dev %.1e", rel(val, target), rel(scaled, 3 * val))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Gaussian integral and Wick identities", gaussian_wick},
      {"pinned state equals Dirichlet state", pinned_dirichlet},
      {"height-one triple equality", triple_equality},
      {"degree-field closed form vs partition sum", degree_closed_form},
      {"height-one closed form vs partition sum", height_closed_form},
      {"lattice constants", constants},
      {"height-one probability at the centre of 101x101", height_asymptotics},
      {"Stirling identity", stirling},
      {"eta-invariance", eta_invariance},
      {"Monte Carlo consistency", monte_carlo},
      {"triangular closed forms", triangular},
      {"scaling limits", scaling},
      {"smeared cumulants", smeared},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << r.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  return failed ? 1 : 0;
}
