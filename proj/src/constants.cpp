#include "fgff/constants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/LU>

namespace fgff {

using std::numbers::pi;

namespace {

double det_of(const Matrix<double>& m) { return m.rows() == 0 ? 1.0 : m.determinant(); }

// memoize G_0 on the symmetry-reduced offset; each constant needs only a handful of values
Green0 cached(const LatticeKind& kind, Green0 g) {
  auto memo = std::make_shared<std::map<Point, double>>();
  return [kind, g = std::move(g), memo](const Point& p) {
    Point key = p;
    if (!kind.is_triangular()) {
      for (auto& x : key) x = std::abs(x);
      std::sort(key.begin(), key.end());
    }
    auto it = memo->find(key);
    if (it != memo->end()) return it->second;
    return memo->emplace(key, g(p)).first->second;
  };
}

}  // namespace

ConstantResult subset_constant(const LatticeKind& kind, const std::vector<double>& gammas, double prefactor,
                               const Green0& green0) {
  const int c = kind.coordination();
  if (static_cast<int>(gammas.size()) != c) throw InvalidInput("need one γ per direction");
  Matrix<double> mb(c, c);
  for (int f = 0; f < c; ++f)
    for (int g = 0; g < c; ++g) mb(f, g) = mbar_with(kind, f, g, MbarMode::plain(), green0);

  ConstantResult out;
  out.kind = kind;
  out.gammas = gammas;
  Accumulator<double> total = 0;
  for (std::uint32_t rest = 0; rest < (1u << (c - 1)); ++rest) {
    const std::uint32_t mask = (rest << 1) | 1u;
    std::vector<int> dirs;
    for (int j = 1; j < c; ++j)
      if (mask >> j & 1u) dirs.push_back(j);
    const int k = static_cast<int>(dirs.size());
    Matrix<double> sub(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub(a, b) = mb(dirs[a], dirs[b]);

    SubsetTerm t;
    t.mask = mask;
    t.size = k + 1;
    t.weight = ((k + 1) % 2 ? -1 : 1) * (k + 1);
    t.det = det_of(sub);
    t.alt_dets.assign(c, 0.0);
    double bracket = t.det;
    for (int a = 0; a < k; ++a) {
      const int alpha = dirs[a];
      Matrix<double> alt = sub;
      for (int b = 0; b < k; ++b) alt(a, b) = mb(0, dirs[b]);
      t.alt_dets[alpha] = det_of(alt);
      bracket -= gammas[alpha] * t.alt_dets[alpha];
    }
    t.contribution = prefactor * t.weight * bracket;
    total += t.contribution;
    out.terms.push_back(std::move(t));
  }
  out.value = static_cast<double>(total);
  return out;
}

double c2_closed_form() { return 2 / pi - 4 / (pi * pi); }

double ct_closed_form() {
  const double s3 = std::sqrt(3.0);
  return -25.0 / 36 + 162 / std::pow(pi, 4) - 99 * s3 / std::pow(pi, 3) + 99 / (2 * pi * pi) - 5 / (4 * s3 * pi);
}

ConstantResult c_d(int d, GreenEvaluator evaluator) {
  if (d < 2 || d > 4) throw InvalidInput("c_d is available for d = 2, 3, 4");
  const auto kind = LatticeKind::hypercubic(d);
  Green0 g0;
  switch (evaluator) {
    case GreenEvaluator::Default:
      g0 = [kind](const Point& p) { return infinite_green(kind, p); };
      break;
    case GreenEvaluator::HeatKernel:
      if (d == 2) throw InvalidInput("the heat-kernel evaluator needs d >= 3");
      g0 = green_zd_heat_kernel;
      break;
    case GreenEvaluator::Fourier:
      if (d != 3) throw InvalidInput("the Fourier evaluator is implemented for d = 3 only");
      g0 = green_z3_fourier;
      break;
  }
  // the (f = −e_1) row replacement is the only non-zero γ, with γ = −1 to add det M̄′
  std::vector<double> gammas(2 * d, 0.0);
  gammas[kind.opposite(0)] = -1.0;
  auto r = subset_constant(kind, gammas, 1.0 / d, cached(kind, g0));
  if (d == 2) r.closed_form = c2_closed_form();
  return r;
}

ConstantResult c_t() {
  const auto kind = LatticeKind::triangular();
  std::vector<double> gammas(6, 0.0);
  for (int a = 1; a < 6; ++a) gammas[a] = std::cos(a * pi / 3);
  auto r = subset_constant(kind, gammas, 0.5, cached(kind, [kind](const Point& p) { return infinite_green(kind, p); }));
  r.closed_form = ct_closed_form();
  return r;
}

ConstantResult c_t_square_degeneration() {
  const auto kind = LatticeKind::hypercubic(2);
  std::vector<double> gammas(4, 0.0);
  for (int a = 1; a < 4; ++a) gammas[a] = std::cos(a * pi / 2);
  gammas[1] = gammas[3] = 0.0;  // exact zeros instead of ~6e-17
  auto r = subset_constant(kind, gammas, 0.5, cached(kind, [kind](const Point& p) { return infinite_green(kind, p); }));
  r.closed_form = c2_closed_form();
  return r;
}

double single_site_height_one(const ConstantResult& c) {
  if (c.kind.is_triangular()) return c.value * (1.0 / 18 + 1 / (std::sqrt(3.0) * pi));
  if (c.kind.dim == 2) return c.value / pi;
  throw InvalidInput("no single-site relation for d >= 3");
}

void write_constant_csv(std::ostream& os, const ConstantResult& r) {
  os << "#schema=constant_ledger@1\n";
  os << "lattice,mask,size,weight,det,alt_sum,contribution\n";
  os.precision(17);
  for (const auto& t : r.terms) {
    double alt = 0;
    for (std::size_t a = 1; a < t.alt_dets.size(); ++a) alt += r.gammas[a] * t.alt_dets[a];
    os << r.kind.name() << ',' << t.mask << ',' << t.size << ',' << t.weight << ',' << t.det << ',' << alt << ','
       << t.contribution << '\n';
  }
}

}  // namespace fgff
