#include "fgff/greenfn.hpp"

#include <cmath>
#include <list>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace fgff {

using std::numbers::pi;

// ---- sparse factorization cache ----

std::shared_ptr<const SparseFactor> sparse_factorization(const FiniteLattice& L) {
  static std::mutex mu;
  static std::list<std::pair<std::uint64_t, std::shared_ptr<const SparseFactor>>> cache;
  constexpr std::size_t kMaxEntries = 4;
  std::lock_guard<std::mutex> lock(mu);
  for (auto it = cache.begin(); it != cache.end(); ++it)
    if (it->first == L.id()) {
      cache.splice(cache.begin(), cache, it);
      return cache.front().second;
    }
  auto f = std::make_shared<SparseFactor>(L.neg_laplacian_sparse());
  if (f->info() != Eigen::Success) throw NumericalError("sparse factorization of −Δ_Λ failed");
  cache.emplace_front(L.id(), f);
  if (cache.size() > kMaxEntries) cache.pop_back();
  return f;
}

// ---- Z² potential kernel ----

namespace {

using HighFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<160>>;

struct KernelTableZ2 {
  // octant 0 <= y <= x <= R, stored densely by (x, y)
  std::vector<std::pair<Rational, Rational>> exact;
  std::vector<double> value;
  int range;

  explicit KernelTableZ2(int R) : range(R) {
    const int n = R + 2;
    exact.assign(static_cast<std::size_t>(n) * n, {Rational(0), Rational(0)});
    auto at = [&](int x, int y) -> std::pair<Rational, Rational>& {
      x = std::abs(x);
      y = std::abs(y);
      if (y > x) std::swap(x, y);
      return exact[static_cast<std::size_t>(x) * n + y];
    };
    Rational harmonic(0);  // Σ_{k<=m} 1/(2k−1)
    at(1, 0) = {Rational(1), Rational(0)};
    harmonic += 1;
    at(1, 1) = {Rational(0), 4 * harmonic};
    for (int m = 1; m <= R; ++m) {
      for (int y = 0; y < m; ++y) {
        auto v = at(m, y);
        v.first *= 4;
        v.second *= 4;
        for (auto [xx, yy] : {std::pair{m - 1, y}, std::pair{m, y + 1}, std::pair{m, y - 1}}) {
          const auto& w = at(xx, yy);
          v.first -= w.first;
          v.second -= w.second;
        }
        at(m + 1, y) = v;
      }
      const auto& d = at(m, m);
      const auto& e = at(m, m - 1);
      at(m + 1, m) = {2 * d.first - e.first, 2 * d.second - e.second};
      harmonic += Rational(1) / Rational(2 * (m + 1) - 1);
      at(m + 1, m + 1) = {Rational(0), 4 * harmonic};
    }
    const HighFloat hpi = boost::math::constants::pi<HighFloat>();
    value.assign(exact.size(), 0.0);
    for (int x = 0; x <= R + 1; ++x)
      for (int y = 0; y <= x; ++y) {
        const auto& [p, q] = at(x, y);
        value[static_cast<std::size_t>(x) * n + y] = static_cast<double>(HighFloat(p) + HighFloat(q) / hpi);
      }
  }

  std::size_t slot(int x, int y) const {
    x = std::abs(x);
    y = std::abs(y);
    if (y > x) std::swap(x, y);
    if (x > range) throw RangeError("potential kernel offset outside the exact table");
    return static_cast<std::size_t>(x) * (range + 2) + y;
  }
};

const KernelTableZ2& kernel_table() {
  static const KernelTableZ2 table(kKernelTableRange);
  return table;
}

std::string fmt_error(double e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

template <class F>
double integrate_finite(F&& f, double a, double b, double tol = 1e-13, double accept = 1e-9) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0;
  const double v = ts.integrate(f, a, b, tol, &err);
  if (!(err <= accept * std::max(1.0, std::abs(v))))
    throw NumericalError("quadrature did not converge (achieved " + fmt_error(err) + ")");
  return v;
}

// (1/π) ∫_0^π [1 − cos(k c) r^{|m|}] / s dk, where the inner integral
// ∫ cos(m t)/(A − B cos t) dt = 2π r^{|m|}/s was done analytically.
// A − B is passed separately so the k → 0 cancellations stay exact.
template <class AF, class BF, class DF>
double reduced_kernel(double c, int m, AF&& A, BF&& B, DF&& AminusB) {
  auto f = [&](double k) {
    const double a = A(k), b = B(k), amb = AminusB(k);
    const double s = std::sqrt(amb * (a + b));
    if (s == 0) return 0.0;
    const double rm1 = std::log1p(-amb / (a + s) - s / (a + s));  // log r, r = b/(a+s)
    const double sinh = std::sin(k * c / 2.0);
    const double one_minus_rm = -std::expm1(std::abs(m) * rm1);
    return (one_minus_rm + (1.0 - one_minus_rm) * 2.0 * sinh * sinh) / s;
  };
  return integrate_finite(f, 0.0, pi) / pi;
}

}  // namespace

std::pair<Rational, Rational> potential_kernel_z2_exact(int x1, int x2) {
  const auto& t = kernel_table();
  return t.exact[t.slot(x1, x2)];
}

double potential_kernel_z2(int x1, int x2) {
  const auto& t = kernel_table();
  return t.value[t.slot(x1, x2)];
}

double potential_kernel_z2_fourier(int x1, int x2) {
  auto sq = [](double v) { return v * v; };
  return reduced_kernel(
      x1, x2, [](double k) { return 1.0 - std::cos(k) / 2.0; }, [](double) { return 0.5; },
      [&](double k) { return sq(std::sin(k / 2.0)); });
}

double potential_kernel_triangular(int a1, int a2) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> memo;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find({a1, a2}); it != memo.end()) return it->second;
  }
  // φ(k) = (cos k1 + cos k2 + cos(k1 − k2))/3 in axial coordinates; substituting
  // k2 = t + k1/2 leaves A − B cos t with the expressions below
  const double v = (a1 == 0 && a2 == 0) ? 0.0
                                        : reduced_kernel(
                                              a1 + 0.5 * a2, a2, [](double k) { return 1.0 - std::cos(k) / 3.0; },
                                              [](double k) { return 2.0 / 3.0 * std::cos(k / 2.0); },
                                              [](double k) {
                                                const double h = std::sin(k / 4.0);
                                                return 4.0 / 3.0 * h * h * (std::cos(k / 2.0) + 2.0);
                                              });
  std::lock_guard<std::mutex> lock(mu);
  memo[{a1, a2}] = v;
  return v;
}

// ---- d >= 3 ----

namespace {

// e^{-z} I_n(z)
double scaled_bessel_i(int n, double z) {
  if (z == 0) return n == 0 ? 1.0 : 0.0;
  if (z < 600) return std::cyl_bessel_i(static_cast<double>(n), z) * std::exp(-z);
  // Hankel asymptotic series
  const double mu = 4.0 * n * n;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum / std::sqrt(2.0 * pi * z);
}

}  // namespace

double green_zd_heat_kernel(const Point& x) {
  const int d = static_cast<int>(x.size());
  if (d < 3) throw InvalidInput("heat-kernel Green's function needs d >= 3");
  static std::mutex mu;
  static std::map<Point, double> memo;
  Point key(x);
  for (auto& c : key) c = std::abs(c);
  std::sort(key.begin(), key.end());
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  auto f = [&](double t) {
    double p = 1.0;
    for (int c : key) p *= scaled_bessel_i(c, 2.0 * t);
    return p;
  };
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0;
  const double v = es.integrate(f, 1e-14, &err);
  if (!(err <= 1e-10)) throw NumericalError("heat-kernel quadrature did not converge (achieved " + fmt_error(err) + ")");
  std::lock_guard<std::mutex> lock(mu);
  memo[key] = v;
  return v;
}

double green_z3_fourier(const Point& x) {
  if (x.size() != 3) throw InvalidInput("Fourier evaluator is for d = 3");
  const int m = std::abs(x[2]);
  auto inner = [&](double k1) {
    auto g = [&](double k2) {
      const double A = 6.0 - 2.0 * std::cos(k1) - 2.0 * std::cos(k2);
      const double s = std::sqrt(std::max(A * A - 4.0, 0.0));
      if (s == 0) return 0.0;
      const double r = 2.0 / (A + s);
      return std::cos(k1 * x[0]) * std::cos(k2 * x[1]) * std::pow(r, m) / s;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(g, 0.0, pi, 1e-10);
  };
  return integrate_finite(inner, 0.0, pi, 1e-9, 1e-7) / (pi * pi);
}

double infinite_green(const LatticeKind& kind, const Point& x) {
  if (static_cast<int>(x.size()) != kind.dim) throw InvalidInput("offset dimension mismatch");
  if (kind.is_triangular()) return -potential_kernel_triangular(x[0], x[1]) / 6.0;
  if (kind.dim == 2) {
    const int r = std::max(std::abs(x[0]), std::abs(x[1]));
    return -(r <= kKernelTableRange ? potential_kernel_z2(x[0], x[1]) : potential_kernel_z2_fourier(x[0], x[1])) / 4.0;
  }
  return green_zd_heat_kernel(x);
}

double mbar(const LatticeKind& kind, int f, int g, MbarMode mode) {
  return mbar_with(kind, f, g, mode, [&](const Point& p) { return infinite_green(kind, p); });
}

// ---- continuum disk ----

namespace {
void require_inside(const Vec2& p) {
  if (!(p[0] * p[0] + p[1] * p[1] < 1.0)) throw InvalidInput("point is not strictly inside the unit disk");
}
}  // namespace

// (1/4π)[log(1 − 2x·y + |x|²|y|²) − log|x − y|²]; the first term is log(|x|·|y − x*|)²
double continuum_disk_green(const Vec2& x, const Vec2& y) {
  require_inside(x);
  require_inside(y);
  const double dx = x[0] - y[0], dy = x[1] - y[1];
  const double q = dx * dx + dy * dy;
  if (q == 0) throw InvalidInput("coincident points");
  const double xy = x[0] * y[0] + x[1] * y[1];
  const double p = 1.0 - 2.0 * xy + (x[0] * x[0] + x[1] * x[1]) * (y[0] * y[0] + y[1] * y[1]);
  return (std::log(p) - std::log(q)) / (4.0 * pi);
}

double mixed_partial(const Vec2& x, const Vec2& y, int i, int j) {
  require_inside(x);
  require_inside(y);
  if (i < 0 || i > 1 || j < 0 || j > 1) throw InvalidInput("direction index must be 0 or 1");
  const double x2 = x[0] * x[0] + x[1] * x[1], y2 = y[0] * y[0] + y[1] * y[1];
  const double p = 1.0 - 2.0 * (x[0] * y[0] + x[1] * y[1]) + x2 * y2;
  const double dxi = -2.0 * y[i] + 2.0 * x[i] * y2;
  const double dyj = -2.0 * x[j] + 2.0 * y[j] * x2;
  const double dij = -2.0 * (i == j) + 4.0 * x[i] * y[j];
  const double logp = dij / p - dxi * dyj / (p * p);
  const Vec2 d{x[0] - y[0], x[1] - y[1]};
  const double q = d[0] * d[0] + d[1] * d[1];
  if (q == 0) throw InvalidInput("coincident points");
  const double logq = -2.0 * (i == j) / q + 4.0 * d[i] * d[j] / (q * q);
  return (logp - logq) / (4.0 * pi);
}

double mixed_partial_numeric(const Vec2& x, const Vec2& y, int i, int j, double h) {
  auto central = [&](double s) {
    auto g = [&](double a, double b) {
      Vec2 xs = x, ys = y;
      xs[i] += a;
      ys[j] += b;
      return continuum_disk_green(xs, ys);
    };
    return (g(s, s) - g(s, -s) - g(-s, s) + g(-s, -s)) / (4.0 * s * s);
  };
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

void write_kernel_csv(std::ostream& os, int range) {
  os << "#schema=potential_kernel_z2@1\nx1,x2,rational_part,pi_inverse_part,value\n";
  os.precision(17);
  for (int x = 0; x <= range; ++x)
    for (int y = 0; y <= x; ++y) {
      const auto [p, q] = potential_kernel_z2_exact(x, y);
      os << x << ',' << y << ',' << p << ',' << q << ',' << potential_kernel_z2(x, y) << '\n';
    }
}

}  // namespace fgff
