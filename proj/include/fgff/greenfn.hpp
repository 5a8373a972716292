#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <unordered_map>
#include <utility>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "fgff/lattice.hpp"
#include "fgff/linalg.hpp"

namespace fgff {

using SparseFactor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// process-wide factorization cache keyed by lattice identity
std::shared_ptr<const SparseFactor> sparse_factorization(const FiniteLattice& L);

struct GreenOptions {
  int dense_limit = 1000;
};

// Dirichlet Green's function G_Λ = (−Δ_Λ)^{-1}, zero-extended outside Λ.
// Exact scalars always use a dense exact inverse; doubles switch to a sparse
// LDLT with on-demand columns above dense_limit.
template <class S>
class GreenTable {
 public:
  explicit GreenTable(FiniteLattice L, GreenOptions opts = {});

  const FiniteLattice& lattice() const { return lattice_; }
  bool is_dense() const { return dense_.size() > 0; }
  const Matrix<S>& matrix() const;
  Vector<S> column(int v) const;
  // kGhost on either side gives 0
  S operator()(int u, int v) const;
  // max |(−Δ G)(·, v) − δ_v|
  double residual(int v) const;

 private:
  const Vector<double>& cached_column(int v) const;

  FiniteLattice lattice_;
  Matrix<S> dense_;
  std::shared_ptr<const SparseFactor> factor_;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  mutable std::unordered_map<int, Vector<double>> columns_;
};

template <class S>
GreenTable<S> dirichlet_green(const FiniteLattice& L, GreenOptions opts = {}) {
  return GreenTable<S>(L, opts);
}

// M_Λ(f,g) = G(f+,g+) − G(f+,g−) − G(f−,g+) + G(f−,g−)
template <class S>
S double_gradient(const GreenTable<S>& G, const DirectedEdge& f, const DirectedEdge& g) {
  const auto& L = G.lattice();
  const int fp = L.tip(f), gp = L.tip(g);
  return G(fp, gp) - G(fp, g.tail) - G(f.tail, gp) + G(f.tail, g.tail);
}

template <class S>
Matrix<S> transfer_matrix(const GreenTable<S>& G, const EdgeSet& E) {
  const int k = static_cast<int>(E.size());
  Matrix<S> M(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) M(i, j) = M(j, i) = double_gradient(G, E[i], E[j]);
  return M;
}

// ---- infinite volume ----

// a(x) = p + q/π exactly (McCrea–Whipple recursion); |x|_∞ <= 64
std::pair<Rational, Rational> potential_kernel_z2_exact(int x1, int x2);
double potential_kernel_z2(int x1, int x2);
inline constexpr int kKernelTableRange = 64;
// same kernel by a one-dimensional Fourier quadrature (any offset)
double potential_kernel_z2_fourier(int x1, int x2);
// triangular potential kernel a_T in axial coordinates
double potential_kernel_triangular(int a1, int a2);
// d >= 3: G_0 via the continuous-time heat kernel ∫ ∏ e^{-2t} I_{x_i}(2t) dt
double green_zd_heat_kernel(const Point& x);
// d = 3 only: G_0 via the lattice Fourier integral with one axis done analytically
double green_z3_fourier(const Point& x);

// G_0 = (−Δ)^{-1} on the infinite lattice: −a/4 on Z², −a_T/6 on T
double infinite_green(const LatticeKind& kind, const Point& x);

struct MbarMode {
  enum class Kind { Plain, Prime, Alpha } kind = Kind::Plain;
  int alpha = 0;
  static MbarMode plain() { return {}; }
  static MbarMode prime() { return {Kind::Prime, 0}; }
  static MbarMode with_alpha(int a) { return {Kind::Alpha, a}; }
};

// G_0-based transfer matrix for edges at the origin, with a pluggable G_0
template <class G0>
double mbar_with(const LatticeKind& kind, int f, int g, MbarMode mode, G0&& green0) {
  if (mode.kind == MbarMode::Kind::Prime) {
    if (kind.is_triangular()) throw InvalidInput("Prime mode is for hypercubic lattices");
    if (f == kind.opposite(0)) f = 0;
  } else if (mode.kind == MbarMode::Kind::Alpha) {
    if (!kind.is_triangular() || mode.alpha < 1 || mode.alpha > 5)
      throw InvalidInput("Alpha mode needs the triangular lattice and 1 <= alpha <= 5");
    if (f == mode.alpha) f = 0;
  }
  const auto of = kind.offset(f), og = kind.offset(g);
  Point diff(kind.dim), zero(kind.dim, 0);
  for (int k = 0; k < kind.dim; ++k) diff[k] = of[k] - og[k];
  return green0(diff) - green0(Point(of)) - green0(Point(og)) + green0(zero);
}

double mbar(const LatticeKind& kind, int f, int g, MbarMode mode = MbarMode::plain());

// ---- continuum unit disk ----

using Vec2 = std::array<double, 2>;
double continuum_disk_green(const Vec2& x, const Vec2& y);
// ∂_{x_i} ∂_{y_j} g_U(x, y), closed form
double mixed_partial(const Vec2& x, const Vec2& y, int i, int j);
// same by central differences with one Richardson step
double mixed_partial_numeric(const Vec2& x, const Vec2& y, int i, int j, double h = 1e-4);

void write_kernel_csv(std::ostream& os, int range);
template <class S>
void write_green_csv(std::ostream& os, const GreenTable<S>& G, const std::vector<std::pair<int, int>>& pairs) {
  os << "#schema=green_table@1\nu,v,value\n";
  os.precision(17);
  for (auto [u, v] : pairs) os << u << ',' << v << ',' << to_double(G(u, v)) << '\n';
}

// ---- template definitions ----

template <class S>
GreenTable<S>::GreenTable(FiniteLattice L, GreenOptions opts) : lattice_(std::move(L)) {
  if constexpr (is_exact_v<S>) {
    dense_ = exact_inverse<S>(lattice_.neg_laplacian<S>());
  } else {
    if (lattice_.size() <= opts.dense_limit) {
      Eigen::LLT<Matrix<S>> llt(lattice_.neg_laplacian<S>());
      if (llt.info() != Eigen::Success) throw NumericalError("−Δ_Λ is not positive definite");
      dense_ = llt.solve(Matrix<S>::Identity(lattice_.size(), lattice_.size()));
    } else {
      factor_ = sparse_factorization(lattice_);
    }
  }
}

template <class S>
const Matrix<S>& GreenTable<S>::matrix() const {
  if (!is_dense()) throw InvalidInput("Green table is sparse; use column()");
  return dense_;
}

template <class S>
const Vector<double>& GreenTable<S>::cached_column(int v) const {
  std::lock_guard<std::mutex> lock(*mu_);
  auto it = columns_.find(v);
  if (it != columns_.end()) return it->second;
  Vector<double> e = Vector<double>::Zero(lattice_.size());
  e(v) = 1.0;
  Vector<double> col = factor_->solve(e);
  if (factor_->info() != Eigen::Success) throw NumericalError("sparse Green solve failed");
  return columns_.emplace(v, std::move(col)).first->second;
}

template <class S>
Vector<S> GreenTable<S>::column(int v) const {
  if (v < 0 || v >= lattice_.size()) throw InvalidInput("vertex outside lattice");
  if (is_dense()) return dense_.col(v);
  if constexpr (is_exact_v<S>)
    throw InvalidInput("exact Green tables are always dense");
  else
    return cached_column(v).template cast<S>();
}

template <class S>
S GreenTable<S>::operator()(int u, int v) const {
  if (u == kGhost || v == kGhost) return S(0);
  if (is_dense()) return dense_(u, v);
  if constexpr (is_exact_v<S>) {
    throw InvalidInput("exact Green tables are always dense");
  } else {
    // reuse whichever column is already cached (G is symmetric)
    {
      std::lock_guard<std::mutex> lock(*mu_);
      if (auto it = columns_.find(u); it != columns_.end()) return static_cast<S>(it->second(v));
    }
    return static_cast<S>(cached_column(v)(u));
  }
}

template <class S>
double GreenTable<S>::residual(int v) const {
  const Vector<S> col = column(v);
  Vector<double> r = lattice_.neg_laplacian_sparse() * col.unaryExpr([](const S& x) { return to_double(x); });
  r(v) -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace fgff
