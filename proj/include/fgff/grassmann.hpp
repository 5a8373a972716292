#pragma once

// Grassmann algebra over M <= 64 generators. Monomials are bitmasks in
// ascending generator order. For lattice algebras the generators are
// interleaved, ψ_v = ξ_{2v}, ψ̄_v = ξ_{2v+1}, so that the Berezin integral
// ∂_{ξ_M}…∂_{ξ_1} equals ∏_v ∂_{ψ̄_v}∂_{ψ_v} (the pairs commute) and reduces
// to the coefficient of the top monomial ξ_1…ξ_M.

#include <atomic>
#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "fgff/errors.hpp"
#include "fgff/lattice.hpp"
#include "fgff/linalg.hpp"
#include "fgff/scalar.hpp"

namespace fgff {

class GrassmannAlgebra {
 public:
  explicit GrassmannAlgebra(int generators);
  // ψ_v, ψ̄_v for v < vertices
  static GrassmannAlgebra paired(int vertices);
  // Ω^{2Λ} (ghost = false) or Ω^{2Λ^g} with the ghost as vertex |Λ| (ghost = true)
  static GrassmannAlgebra for_lattice(const FiniteLattice& L, bool ghost);

  int generator_count() const { return m_; }
  int vertex_count() const { return m_ / 2; }
  std::uint64_t id() const { return id_; }
  int psi(int v) const { return check_vertex(v), 2 * v; }
  int psibar(int v) const { return check_vertex(v), 2 * v + 1; }
  std::uint64_t top() const { return m_ == 64 ? ~0ULL : ((1ULL << m_) - 1); }

  friend bool operator==(const GrassmannAlgebra& a, const GrassmannAlgebra& b) {
    return a.id_ == b.id_ && a.m_ == b.m_;
  }

 private:
  GrassmannAlgebra(int generators, std::uint64_t id) : m_(generators), id_(id) {}
  void check_vertex(int v) const {
    if (v < 0 || 2 * v + 1 >= m_) throw InvalidInput("vertex outside the algebra");
  }
  int m_;
  std::uint64_t id_;
};

// sign of ξ_a ξ_b reordered into canonical order (a ∩ b = ∅)
inline int reorder_sign(std::uint64_t a, std::uint64_t b) {
  int swaps = 0;
  while (b) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    swaps += std::popcount(j == 63 ? 0ULL : (a >> (j + 1)));
  }
  return (swaps & 1) ? -1 : 1;
}

template <class S>
class GrassmannElement {
 public:
  using Terms = std::map<std::uint64_t, S>;

  explicit GrassmannElement(const GrassmannAlgebra& alg) : alg_(alg) {}
  static GrassmannElement constant(const GrassmannAlgebra& alg, const S& c) {
    GrassmannElement e(alg);
    e.add_term(0, c);
    return e;
  }
  static GrassmannElement one(const GrassmannAlgebra& alg) { return constant(alg, S(1)); }
  static GrassmannElement generator(const GrassmannAlgebra& alg, int i) {
    if (i < 0 || i >= alg.generator_count()) throw InvalidInput("generator outside the algebra");
    GrassmannElement e(alg);
    e.add_term(1ULL << i, S(1));
    return e;
  }
  // a monomial given as a product in the listed order
  static GrassmannElement monomial(const GrassmannAlgebra& alg, const std::vector<int>& gens) {
    GrassmannElement e = one(alg);
    for (int g : gens) e = e * generator(alg, g);
    return e;
  }

  const GrassmannAlgebra& algebra() const { return alg_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  S coefficient(std::uint64_t mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? S(0) : it->second;
  }
  void add_term(std::uint64_t mask, const S& c) {
    if (fgff::is_zero(c)) return;
    auto [it, fresh] = terms_.emplace(mask, c);
    if (!fresh) {
      it->second += c;
      if (fgff::is_zero(it->second)) terms_.erase(it);
    }
  }
  bool is_even() const {
    for (const auto& [m, c] : terms_)
      if (std::popcount(m) % 2) return false;
    return true;
  }
  bool is_odd() const {
    for (const auto& [m, c] : terms_)
      if (std::popcount(m) % 2 == 0) return false;
    return true;
  }

  GrassmannElement& operator+=(const GrassmannElement& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  GrassmannElement& operator-=(const GrassmannElement& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  GrassmannElement& operator*=(const S& s) {
    if (fgff::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
  friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }
  friend GrassmannElement operator-(GrassmannElement a) { return a *= S(-1); }
  friend GrassmannElement operator*(GrassmannElement a, const S& s) { return a *= s; }
  friend GrassmannElement operator*(const S& s, GrassmannElement a) { return a *= s; }
  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
    a.check_same(b);
    GrassmannElement out(a.alg_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        if (ma & mb) continue;
        const S c = ca * cb;
        out.add_term(ma | mb, reorder_sign(ma, mb) > 0 ? c : S(-c));
      }
    return out;
  }
  friend bool operator==(const GrassmannElement& a, const GrassmannElement& b) {
    return a.alg_ == b.alg_ && a.terms_ == b.terms_;
  }

  void check_same(const GrassmannElement& o) const {
    if (!(alg_ == o.alg_)) throw InvalidInput("Grassmann elements from different algebra instances");
  }

 private:
  GrassmannAlgebra alg_;
  Terms terms_;
};

template <class S>
GrassmannElement<S> multiply(const GrassmannElement<S>& a, const GrassmannElement<S>& b) {
  return a * b;
}

// ∂_{ξ_g}: sign (−1)^{α−1} where α is the position of g in the monomial
template <class S>
GrassmannElement<S> derivative(int g, const GrassmannElement<S>& x) {
  if (g < 0 || g >= x.algebra().generator_count()) throw InvalidInput("generator outside the algebra");
  const std::uint64_t bit = 1ULL << g;
  GrassmannElement<S> out(x.algebra());
  for (const auto& [m, c] : x.terms()) {
    if (!(m & bit)) continue;
    const bool odd = std::popcount(m & (bit - 1)) % 2;
    out.add_term(m & ~bit, odd ? S(-c) : c);
  }
  return out;
}

template <class S>
GrassmannElement<S> exp_even(const GrassmannElement<S>& x) {
  for (const auto& [m, c] : x.terms()) {
    if (m == 0) throw InvalidInput("exp_even: input has a constant term");
    if (std::popcount(m) % 2) throw InvalidInput("exp_even: input has odd-degree monomials");
  }
  auto result = GrassmannElement<S>::one(x.algebra());
  auto term = result;
  for (int k = 1; 2 * k <= x.algebra().generator_count(); ++k) {
    term = term * x;
    term *= S(1) / S(k);
    if (term.is_zero()) break;
    result += term;
  }
  return result;
}

// ∂_{ξ_M}…∂_{ξ_1} x
template <class S>
S berezin(const GrassmannElement<S>& x) {
  return x.coefficient(x.algebra().top());
}

// Σ_{u,v} ψ_u A(u,v) ψ̄_v over the first A.rows() vertices of a paired algebra
template <class S>
GrassmannElement<S> quadratic_form(const GrassmannAlgebra& alg, const Matrix<S>& A) {
  if (A.rows() != A.cols() || A.rows() > alg.vertex_count())
    throw InvalidInput("quadratic form does not match the algebra");
  GrassmannElement<S> q(alg);
  for (int u = 0; u < A.rows(); ++u)
    for (int v = 0; v < A.cols(); ++v) {
      if (fgff::is_zero(A(u, v))) continue;
      const int a = alg.psi(u), b = alg.psibar(v);
      q.add_term((1ULL << a) | (1ULL << b), a < b ? A(u, v) : S(-A(u, v)));
    }
  return q;
}

// view an element in a larger algebra sharing the generator prefix
template <class S>
GrassmannElement<S> lift(const GrassmannElement<S>& x, const GrassmannAlgebra& target) {
  if (target.generator_count() < x.algebra().generator_count())
    throw InvalidInput("lift target algebra is smaller than the source");
  GrassmannElement<S> out(target);
  for (const auto& [m, c] : x.terms()) out.add_term(m, c);
  return out;
}

inline constexpr int kMaxStateVertices = 16;

template <class S>
S dirichlet_state(const GrassmannElement<S>& F, const FiniteLattice& L, bool normalized) {
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  if (!(F.algebra() == alg)) throw InvalidInput("observable does not live in Ω^{2Λ} of this lattice");
  if (L.size() > kMaxStateVertices) throw CapacityError("Grassmann engine capped at 16 vertices");
  const Matrix<S> A = L.neg_laplacian<S>();
  const S val = berezin(exp_even(quadratic_form(alg, A)) * F);
  return normalized ? S(val / determinant(A)) : val;
}

template <class S>
S pinned_state(const GrassmannElement<S>& F, const FiniteLattice& L, bool normalized) {
  const auto alg = GrassmannAlgebra::for_lattice(L, true);
  if (!(F.algebra() == alg)) throw InvalidInput("observable does not live in Ω^{2Λ^g} of this lattice");
  if (L.size() > kMaxStateVertices) throw CapacityError("Grassmann engine capped at 16 vertices");
  const int g = L.size();
  const Matrix<S> A = -L.wired_laplacian<S>();
  auto expo = quadratic_form(alg, A);
  expo.add_term((1ULL << alg.psi(g)) | (1ULL << alg.psibar(g)), S(1));  // ⟨δ_g, ψψ̄⟩
  const auto pin = GrassmannElement<S>::monomial(alg, {alg.psi(g), alg.psibar(g)});
  const auto weight = pin * exp_even(expo);
  const S val = berezin(weight * F);
  return normalized ? S(val / berezin(weight)) : val;
}

// det(A) det(A^{-T})_{IJ}; the Wick moment of ∏_α ψ_{I_α} ψ̄_{J_α}
template <class S>
S wick_moment(const Matrix<S>& A, const std::vector<int>& I, const std::vector<int>& J) {
  if (I.size() != J.size()) return S(0);
  const Matrix<S> invT = inverse(A).transpose();
  Matrix<S> sub(I.size(), J.size());
  for (std::size_t a = 0; a < I.size(); ++a)
    for (std::size_t b = 0; b < J.size(); ++b) sub(a, b) = invT(I[a], J[b]);
  return determinant(A) * determinant(sub);
}

// det(A) det(B A^{-1} C); the moment of ∏_α (ψ^T C)_α (B ψ̄)_α
template <class S>
S wick_moment_bc(const Matrix<S>& A, const Matrix<S>& B, const Matrix<S>& C) {
  const Matrix<S> inner = B * inverse(A) * C;
  return determinant(A) * determinant(inner);
}

// ---- lattice observables ----

// ψ_{f+} − ψ_{f−} (bar = false) or its ψ̄ analogue; a tip outside Λ is the
// ghost generator when the algebra carries one and zero otherwise
template <class S>
GrassmannElement<S> gradient(const GrassmannAlgebra& alg, const FiniteLattice& L, const DirectedEdge& f,
                             bool bar) {
  const bool ghost = alg.vertex_count() == L.size() + 1;
  if (!ghost && alg.vertex_count() != L.size()) throw InvalidInput("algebra does not match the lattice");
  auto gen = [&](int v) { return bar ? alg.psibar(v) : alg.psi(v); };
  GrassmannElement<S> out(alg);
  int tip = L.tip(f);
  if (tip == kGhost && ghost) tip = L.size();
  if (tip != kGhost) out.add_term(1ULL << gen(tip), S(1));
  out.add_term(1ULL << gen(f.tail), S(-1));
  return out;
}

template <class S>
GrassmannElement<S> zeta(const GrassmannAlgebra& alg, const FiniteLattice& L, const DirectedEdge& f) {
  return gradient<S>(alg, L, f, false) * gradient<S>(alg, L, f, true);
}

template <class S>
GrassmannElement<S> zeta(const GrassmannAlgebra& alg, const FiniteLattice& L, const EdgeSet& S_) {
  auto out = GrassmannElement<S>::one(alg);
  for (const auto& f : S_) out = out * zeta<S>(alg, L, f);
  return out;
}

// X_v = (1/c) Σ_j ζ_{(v, v+e_j)}
template <class S>
GrassmannElement<S> x_field(const GrassmannAlgebra& alg, const FiniteLattice& L, int v) {
  GrassmannElement<S> out(alg);
  for (const auto& f : edge_star(L, v)) out += zeta<S>(alg, L, f);
  return out * (S(1) / S(L.coordination()));
}

// Y_v = ∏_j (1 − ζ_{(v, v+e_j)})
template <class S>
GrassmannElement<S> y_field(const GrassmannAlgebra& alg, const FiniteLattice& L, int v) {
  auto out = GrassmannElement<S>::one(alg);
  for (const auto& f : edge_star(L, v)) out = out * (GrassmannElement<S>::one(alg) - zeta<S>(alg, L, f));
  return out;
}

}  // namespace fgff
