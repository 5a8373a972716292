#pragma once

// Determinantal moments on a FiniteLattice. Vertices on the inner boundary are
// accepted: their edges to the ghost enter M through the zero extension of G.

#include <bit>
#include <optional>
#include <set>

#include "fgff/greenfn.hpp"

namespace fgff {

inline constexpr int kMaxLiteralFreeEdges = 16;
inline constexpr int kMaxMomentEdges = 24;

namespace detail {

inline std::pair<Point, Point> unoriented_key(const FiniteLattice& L, const DirectedEdge& f) {
  Point a = L.point(f.tail), b = L.tip_point(f);
  if (b < a) std::swap(a, b);
  return {a, b};
}

inline void check_in_lattice(const FiniteLattice& L, const std::vector<int>& B) {
  for (int v : B)
    if (v < 0 || v >= L.size()) throw InvalidInput("vertex outside lattice");
}

inline void check_vertices(const FiniteLattice& L, const std::vector<int>& B) {
  check_in_lattice(L, B);
  require_good_set(L, B);
}

// Σ_{A ⊆ free} (−1)^{|A|} det(M)_{base ∪ A}, in Gray-code order
template <class S>
S signed_subset_sum_literal(const Matrix<S>& M, const std::vector<int>& base, const std::vector<int>& free) {
  const int k = static_cast<int>(free.size());
  S total(0);
  std::vector<int> idx;
  for (std::uint32_t step = 0; step < (1u << k); ++step) {
    const std::uint32_t gray = step ^ (step >> 1);
    idx = base;
    for (int j = 0; j < k; ++j)
      if (gray >> j & 1u) idx.push_back(free[j]);
    const S d = determinant(principal(M, idx));
    if (std::popcount(gray) % 2) total -= d; else total += d;
  }
  return total;
}

// same sum as one determinant: (−1)^{|free|} det(M_{base∪free} − I_free)
template <class S>
S signed_subset_sum_complement(const Matrix<S>& M, const std::vector<int>& base, const std::vector<int>& free) {
  std::vector<int> idx = base;
  idx.insert(idx.end(), free.begin(), free.end());
  Matrix<S> sub = principal(M, idx);
  for (std::size_t j = base.size(); j < idx.size(); ++j) sub(j, j) -= S(1);
  const S d = determinant(sub);
  return free.size() % 2 ? S(-d) : d;
}

template <class S>
S signed_subset_sum(const Matrix<S>& M, const std::vector<int>& base, const std::vector<int>& free) {
  if (static_cast<int>(free.size()) <= kMaxLiteralFreeEdges) return signed_subset_sum_literal(M, base, free);
  return signed_subset_sum_complement(M, base, free);
}

// calls visit(choice) for every η: B → directions (odometer, first vertex slowest)
template <class F>
void for_each_direction_map(int n, int c, F&& visit) {
  std::vector<int> eta(n, 0);
  while (true) {
    visit(eta);
    int i = n - 1;
    while (i >= 0 && ++eta[i] == c) eta[i--] = 0;
    if (i < 0) return;
  }
}


// moments from a transfer matrix over E(V) laid out as c consecutive edges per
// vertex; `pos` selects the vertices of B by position in V
template <class T>
T x_moment_from(const Matrix<T>& M, const std::vector<int>& pos, int c) {
  const int n = static_cast<int>(pos.size());
  T total(0);
  std::vector<int> idx(n);
  for_each_direction_map(n, c, [&](const std::vector<int>& eta) {
    for (int i = 0; i < n; ++i) idx[i] = pos[i] * c + eta[i];
    total += determinant(principal(M, idx));
  });
  for (int i = 0; i < n; ++i) total /= T(c);
  return total;
}

template <class T>
T xy_moment_from(const Matrix<T>& M, const std::vector<int>& pos, int c) {
  const int n = static_cast<int>(pos.size());
  if (n * c > kMaxMomentEdges) throw CapacityError("edge set exceeds the subset-enumeration cap");
  T total(0);
  std::vector<int> base, free;
  for_each_direction_map(n, c, [&](const std::vector<int>& eta) {
    base.clear();
    free.clear();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) (j == eta[i] ? base : free).push_back(pos[i] * c + j);
    total += signed_subset_sum(M, base, free);
  });
  for (int i = 0; i < n; ++i) total /= T(c);
  return total;
}

inline std::vector<int> iota_positions(std::size_t n) {
  std::vector<int> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
  return p;
}

}  // namespace detail

// ⟨ζ_S⟩ normalized: det(M)_S, zero when S repeats an unoriented edge
template <class S>
S zeta_moment(const GreenTable<S>& G, const EdgeSet& edges) {
  const auto& L = G.lattice();
  std::set<std::pair<Point, Point>> seen;
  for (const auto& f : edges) {
    if (f.tail < 0 || f.tail >= L.size()) throw InvalidInput("edge base outside lattice");
    if (!seen.insert(detail::unoriented_key(L, f)).second) return S(0);
  }
  return determinant(transfer_matrix(G, edges));
}

template <class S>
S ust_contains_prob(const GreenTable<S>& G, const EdgeSet& edges) {
  const S p = zeta_moment(G, edges);
  const double x = to_double(p);
  if (x < -1e-12 || x > 1 + 1e-12) throw ConsistencyError("edge-containment probability outside [0,1]");
  return p;
}

// (1/c)^{|B|} Σ_η det(M)_{η(B)}
template <class S>
S x_moment(const GreenTable<S>& G, const std::vector<int>& B) {
  const auto& L = G.lattice();
  detail::check_vertices(L, B);
  return detail::x_moment_from(transfer_matrix(G, edge_set(L, B)), detail::iota_positions(B.size()),
                               L.coordination());
}

// inclusion–exclusion with a fixed η: Σ_{A ⊆ E(V)∖η(V)} (−1)^{|A|} det(M)_{η(V)∪A};
// zero for sets that are not good
template <class S>
S height_one_prob(const GreenTable<S>& G, const std::vector<int>& V, std::optional<std::vector<int>> eta = std::nullopt) {
  const auto& L = G.lattice();
  detail::check_in_lattice(L, V);
  if (!is_good_set(L, V)) return S(0);
  const int n = static_cast<int>(V.size()), c = L.coordination();
  if (n * c > kMaxMomentEdges) throw CapacityError("edge set exceeds the subset-enumeration cap");
  std::vector<int> choice = eta.value_or(std::vector<int>(n, 0));
  if (static_cast<int>(choice.size()) != n) throw InvalidInput("eta must give one direction per vertex");
  const Matrix<S> M = transfer_matrix(G, edge_set(L, V));
  std::vector<int> base, free;
  for (int i = 0; i < n; ++i) {
    if (choice[i] < 0 || choice[i] >= c) throw InvalidInput("direction index out of range");
    for (int j = 0; j < c; ++j) (j == choice[i] ? base : free).push_back(i * c + j);
  }
  return detail::signed_subset_sum(M, base, free);
}

// (1/c)^{|B|} Σ_η Σ_{A ⊆ E(B)∖η(B)} (−1)^{|A|} det(M)_{η(B)∪A}; zero unless B is good
template <class S>
S xy_moment(const GreenTable<S>& G, const std::vector<int>& B) {
  const auto& L = G.lattice();
  detail::check_in_lattice(L, B);
  if (!is_good_set(L, B)) return S(0);
  if (static_cast<int>(B.size()) * L.coordination() > kMaxMomentEdges)
    throw CapacityError("edge set exceeds the subset-enumeration cap");
  return detail::xy_moment_from(transfer_matrix(G, edge_set(L, B)), detail::iota_positions(B.size()),
                                L.coordination());
}

}  // namespace fgff
