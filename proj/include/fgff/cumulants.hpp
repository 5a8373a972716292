#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <type_traits>
#include <unordered_map>

#include <json.hpp>

#include "fgff/combinatorics.hpp"
#include "fgff/moments.hpp"

namespace fgff {

enum class FieldKind { NegX, Degree, XY };
enum class CumulantPath { ClosedForm, PartitionSum };

std::string to_string(FieldKind k);
std::string to_string(CumulantPath p);
FieldKind field_kind_from_string(const std::string& s);

struct CumulantStats {
  long long term_count = 0;
  double max_term_magnitude = 0;
  bool moment_fallback = false;  // n = 1: the moment itself is returned
};

struct CumulantReport {
  FieldKind field = FieldKind::NegX;
  nlohmann::json lattice;
  std::vector<Point> points;
  double value = 0;
  std::string exact;  // set when computed over the rationals
  CumulantPath path = CumulantPath::ClosedForm;
  CumulantStats stats;

  nlohmann::json to_json() const;
  std::string to_jsonl() const { return to_json().dump(); }
};

inline constexpr int kMaxCumulantPoints = 8;
inline constexpr int kMaxXYClosedEdges = 12;

// Σ_π (|π|−1)! (−1)^{|π|−1} ∏_B m(B); m receives positions into V
template <class S>
S cumulant_from_moments(const std::function<S(const std::vector<int>&)>& moment, int n,
                        CumulantStats* stats = nullptr) {
  if (n < 1 || n > kMaxCumulantPoints) throw CapacityError("partition-sum cumulants support 1 <= n <= 8");
  std::unordered_map<std::uint32_t, S> cache;
  auto m = [&](const std::vector<int>& block) -> const S& {
    std::uint32_t mask = 0;
    for (int i : block) mask |= 1u << i;
    auto it = cache.find(mask);
    if (it == cache.end()) it = cache.emplace(mask, moment(block)).first;
    return it->second;
  };
  S total(0);
  long long terms = 0;
  double biggest = 0;
  for_each_partition(n, [&](const Partition& p) {
    S prod(1);
    for (const auto& b : p.blocks) prod *= m(b);
    S weight(1);
    for (int k = 2; k < p.size(); ++k) weight *= S(k);
    if (p.size() % 2 == 0) weight = -weight;
    const S term = weight * prod;
    biggest = std::max(biggest, std::abs(to_double(term)));
    total += term;
    ++terms;
  });
  if (stats) {
    stats->term_count = terms;
    stats->max_term_magnitude = biggest;
    stats->moment_fallback = false;
  }
  return total;
}

// moment of the field itself (sign flips for NegX)
template <class S>
S field_moment(const GreenTable<S>& G, const std::vector<int>& B, FieldKind field) {
  if (field == FieldKind::XY) return xy_moment(G, B);
  const S m = x_moment(G, B);
  return (field == FieldKind::NegX && B.size() % 2) ? S(-m) : m;
}

// Moments are formed from one transfer matrix over E(V); floating-point runs
// carry it in long double because the partition sum cancels heavily.
template <class S>
S cumulant_partition_sum(const GreenTable<S>& G, const std::vector<int>& V, FieldKind field,
                         CumulantStats* stats = nullptr) {
  using T = Accumulator<S>;
  const auto& L = G.lattice();
  detail::check_vertices(L, V);
  const int c = L.coordination();
  const Matrix<T> M = transfer_matrix(G, edge_set(L, V)).template cast<T>();
  std::function<T(const std::vector<int>&)> mf = [&](const std::vector<int>& pos) {
    if (field == FieldKind::XY) return detail::xy_moment_from(M, pos, c);
    const T m = detail::x_moment_from(M, pos, c);
    return (field == FieldKind::NegX && pos.size() % 2) ? T(-m) : m;
  };
  return static_cast<S>(cumulant_from_moments<T>(mf, static_cast<int>(V.size()), stats));
}

// −(1/c)^n Σ_{σ∈S_cycl} Σ_η ∏_v M(η(v), η(σ(v))) for NegX; Degree carries (−1)^n.
// The η-sum is the trace of a product of c×c blocks around the cycle.
template <class S>
S x_cumulant_closed(const GreenTable<S>& G, const std::vector<int>& V, FieldKind field = FieldKind::NegX,
                    CumulantStats* stats = nullptr) {
  if (field == FieldKind::XY) throw InvalidInput("x_cumulant_closed is for NegX or Degree");
  const auto& L = G.lattice();
  detail::check_vertices(L, V);
  const int n = static_cast<int>(V.size()), c = L.coordination();
  if (n < 1) throw InvalidInput("empty point set");
  if (n == 1) {
    if (stats) *stats = {1, 0, true};
    return field_moment(G, V, field);
  }
  const Matrix<S> M = transfer_matrix(G, edge_set(L, V));
  S sum(0);
  long long terms = 0;
  double biggest = 0;
  for (const auto& sigma : cyclic_permutations(n)) {
    Matrix<S> P = Matrix<S>::Identity(c, c);
    int a = 0;
    do {
      P = (P * M.block(a * c, sigma[a] * c, c, c)).eval();
      a = sigma[a];
    } while (a != 0);
    const S t = P.trace();
    biggest = std::max(biggest, std::abs(to_double(t)));
    sum += t;
    terms += static_cast<long long>(std::pow(c, n));
  }
  for (int i = 0; i < n; ++i) sum /= S(c);
  sum = -sum;
  if (field == FieldKind::Degree && n % 2) sum = -sum;
  if (stats) *stats = {terms, biggest, false};
  return sum;
}

enum class ConnectedSumMethod { Enumerate, Mobius };

namespace detail {

// Σ_{τ connected} sign(τ) ∏ M(f, τ(f)) over permutations of the k indices of M,
// whose owners are non-decreasing; subtrees are cut as soon as a completed set
// of vertices is closed under τ without being all of V.
template <class S>
struct ConnectedEnumerator {
  static constexpr int kMaxK = 32;
  using Prod = std::conditional_t<std::is_floating_point_v<S>, double, S>;
  const Matrix<S>& M;
  int k, n;
  std::array<int, kMaxK> owner{}, tau{};
  std::array<char, kMaxK> block_end{};
  std::vector<std::vector<Prod>> m_;
  Accumulator<S> total{0};
  long long leaves = 0;
  double biggest = 0;

  ConnectedEnumerator(const Matrix<S>& m, const std::vector<int>& own, int nv)
      : M(m), k(static_cast<int>(own.size())), n(nv) {
    if (k > kMaxK || n > 16) throw CapacityError("connected-permutation enumeration too large");
    for (int i = 0; i < k; ++i) owner[i] = own[i];
    for (int i = 0; i < k; ++i) block_end[i] = (i + 1 == k || own[i + 1] != own[i]);
    m_.assign(k, std::vector<Prod>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) m_[i][j] = Prod(M(i, j));
  }

  // closure of `seed` under the vertex graph spanned by τ(0..upto); returns
  // the reached set, or 0 if it leaks to a vertex whose edges are unassigned
  std::uint32_t closure(std::uint32_t seed, int upto, int done) const {
    std::uint32_t reach = seed, prev = 0;
    while (reach != prev) {
      prev = reach;
      for (int i = 0; i <= upto; ++i) {
        const int a = owner[i], b = owner[tau[i]];
        if (reach >> a & 1u) {
          if (b >= done) return 0;
          reach |= 1u << b;
        } else if (reach >> b & 1u) {
          reach |= 1u << a;
        }
      }
    }
    return reach;
  }

  bool closed_proper_component(int upto) const {
    const int done = owner[upto] + 1;
    if (done == n) return false;
    std::uint32_t covered = 0;
    for (int v = 0; v < done; ++v) {
      if (covered >> v & 1u) continue;
      const std::uint32_t c = closure(1u << v, upto, done);
      if (c) return true;
      covered |= 1u << v;
    }
    return false;
  }

  bool connected_leaf() const {
    const std::uint32_t all = (n == 32) ? ~0u : ((1u << n) - 1);
    return closure(1u, k - 1, n) == all;
  }

  void run() {
    if (k == 0) return;
    dfs(0, 0u, Prod(1), 0);
  }

  void leaf(const Prod& p, int inv) {
    if (n > 2 && !connected_leaf()) return;
    ++leaves;
    if constexpr (std::is_floating_point_v<S>) biggest = std::max(biggest, std::abs(p));
    if (inv & 1) total -= Accumulator<S>(p); else total += Accumulator<S>(p);
  }

  void dfs(int i, std::uint32_t used, const Prod& prod, int inversions) {
    const std::uint32_t full = (k == 32) ? ~0u : ((1u << k) - 1);
    const std::uint32_t avail = full & ~used;
    if (i + 2 == k) {
      // two positions left: both completions directly
      const int a = std::countr_zero(avail), b = 31 - std::countl_zero(avail);
      const int base = inversions + std::popcount(used >> a) + std::popcount(used >> b);
      tau[i] = a;
      tau[i + 1] = b;
      if (!(block_end[i] && closed_proper_component(i))) leaf(prod * m_[i][a] * m_[i + 1][b], base);
      tau[i] = b;
      tau[i + 1] = a;
      if (!(block_end[i] && closed_proper_component(i))) leaf(prod * m_[i][b] * m_[i + 1][a], base + 1);
      return;
    }
    for (std::uint32_t rest = avail; rest; rest &= rest - 1) {
      const int t = std::countr_zero(rest);
      const Prod& m = m_[i][t];
      if (is_zero(m)) continue;
      const Prod p = prod * m;
      const int inv = inversions + std::popcount(used >> t);  // placed values greater than t
      tau[i] = t;
      if (i + 1 == k) {
        leaf(p, inv);
      } else {
        if (block_end[i] && closed_proper_component(i)) continue;
        dfs(i + 1, used | (1u << t), p, inv);
      }
    }
  }
};

}  // namespace detail

// Σ_{τ connected} sign(τ) ∏ M(f, τ(f)); owners must be non-decreasing
template <class S>
S connected_permutation_sum(const Matrix<S>& M, const std::vector<int>& owner, int n,
                            ConnectedSumMethod method = ConnectedSumMethod::Enumerate,
                            CumulantStats* stats = nullptr) {
  if (method == ConnectedSumMethod::Enumerate) {
    detail::ConnectedEnumerator<S> e(M, owner, n);
    e.run();
    if (stats) {
      stats->term_count += e.leaves;
      stats->max_term_magnitude = std::max(stats->max_term_magnitude, e.biggest);
    }
    return static_cast<S>(e.total);
  }
  // Möbius inversion over vertex partitions: Σ_π (|π|−1)!(−1)^{|π|−1} ∏_B det(M_{ℰ_B})
  std::function<S(const std::vector<int>&)> block_det = [&](const std::vector<int>& blk) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(owner.size()); ++i)
      if (std::find(blk.begin(), blk.end(), owner[i]) != blk.end()) idx.push_back(i);
    return determinant(principal(M, idx));
  };
  return cumulant_from_moments<S>(block_det, n, nullptr);
}

// (−1/c)^n Σ_{ℰ: |ℰ_v| >= 1} K(ℰ) Σ_{τ ∈ S_co(ℰ)} sign(τ) ∏ M(f, τ(f)),  K = ∏_v (−1)^{|ℰ_v|}|ℰ_v|
template <class S>
S xy_cumulant_closed(const GreenTable<S>& G, const std::vector<int>& V, CumulantStats* stats = nullptr,
                     ConnectedSumMethod method = ConnectedSumMethod::Enumerate) {
  const auto& L = G.lattice();
  detail::check_vertices(L, V);
  const int n = static_cast<int>(V.size()), c = L.coordination();
  if (n < 1) throw InvalidInput("empty point set");
  if (n == 1) {
    if (stats) *stats = {1, 0, true};
    return xy_moment(G, V);
  }
  if (method == ConnectedSumMethod::Enumerate && n * c > kMaxXYClosedEdges)
    throw CapacityError("XY closed form limited to 12 edges in E(V)");
  const Matrix<S> M = transfer_matrix(G, edge_set(L, V));
  CumulantStats local;
  Accumulator<S> total{0};
  std::vector<int> mask(n, 1);  // per-vertex subset of directions, lexicographic
  const int full = 1 << c;
  while (true) {
    std::vector<int> idx, owner;
    long K = 1;
    for (int v = 0; v < n; ++v) {
      const int sz = std::popcount(static_cast<unsigned>(mask[v]));
      K *= (sz % 2 ? -sz : sz);
      for (int j = 0; j < c; ++j)
        if (mask[v] >> j & 1) {
          idx.push_back(v * c + j);
          owner.push_back(v);
        }
    }
    const S inner = connected_permutation_sum<S>(principal(M, idx), owner, n, method, &local);
    total += Accumulator<S>(S(K) * inner);
    int v = n - 1;
    while (v >= 0 && ++mask[v] == full) mask[v--] = 1;
    if (v < 0) break;
  }
  S result = static_cast<S>(total);
  for (int i = 0; i < n; ++i) result /= S(-c);
  if (stats) *stats = local;
  return result;
}

template <class S>
S cumulant_closed(const GreenTable<S>& G, const std::vector<int>& V, FieldKind field, CumulantStats* stats = nullptr) {
  return field == FieldKind::XY ? xy_cumulant_closed(G, V, stats) : x_cumulant_closed(G, V, field, stats);
}

// same closed forms, restricted to triangular patches
template <class S>
S triangular_cumulants(const GreenTable<S>& G, const std::vector<int>& V, FieldKind field,
                       CumulantStats* stats = nullptr) {
  if (!G.lattice().kind().is_triangular()) throw InvalidInput("triangular_cumulants needs a triangular patch");
  return cumulant_closed(G, V, field, stats);
}

template <class S>
CumulantReport make_report(const GreenTable<S>& G, const std::vector<int>& V, FieldKind field, CumulantPath path) {
  CumulantReport r;
  r.field = field;
  r.path = path;
  r.lattice = G.lattice().to_json();
  for (int v : V) r.points.push_back(G.lattice().point(v));
  const S val = path == CumulantPath::ClosedForm ? cumulant_closed(G, V, field, &r.stats)
                                                 : cumulant_partition_sum(G, V, field, &r.stats);
  r.value = to_double(val);
  if constexpr (is_exact_v<S>) r.exact = val.str();
  return r;
}

}  // namespace fgff
