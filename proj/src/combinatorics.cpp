#include "fgff/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fgff {

void for_each_partition(int n, const std::function<void(const Partition&)>& visit) {
  if (n < 0 || n > kMaxPartitionSet) throw CapacityError("partition enumeration supports at most 12 points");
  if (n == 0) {
    visit(Partition{});
    return;
  }
  // a[i] = block of i, with a[i] <= 1 + max(a[0..i-1])
  std::vector<int> a(n, 0), mx(n, 0);
  Partition p;
  while (true) {
    const int nb = mx[n - 1] + 1;
    p.blocks.assign(nb, {});
    for (int i = 0; i < n; ++i) p.blocks[a[i]].push_back(i);
    visit(p);
    int i = n - 1;
    while (i > 0 && a[i] == mx[i - 1] + 1) --i;
    if (i == 0) return;
    ++a[i];
    mx[i] = std::max(mx[i - 1], a[i]);
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      mx[j] = mx[i];
    }
  }
}

std::vector<Partition> partitions(int n) {
  std::vector<Partition> out;
  for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
  return out;
}

bool refines(const Partition& a, const Partition& b) {
  int n = 0;
  for (const auto& blk : b.blocks) n += static_cast<int>(blk.size());
  std::vector<int> where(n, -1);
  for (std::size_t k = 0; k < b.blocks.size(); ++k)
    for (int i : b.blocks[k]) where.at(i) = static_cast<int>(k);
  for (const auto& blk : a.blocks)
    for (int i : blk)
      if (where.at(i) != where.at(blk.front())) return false;
  return true;
}

std::vector<std::vector<int>> cyclic_permutations(int n) {
  std::vector<std::vector<int>> out;
  if (n < 2) return out;
  std::vector<int> order(n - 1);
  std::iota(order.begin(), order.end(), 1);
  do {
    std::vector<int> sigma(n);
    int prev = 0;
    for (int x : order) {
      sigma[prev] = x;
      prev = x;
    }
    sigma[prev] = 0;
    out.push_back(std::move(sigma));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::int64_t stirling2(int n, int k) {
  if (k < 0 || n < 0 || k > n || n > 20) throw RangeError("stirling2 needs 0 <= k <= n <= 20");
  std::vector<std::vector<std::int64_t>> s(n + 1, std::vector<std::int64_t>(n + 1, 0));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
  return s[n][k];
}

boost::multiprecision::cpp_int stirling_alternating_sum(int m) {
  if (m < 1 || m > 20) throw RangeError("stirling_alternating_sum needs 1 <= m <= 20");
  boost::multiprecision::cpp_int total = 0, fact = 1;  // fact = (k−1)!
  for (int k = 1; k <= m; ++k) {
    if (k > 1) fact *= (k - 1);
    const boost::multiprecision::cpp_int term = fact * stirling2(m, k);
    total += (k % 2 == 1) ? term : boost::multiprecision::cpp_int(-term);
  }
  return total;
}

std::vector<std::vector<int>> cycles(const std::vector<int>& p) {
  std::vector<char> seen(p.size(), 0);
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::vector<int> c;
    for (int j = static_cast<int>(i); !seen[j]; j = p[j]) {
      if (j < 0 || j >= static_cast<int>(p.size())) throw InvalidInput("not a permutation");
      seen[j] = 1;
      c.push_back(j);
    }
    out.push_back(std::move(c));
  }
  return out;
}

int permutation_sign(const std::vector<int>& p) {
  std::vector<char> hit(p.size(), 0);
  for (int x : p) {
    if (x < 0 || x >= static_cast<int>(p.size()) || hit[x]) throw InvalidInput("not a permutation");
    hit[x] = 1;
  }
  int even_cycles = 0;
  for (const auto& c : cycles(p)) even_cycles += (c.size() % 2 == 0);
  return even_cycles % 2 ? -1 : 1;
}

EdgePermutation EdgePermutation::identity(EdgeSet domain) {
  EdgePermutation t{std::move(domain), {}};
  t.map.resize(t.domain.size());
  std::iota(t.map.begin(), t.map.end(), 0);
  return t;
}

int EdgePermutation::index_of(const DirectedEdge& e) const {
  auto it = std::find(domain.begin(), domain.end(), e);
  if (it == domain.end()) throw InvalidInput("edge not in permutation domain");
  return static_cast<int>(it - domain.begin());
}

std::vector<int> edge_owners(const EdgeSet& domain, const std::vector<int>& V, const FiniteLattice& L) {
  std::vector<int> owner;
  owner.reserve(domain.size());
  for (const auto& f : domain) {
    auto it = std::find(V.begin(), V.end(), f.tail);
    if (it == V.end()) throw InvalidInput("edge is not based at a vertex of V");
    const int tip = L.tip(f);
    if (tip != kGhost && std::find(V.begin(), V.end(), tip) != V.end())
      throw InvalidInput("edge joins two vertices of V (V is not good)");
    owner.push_back(static_cast<int>(it - V.begin()));
  }
  return owner;
}

namespace {
int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}
}  // namespace

PermutationClass classify_permutation(const EdgePermutation& tau, const std::vector<int>& V, const FiniteLattice& L) {
  const auto owner = edge_owners(tau.domain, V, L);
  permutation_sign(tau.map);  // validates bijectivity
  const int n = static_cast<int>(V.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  PermutationClass c;
  for (std::size_t i = 0; i < tau.map.size(); ++i) {
    const int a = owner[i], b = owner[tau.map[i]];
    if (a == b) continue;
    ++c.cross_edge_count;
    parent[find_root(parent, a)] = find_root(parent, b);
  }
  // vertices carrying no domain edge are isolated in V_τ
  c.connected = true;
  for (int v = 0; v < n; ++v)
    if (find_root(parent, v) != find_root(parent, 0)) c.connected = false;
  c.bare = n >= 2 && c.connected && c.cross_edge_count == n;
  return c;
}

std::optional<BareDecomposition> decompose_bare(const EdgePermutation& tau, const std::vector<int>& V,
                                                const FiniteLattice& L) {
  if (!classify_permutation(tau, V, L).bare) throw InvalidInput("permutation is not bare");
  const auto owner = edge_owners(tau.domain, V, L);
  const int n = static_cast<int>(V.size());
  const auto& kind = L.kind();
  BareDecomposition d;
  d.sigma.assign(n, -1);
  d.eta.resize(n);
  d.exit.resize(n);
  d.alpha.assign(n, 0);
  d.gamma.assign(n, 0.0);
  for (std::size_t i = 0; i < tau.map.size(); ++i) {
    const int a = owner[i], j = tau.map[i], b = owner[j];
    if (a == b) continue;
    d.exit[a] = tau.domain[i];
    d.sigma[a] = b;
    d.eta[b] = tau.domain[j];
  }
  const int c = kind.coordination();
  for (int v = 0; v < n; ++v) {
    const int steps = ((d.exit[v].dir - d.eta[v].dir) % c + c) % c;
    if (kind.is_triangular()) {
      d.alpha[v] = steps;
      d.gamma[v] = std::cos(steps * std::numbers::pi / 3.0);
      if (steps % 3 == 0) d.gamma[v] = steps == 0 ? 1.0 : -1.0;
    } else {
      if (steps == 0) {
        d.gamma[v] = 1.0;
      } else if (d.exit[v].dir == kind.opposite(d.eta[v].dir)) {
        d.alpha[v] = 2;
        d.gamma[v] = -1.0;
      } else {
        return std::nullopt;
      }
    }
  }
  return d;
}

Surgery bare_surgery(const EdgePermutation& tau, const std::vector<int>& V, const FiniteLattice& L, int pos) {
  const auto dec = decompose_bare(tau, V, L);
  if (!dec) throw InvalidInput("surgery needs an admissible bare permutation");
  const auto owner = edge_owners(tau.domain, V, L);
  const DirectedEdge entry = dec->eta[pos], exit = dec->exit[pos];
  const int k = static_cast<int>(tau.domain.size());
  const int i_entry = tau.index_of(entry), i_exit = tau.index_of(exit);

  Surgery s;
  s.gamma = dec->gamma[pos];
  // ω: f ↦ τ(f) for f ≠ exit, exit ↦ τ(entry)
  EdgeSet wdom;
  for (int i = 0; i < k; ++i)
    if (owner[i] == pos && i != i_entry) wdom.push_back(tau.domain[i]);
  s.omega.domain = wdom;
  for (const auto& f : wdom) {
    const int i = tau.index_of(f);
    const DirectedEdge img = (i == i_exit) ? tau.image(i_entry) : tau.image(i);
    auto it = std::find(wdom.begin(), wdom.end(), img);
    if (it == wdom.end()) throw InvalidInput("surgery produced a map leaving its domain");
    s.omega.map.push_back(static_cast<int>(it - wdom.begin()));
  }
  // τ∖ω: identity of τ off ℰ_v, and η(v) ↦ τ(exit)
  EdgeSet rdom;
  for (int i = 0; i < k; ++i)
    if (owner[i] != pos || i == i_entry) rdom.push_back(tau.domain[i]);
  s.rest.domain = rdom;
  for (const auto& f : rdom) {
    const int i = tau.index_of(f);
    const DirectedEdge img = (i == i_entry) ? tau.image(i_exit) : tau.image(i);
    auto it = std::find(rdom.begin(), rdom.end(), img);
    if (it == rdom.end()) throw InvalidInput("surgery produced a map leaving its domain");
    s.rest.map.push_back(static_cast<int>(it - rdom.begin()));
  }
  return s;
}

}  // namespace fgff
