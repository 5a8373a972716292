#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fgff/lattice.hpp"

namespace fgff {

// blocks of indices 0..n-1, each block sorted, blocks ordered by first element
struct Partition {
  std::vector<std::vector<int>> blocks;
  int size() const { return static_cast<int>(blocks.size()); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

inline constexpr int kMaxPartitionSet = 12;

// restricted-growth-string enumeration; each partition visited once
void for_each_partition(int n, const std::function<void(const Partition&)>& visit);
std::vector<Partition> partitions(int n);
// a <= b: every block of a lies inside a block of b
bool refines(const Partition& a, const Partition& b);

// full cycles on n points (σ[i] = image of i); empty for n < 2
std::vector<std::vector<int>> cyclic_permutations(int n);

std::int64_t stirling2(int n, int k);
// Σ_k {m,k} (k−1)! (−1)^{k−1}
boost::multiprecision::cpp_int stirling_alternating_sum(int m);

// sign of a permutation given as an image vector
int permutation_sign(const std::vector<int>& p);
// cycles of p, each listed from its smallest element
std::vector<std::vector<int>> cycles(const std::vector<int>& p);

// bijection τ of the edge list `domain`: τ(domain[i]) = domain[map[i]]
struct EdgePermutation {
  EdgeSet domain;
  std::vector<int> map;

  static EdgePermutation identity(EdgeSet domain);
  DirectedEdge image(int i) const { return domain[map[i]]; }
  int index_of(const DirectedEdge& e) const;
  int sign() const { return permutation_sign(map); }
};

struct PermutationClass {
  bool connected = false;
  bool bare = false;
  int cross_edge_count = 0;  // |E_τ(V)|
};

// position in V of the vertex each domain edge belongs to
std::vector<int> edge_owners(const EdgeSet& domain, const std::vector<int>& V, const FiniteLattice& L);

PermutationClass classify_permutation(const EdgePermutation& tau, const std::vector<int>& V, const FiniteLattice& L);

struct BareDecomposition {
  std::vector<int> sigma;         // on positions of V
  std::vector<DirectedEdge> eta;  // entry edge per vertex
  std::vector<DirectedEdge> exit;
  std::vector<int> alpha;          // exit direction minus entry direction, in units of the lattice angle
  std::vector<double> gamma;       // ±1 (hypercubic) or cos(α π/3) (triangular)
};

// nullopt when a hypercubic exit edge is neither the entry edge nor its reflection
std::optional<BareDecomposition> decompose_bare(const EdgePermutation& tau, const std::vector<int>& V,
                                                const FiniteLattice& L);

// the two pieces of the surgery at V[pos]: ω on ℰ_v \ {η(v)} and τ∖ω on (ℰ \ ℰ_v) ∪ {η(v)}
struct Surgery {
  EdgePermutation omega;
  EdgePermutation rest;
  double gamma = 1;
};
Surgery bare_surgery(const EdgePermutation& tau, const std::vector<int>& V, const FiniteLattice& L, int pos);

}  // namespace fgff
