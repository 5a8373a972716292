#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fgff/lattice.hpp"

namespace fgff {

using SandpileConfig = std::vector<int>;
using Rng = std::mt19937_64;

// seed for stream `stream` of a run seeded with `seed` (SplitMix64 finalizer)
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(stream_seed(seed, stream)); }

struct StabilizeResult {
  SandpileConfig config;
  std::int64_t topplings = 0;
};

// Topple until stable. With an rng, the unstable site to topple is drawn
// uniformly at random; otherwise a LIFO worklist is used.
StabilizeResult stabilize(SandpileConfig cfg, const FiniteLattice& L, Rng* schedule = nullptr);

bool is_stable(const SandpileConfig& cfg, const FiniteLattice& L);
// Dhar's burning test
bool is_recurrent(const SandpileConfig& cfg, const FiniteLattice& L);

inline constexpr std::uint64_t kMaxEnumeratedConfigs = std::uint64_t{1} << 22;

// visits every recurrent configuration; returns their number
std::uint64_t enumerate_recurrent(const FiniteLattice& L, const std::function<void(const SandpileConfig&)>& visit);

struct ChainOptions {
  std::int64_t steps = 0;      // grain additions after burn-in
  std::int64_t burn_in = 0;
  std::uint64_t seed = 0;
  int batches = 32;
  // joint height-one events to track, as vertex sets
  std::vector<std::vector<int>> joint;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct ChainStats {
  std::int64_t samples = 0;  // recorded (thinned) configurations
  // height_freq[v][h-1] = P(ρ(v) = h)
  std::vector<std::vector<Estimate>> height_freq;
  std::vector<Estimate> joint;
};

// Markov chain: add a grain at a uniform site, stabilize; record one sample
// every |Λ| additions; standard errors by batch means.
ChainStats chain_sample(const FiniteLattice& L, const ChainOptions& opts);

struct SpanningTree {
  // parent vertex (kGhost for the root edge) and the direction of that edge
  std::vector<int> parent;
  std::vector<int> parent_dir;

  int edge_count() const { return static_cast<int>(parent.size()); }
  // degree of v in the tree on Λ ∪ {g}
  std::vector<int> degrees(const FiniteLattice& L) const;
  bool contains(const FiniteLattice& L, const DirectedEdge& e) const;
  // every vertex reaches the ghost by parent steps
  bool valid(const FiniteLattice& L) const;
};

// uniform spanning tree of Λ^g by loop-erased random walks rooted at the ghost
SpanningTree wilson_ust(const FiniteLattice& L, Rng& rng);

struct UstStats {
  std::int64_t samples = 0;
  std::vector<Estimate> edge_freq;   // per requested edge
  std::vector<Estimate> degree_field; // E[deg_T(v)/deg(v)] per vertex
  bool all_valid = true;
};

// `samples` trees split over a fixed number of streams; result does not depend on `threads`
UstStats ust_sample(const FiniteLattice& L, std::int64_t samples, std::uint64_t seed, const EdgeSet& edges,
                    int threads = 1);

}  // namespace fgff
