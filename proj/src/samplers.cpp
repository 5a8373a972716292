#include "fgff/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fgff/errors.hpp"

namespace fgff {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void check_size(const SandpileConfig& cfg, const FiniteLattice& L) {
  if (static_cast<int>(cfg.size()) != L.size()) throw InvalidInput("configuration size does not match lattice");
}

void topple(SandpileConfig& h, const FiniteLattice& L, int v) {
  const int c = L.coordination();
  h[v] -= c;
  for (int j = 0; j < c; ++j) {
    const int w = L.neighbor(v, j);
    if (w != kGhost) ++h[w];
  }
}

// batch-means estimate from per-batch averages
Estimate batch_estimate(const std::vector<double>& batch_means) {
  const double b = static_cast<double>(batch_means.size());
  double mean = 0;
  for (double x : batch_means) mean += x;
  mean /= b;
  double var = 0;
  for (double x : batch_means) var += (x - mean) * (x - mean);
  var /= (b - 1);
  return {mean, std::sqrt(var / b)};
}

Estimate bernoulli_estimate(std::int64_t hits, std::int64_t n) {
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1 - p) / n)};
}

}  // namespace

bool is_stable(const SandpileConfig& cfg, const FiniteLattice& L) {
  check_size(cfg, L);
  return std::all_of(cfg.begin(), cfg.end(), [&](int h) { return h <= L.coordination(); });
}

StabilizeResult stabilize(SandpileConfig cfg, const FiniteLattice& L, Rng* schedule) {
  check_size(cfg, L);
  const int c = L.coordination();
  StabilizeResult r;
  std::vector<int> work;
  std::vector<char> queued(L.size(), 0);
  for (int v = 0; v < L.size(); ++v)
    if (cfg[v] > c) {
      work.push_back(v);
      queued[v] = 1;
    }
  while (!work.empty()) {
    std::size_t pick = work.size() - 1;
    if (schedule) pick = std::uniform_int_distribution<std::size_t>(0, work.size() - 1)(*schedule);
    const int v = work[pick];
    work[pick] = work.back();
    work.pop_back();
    queued[v] = 0;
    // one toppling per pick so the schedule really interleaves
    topple(cfg, L, v);
    ++r.topplings;
    if (cfg[v] > c) {
      work.push_back(v);
      queued[v] = 1;
    }
    for (int j = 0; j < c; ++j) {
      const int w = L.neighbor(v, j);
      if (w != kGhost && !queued[w] && cfg[w] > c) {
        work.push_back(w);
        queued[w] = 1;
      }
    }
  }
  r.config = std::move(cfg);
  return r;
}

bool is_recurrent(const SandpileConfig& cfg, const FiniteLattice& L) {
  if (!is_stable(cfg, L)) throw InvalidInput("burning test needs a stable configuration");
  const int n = L.size(), c = L.coordination();
  std::vector<int> unburnt_nbrs(n, 0);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < c; ++j) unburnt_nbrs[v] += L.neighbor(v, j) != kGhost;
  std::vector<char> burnt(n, 0);
  std::vector<int> work;
  for (int v = 0; v < n; ++v)
    if (cfg[v] > unburnt_nbrs[v]) {
      burnt[v] = 1;
      work.push_back(v);
    }
  int count = 0;
  while (!work.empty()) {
    const int v = work.back();
    work.pop_back();
    ++count;
    for (int j = 0; j < c; ++j) {
      const int w = L.neighbor(v, j);
      if (w == kGhost || burnt[w]) continue;
      if (cfg[w] > --unburnt_nbrs[w]) {
        burnt[w] = 1;
        work.push_back(w);
      }
    }
  }
  return count == n;
}

std::uint64_t enumerate_recurrent(const FiniteLattice& L, const std::function<void(const SandpileConfig&)>& visit) {
  const int n = L.size(), c = L.coordination();
  double total = std::pow(static_cast<double>(c), n);
  if (total > static_cast<double>(kMaxEnumeratedConfigs)) throw CapacityError("too many stable configurations to enumerate");
  SandpileConfig h(n, 1);
  std::uint64_t count = 0;
  while (true) {
    if (is_recurrent(h, L)) {
      ++count;
      visit(h);
    }
    int i = n - 1;
    while (i >= 0 && h[i] == c) h[i--] = 1;
    if (i < 0) break;
    ++h[i];
  }
  return count;
}

ChainStats chain_sample(const FiniteLattice& L, const ChainOptions& opts) {
  if (opts.steps <= 0 || opts.burn_in < 0) throw InvalidInput("steps must be positive and burn_in non-negative");
  if (opts.batches < 2) throw InvalidInput("need at least two batches");
  const int n = L.size(), c = L.coordination();
  for (const auto& set : opts.joint)
    for (int v : set)
      if (v < 0 || v >= n) throw InvalidInput("joint event vertex outside lattice");
  Rng rng = make_rng(opts.seed);
  std::uniform_int_distribution<int> site(0, n - 1);
  SandpileConfig h(n, c);  // maximal configurations are recurrent
  auto add = [&] {
    const int v = site(rng);
    if (++h[v] > c) h = stabilize(std::move(h), L).config;
  };
  for (std::int64_t s = 0; s < opts.burn_in; ++s) add();

  const std::int64_t samples = opts.steps / n;
  if (samples < opts.batches) throw InvalidInput("too few samples for batch means");
  const std::int64_t per_batch = samples / opts.batches;
  const int nj = static_cast<int>(opts.joint.size());
  // counts[b][v*c + h-1], joint_counts[b][k]
  std::vector<std::vector<std::int64_t>> counts(opts.batches, std::vector<std::int64_t>(n * c, 0));
  std::vector<std::vector<std::int64_t>> joint_counts(opts.batches, std::vector<std::int64_t>(nj, 0));
  for (int b = 0; b < opts.batches; ++b) {
    for (std::int64_t s = 0; s < per_batch; ++s) {
      for (int k = 0; k < n; ++k) add();
      for (int v = 0; v < n; ++v) ++counts[b][v * c + h[v] - 1];
      for (int k = 0; k < nj; ++k)
        joint_counts[b][k] += std::all_of(opts.joint[k].begin(), opts.joint[k].end(), [&](int v) { return h[v] == 1; });
    }
  }
  ChainStats out;
  out.samples = per_batch * opts.batches;
  std::vector<double> means(opts.batches);
  out.height_freq.assign(n, std::vector<Estimate>(c));
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < c; ++k) {
      for (int b = 0; b < opts.batches; ++b) means[b] = static_cast<double>(counts[b][v * c + k]) / per_batch;
      out.height_freq[v][k] = batch_estimate(means);
    }
  for (int k = 0; k < nj; ++k) {
    for (int b = 0; b < opts.batches; ++b) means[b] = static_cast<double>(joint_counts[b][k]) / per_batch;
    out.joint.push_back(batch_estimate(means));
  }
  return out;
}

std::vector<int> SpanningTree::degrees(const FiniteLattice& L) const {
  std::vector<int> deg(L.size(), 0);
  for (int v = 0; v < L.size(); ++v) {
    ++deg[v];
    if (parent[v] != kGhost) ++deg[parent[v]];
  }
  return deg;
}

bool SpanningTree::contains(const FiniteLattice& L, const DirectedEdge& e) const {
  const int t = L.tip(e);
  if (parent[e.tail] == t && parent_dir[e.tail] == e.dir) return true;
  return t != kGhost && parent[t] == e.tail && parent_dir[t] == L.kind().opposite(e.dir);
}

bool SpanningTree::valid(const FiniteLattice& L) const {
  const int n = L.size();
  if (static_cast<int>(parent.size()) != n || static_cast<int>(parent_dir.size()) != n) return false;
  // 0 unknown, 1 on current path, 2 reaches ghost
  std::vector<char> state(n, 0);
  for (int s = 0; s < n; ++s) {
    std::vector<int> path;
    int v = s;
    while (v != kGhost && state[v] == 0) {
      if (L.neighbor(v, parent_dir[v]) != parent[v]) return false;
      state[v] = 1;
      path.push_back(v);
      v = parent[v];
    }
    if (v != kGhost && state[v] == 1) return false;  // cycle
    for (int u : path) state[u] = 2;
  }
  return true;
}

SpanningTree wilson_ust(const FiniteLattice& L, Rng& rng) {
  const int n = L.size(), c = L.coordination();
  SpanningTree t;
  t.parent.assign(n, kGhost);
  t.parent_dir.assign(n, -1);
  std::vector<char> in_tree(n, 0);
  std::uniform_int_distribution<int> dir(0, c - 1);
  for (int s = 0; s < n; ++s) {
    if (in_tree[s]) continue;
    // random walk from s until it hits the tree; the last exit from each vertex is the loop erasure
    int v = s;
    while (v != kGhost && !in_tree[v]) {
      const int j = dir(rng);
      t.parent_dir[v] = j;
      t.parent[v] = L.neighbor(v, j);
      v = t.parent[v];
    }
    for (v = s; v != kGhost && !in_tree[v]; v = t.parent[v]) in_tree[v] = 1;
  }
  return t;
}

UstStats ust_sample(const FiniteLattice& L, std::int64_t samples, std::uint64_t seed, const EdgeSet& edges,
                    int threads) {
  if (samples < 2) throw InvalidInput("need at least two samples");
  constexpr int kStreams = 16;
  const int n = L.size(), ne = static_cast<int>(edges.size());
  for (const auto& e : edges)
    if (e.tail < 0 || e.tail >= n || e.dir < 0 || e.dir >= L.coordination()) throw InvalidInput("edge outside lattice");
  struct Partial {
    std::vector<std::int64_t> edge_hits;
    std::vector<double> deg_sum, deg_sq;
    bool valid = true;
  };
  std::vector<Partial> parts(kStreams);
  auto run = [&](int s) {
    Partial& p = parts[s];
    p.edge_hits.assign(ne, 0);
    p.deg_sum.assign(n, 0.0);
    p.deg_sq.assign(n, 0.0);
    Rng rng = make_rng(seed, s);
    const std::int64_t count = samples / kStreams + (s < samples % kStreams ? 1 : 0);
    for (std::int64_t i = 0; i < count; ++i) {
      const SpanningTree t = wilson_ust(L, rng);
      p.valid = p.valid && t.valid(L);
      for (int k = 0; k < ne; ++k) p.edge_hits[k] += t.contains(L, edges[k]);
      const auto deg = t.degrees(L);
      for (int v = 0; v < n; ++v) {
        const double x = static_cast<double>(deg[v]) / L.coordination();
        p.deg_sum[v] += x;
        p.deg_sq[v] += x * x;
      }
    }
  };
  const int workers = std::clamp(threads, 1, kStreams);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int s = w; s < kStreams; s += workers) run(s);
    });
  for (auto& th : pool) th.join();

  UstStats out;
  out.samples = samples;
  std::vector<std::int64_t> hits(ne, 0);
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  for (const auto& p : parts) {
    out.all_valid = out.all_valid && p.valid;
    for (int k = 0; k < ne; ++k) hits[k] += p.edge_hits[k];
    for (int v = 0; v < n; ++v) {
      sum[v] += p.deg_sum[v];
      sq[v] += p.deg_sq[v];
    }
  }
  for (int k = 0; k < ne; ++k) out.edge_freq.push_back(bernoulli_estimate(hits[k], samples));
  const double N = static_cast<double>(samples);
  for (int v = 0; v < n; ++v) {
    const double mean = sum[v] / N;
    const double var = std::max(0.0, (sq[v] / N - mean * mean) * N / (N - 1));
    out.degree_field.push_back({mean, std::sqrt(var / N)});
  }
  return out;
}

}  // namespace fgff
