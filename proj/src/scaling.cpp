#include "fgff/scaling.hpp"

#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "fgff/combinatorics.hpp"
#include "fgff/constants.hpp"

namespace fgff {

namespace {

double norm2(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

void require_distinct(const std::vector<Vec2>& V) {
  for (std::size_t i = 0; i < V.size(); ++i)
    for (std::size_t j = i + 1; j < V.size(); ++j)
      if (V[i] == V[j]) throw InvalidInput("points must be pairwise distinct");
}

FiniteLattice disk_lattice(double eps) {
  const double R = 1.0 / eps;
  const int r = static_cast<int>(std::ceil(R));
  std::vector<Point> pts;
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      if (norm2({x * eps, y * eps}) < 1.0) pts.push_back({x, y});
  return build_region(LatticeKind::hypercubic(2), std::move(pts), {{"shape", "disk"}, {"epsilon", eps}});
}

}  // namespace

Point ScalingGrid::discretize(const Vec2& v) const {
  return {static_cast<int>(std::floor(v[0] / epsilon)), static_cast<int>(std::floor(v[1] / epsilon))};
}

int ScalingGrid::vertex(const Vec2& v) const {
  const int id = lattice().index(discretize(v));
  if (id == kGhost) throw InvalidInput("point falls outside U_ε");
  return id;
}

std::shared_ptr<const ScalingGrid> scaling_grid(double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw InvalidInput("epsilon must lie in (0, 1)");
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const ScalingGrid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(epsilon);
  if (it != cache.end()) return it->second;
  auto g = std::make_shared<const ScalingGrid>(ScalingGrid{epsilon, GreenTable<double>(disk_lattice(epsilon))});
  return cache.emplace(epsilon, g).first->second;
}

double scaled_cumulant(FieldKind field, const std::vector<Vec2>& V, double epsilon, CumulantStats* stats) {
  require_distinct(V);
  for (const auto& v : V)
    if (!(norm2(v) < 1.0)) throw InvalidInput("point is not inside the unit disk");
  const auto grid = scaling_grid(epsilon);
  std::vector<int> ids;
  for (const auto& v : V) ids.push_back(grid->vertex(v));
  if (!is_good_set(grid->lattice(), ids))
    throw InvalidInput("mesh too coarse: discretized points collide or are adjacent");
  const double k = cumulant_closed(grid->green, ids, field, stats);
  return k * std::pow(epsilon, -2.0 * static_cast<double>(V.size()));
}

double cyclic_derivative_sum(const std::vector<Vec2>& V, const TargetOptions& opts) {
  const int n = static_cast<int>(V.size());
  if (n < 2) throw InvalidInput("continuum target needs at least two points");
  require_distinct(V);
  for (const auto& v : V)
    if (1.0 - std::sqrt(norm2(v)) < opts.min_boundary_distance)
      throw InvalidInput("point too close to the boundary of the disk");
  // D[a][b](i, j) = ∂_i^x ∂_j^y g_U(v_a, v_b)
  std::vector<std::vector<Eigen::Matrix2d>> D(n, std::vector<Eigen::Matrix2d>(n, Eigen::Matrix2d::Zero()));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) D[a][b](i, j) = mixed_partial(V[a], V[b], i, j);
  Accumulator<double> total = 0;
  for (const auto& sigma : cyclic_permutations(n)) {
    if (!opts.all_directions) {
      // Σ_η ∏ is the trace of the block product around the cycle
      Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
      int a = 0;
      do {
        P = P * D[a][sigma[a]];
        a = sigma[a];
      } while (a != 0);
      total += P.trace();
    } else {
      // η over {±e_1, ±e_2}: direction k ↦ axis k % 2, sign ±1
      std::vector<int> eta(n, 0);
      while (true) {
        double prod = 1;
        for (int a = 0; a < n; ++a) {
          const int b = sigma[a];
          const double sa = eta[a] < 2 ? 1 : -1, sb = eta[b] < 2 ? 1 : -1;
          prod *= sa * sb * D[a][b](eta[a] % 2, eta[b] % 2);
        }
        total += prod;
        int k = n - 1;
        while (k >= 0 && ++eta[k] == 4) eta[k--] = 0;
        if (k < 0) break;
      }
    }
  }
  double out = static_cast<double>(total);
  if (opts.all_directions) out = std::ldexp(out, -n);
  return out;
}

double continuum_prefactor(FieldKind field, int n, bool triangular) {
  switch (field) {
    case FieldKind::NegX:
      return -std::pow(0.5, n);
    case FieldKind::Degree:
      return -std::pow(-0.5, n);
    case FieldKind::XY:
      return -std::pow(triangular ? c_t().value : c2_closed_form(), n);
  }
  throw InvalidInput("unknown field kind");
}

double continuum_target(FieldKind field, const std::vector<Vec2>& V, bool triangular, const TargetOptions& opts) {
  return continuum_prefactor(field, static_cast<int>(V.size()), triangular) * cyclic_derivative_sum(V, opts);
}

SweepResult convergence_sweep(FieldKind field, const std::vector<Vec2>& V, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidInput("empty epsilon list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw InvalidInput("epsilon list must be decreasing");
  SweepResult out;
  const double target = continuum_target(field, V);
  for (double eps : eps_list) {
    const double s = scaled_cumulant(field, V, eps);
    out.rows.push_back({eps, s, target, std::abs(s - target) / std::abs(target)});
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    out.non_monotone_steps += out.rows[i].rel_error > out.rows[i - 1].rel_error;
  out.decaying = out.non_monotone_steps <= 1 && out.rows.back().rel_error < out.rows.front().rel_error;
  return out;
}

double TestFunction::operator()(const Vec2& x) const {
  const double r2 = (norm2({x[0] - center[0], x[1] - center[1]})) / (radius * radius);
  return r2 < 1.0 ? amplitude * std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

namespace {

void check_supports(const std::vector<TestFunction>& fns) {
  if (fns.size() < 2) throw InvalidInput("need at least two test functions");
  for (std::size_t i = 0; i < fns.size(); ++i) {
    if (!(fns[i].radius > 0)) throw InvalidInput("test function radius must be positive");
    if (std::sqrt(norm2(fns[i].center)) + fns[i].radius >= 1.0) throw InvalidInput("support leaves the unit disk");
    for (std::size_t j = i + 1; j < fns.size(); ++j) {
      const Vec2 d{fns[i].center[0] - fns[j].center[0], fns[i].center[1] - fns[j].center[1]};
      if (std::sqrt(norm2(d)) <= fns[i].radius + fns[j].radius)
        throw InvalidInput("test function supports overlap");
    }
  }
}

// (vertex, ∫_{cell} f) for every lattice cell meeting the support
std::vector<std::pair<int, double>> cell_weights(const ScalingGrid& grid, const TestFunction& f, int sub) {
  const double e = grid.epsilon;
  const int lo0 = static_cast<int>(std::floor((f.center[0] - f.radius) / e));
  const int hi0 = static_cast<int>(std::floor((f.center[0] + f.radius) / e));
  const int lo1 = static_cast<int>(std::floor((f.center[1] - f.radius) / e));
  const int hi1 = static_cast<int>(std::floor((f.center[1] + f.radius) / e));
  const double h = e / sub;
  std::vector<std::pair<int, double>> out;
  for (int z0 = lo0; z0 <= hi0; ++z0)
    for (int z1 = lo1; z1 <= hi1; ++z1) {
      double w = 0;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) w += f({z0 * e + (a + 0.5) * h, z1 * e + (b + 0.5) * h});
      if (w == 0) continue;
      const int v = grid.lattice().index({z0, z1});
      if (v == kGhost) throw InvalidInput("support cell outside U_ε");
      out.emplace_back(v, w * h * h);
    }
  return out;
}

// midpoint nodes of the support disk
std::vector<std::pair<Vec2, double>> support_nodes(const TestFunction& f, int m) {
  const double h = 2 * f.radius / m;
  std::vector<std::pair<Vec2, double>> out;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const Vec2 x{f.center[0] - f.radius + (a + 0.5) * h, f.center[1] - f.radius + (b + 0.5) * h};
      const double w = f(x);
      if (w != 0) out.emplace_back(x, w * h * h);
    }
  return out;
}

// Σ over the tensor grid of nodes[0] × … × nodes[n−1]; the outer index is split over threads
template <class Node, class Eval>
double tensor_sum(const std::vector<std::vector<Node>>& nodes, int threads, Eval&& eval) {
  const int n = static_cast<int>(nodes.size());
  const auto& outer = nodes[0];
  std::vector<double> partial(outer.size(), 0.0);
  std::vector<std::exception_ptr> errors(std::max(1, threads));
  auto work = [&](std::size_t first, std::size_t step) {
   try {
    std::vector<const Node*> pick(n);
    for (std::size_t o = first; o < outer.size(); o += step) {
      pick[0] = &outer[o];
      std::vector<std::size_t> idx(n, 0);
      Accumulator<double> acc = 0;
      while (true) {
        for (int k = 1; k < n; ++k) pick[k] = &nodes[k][idx[k]];
        acc += eval(pick);
        int k = n - 1;
        while (k >= 1 && ++idx[k] == nodes[k].size()) idx[k--] = 0;
        if (k < 1) break;
      }
      partial[o] = static_cast<double>(acc);
    }
   } catch (...) {
    errors[first] = std::current_exception();
   }
  };
  const int workers = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  Accumulator<double> total = 0;
  for (double p : partial) total += p;  // fixed order: result independent of thread count
  return static_cast<double>(total);
}

}  // namespace

double smeared_cumulant(FieldKind field, const std::vector<TestFunction>& fns, double epsilon, const SmearOptions& opts) {
  check_supports(fns);
  const auto grid = scaling_grid(epsilon);
  std::vector<std::vector<std::pair<int, double>>> nodes;
  for (const auto& f : fns) nodes.push_back(cell_weights(*grid, f, std::max(1, opts.subdivisions)));
  // warm the Green column cache serially so the threads only read
  for (const auto& list : nodes)
    for (const auto& [v, w] : list) {
      (void)w;
      grid->green(v, v);
      for (int j = 0; j < 4; ++j)
        if (int u = grid->lattice().neighbor(v, j); u != kGhost) grid->green(u, u);
    }
  const double scale = std::pow(epsilon, -2.0 * static_cast<double>(fns.size()));
  return scale * tensor_sum(nodes, opts.threads, [&](const std::vector<const std::pair<int, double>*>& pick) {
           std::vector<int> V;
           double w = 1;
           for (const auto* p : pick) {
             V.push_back(p->first);
             w *= p->second;
           }
           return w * cumulant_closed(grid->green, V, field);
         });
}

double smeared_target(FieldKind field, const std::vector<TestFunction>& fns, const SmearOptions& opts) {
  check_supports(fns);
  std::vector<std::vector<std::pair<Vec2, double>>> nodes;
  for (const auto& f : fns) nodes.push_back(support_nodes(f, std::max(2, opts.target_points)));
  const double pref = continuum_prefactor(field, static_cast<int>(fns.size()));
  return pref * tensor_sum(nodes, opts.threads, [&](const std::vector<const std::pair<Vec2, double>*>& pick) {
           std::vector<Vec2> V;
           double w = 1;
           for (const auto* p : pick) {
             V.push_back(p->first);
             w *= p->second;
           }
           return w * cyclic_derivative_sum(V);
         });
}

}  // namespace fgff
