#include "fgff/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <numbers>
#include <set>

namespace fgff {

namespace {
std::atomic<std::uint64_t> next_lattice_id{1};

const std::array<std::array<int, 2>, 6> kTriOffsets{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
}  // namespace

LatticeKind LatticeKind::hypercubic(int d) {
  if (d < 2) throw InvalidInput("hypercubic lattice needs d >= 2");
  return {LatticeFamily::Hypercubic, d};
}

std::vector<int> LatticeKind::offset(int dir) const {
  if (dir < 0 || dir >= coordination()) throw InvalidInput("direction index out of range");
  if (is_triangular()) return {kTriOffsets[dir][0], kTriOffsets[dir][1]};
  std::vector<int> off(dim, 0);
  off[dir % dim] = dir < dim ? 1 : -1;
  return off;
}

std::vector<double> LatticeKind::unit(int dir) const {
  if (is_triangular()) {
    const double th = dir * std::numbers::pi / 3.0;
    return {std::cos(th), std::sin(th)};
  }
  auto o = offset(dir);
  return std::vector<double>(o.begin(), o.end());
}

std::string LatticeKind::name() const {
  return is_triangular() ? std::string("tri") : "z" + std::to_string(dim);
}

FiniteLattice::FiniteLattice(LatticeKind kind, std::vector<Point> points, nlohmann::json descriptor)
    : kind_(kind), points_(std::move(points)), descriptor_(std::move(descriptor)), id_(next_lattice_id++) {
  if (points_.empty()) throw InvalidInput("empty lattice");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (static_cast<int>(points_[i].size()) != kind_.dim)
      throw InvalidInput("point dimension does not match lattice kind");
    if (!index_.emplace(points_[i], static_cast<int>(i)).second) throw InvalidInput("duplicate lattice point");
  }
  const int n = size(), c = coordination();
  nbr_.assign(static_cast<std::size_t>(n) * c, kGhost);
  ghost_mult_.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < c; ++j) {
      Point q = points_[v];
      const auto off = kind_.offset(j);
      for (int k = 0; k < kind_.dim; ++k) q[k] += off[k];
      const int w = index(q);
      nbr_[v * c + j] = w;
      if (w == kGhost) ++ghost_mult_[v];
    }
    (ghost_mult_[v] > 0 ? boundary_in_ : interior_).push_back(v);
  }
  // connectivity of Λ^g: every vertex reaches the ghost (Λ itself may be disconnected
  // only if some component has no boundary, impossible for finite sets)
  std::vector<char> seen(n, 0);
  std::deque<int> q(boundary_in_.begin(), boundary_in_.end());
  for (int v : boundary_in_) seen[v] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int j = 0; j < c; ++j) {
      const int w = neighbor(v, j);
      if (w != kGhost && !seen[w]) {
        seen[w] = 1;
        q.push_back(w);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InvalidInput("wired graph is disconnected");
}

int FiniteLattice::index(const Point& p) const {
  auto it = index_.find(p);
  return it == index_.end() ? kGhost : it->second;
}

std::array<double, 2> FiniteLattice::position(int v) const {
  const Point& p = point(v);
  if (kind_.is_triangular()) return {p[0] + 0.5 * p[1], p[1] * std::numbers::sqrt3 / 2.0};
  return {static_cast<double>(p[0]), kind_.dim > 1 ? static_cast<double>(p[1]) : 0.0};
}

std::vector<Point> FiniteLattice::exterior_boundary() const {
  std::set<Point> out;
  for (int v : boundary_in_)
    for (int j = 0; j < coordination(); ++j)
      if (neighbor(v, j) == kGhost) out.insert(tip_point({v, j}));
  return {out.begin(), out.end()};
}

Eigen::SparseMatrix<double> FiniteLattice::neg_laplacian_sparse() const {
  const int n = size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * (coordination() + 1));
  for (int v = 0; v < n; ++v) {
    t.emplace_back(v, v, coordination());
    for (int j = 0; j < coordination(); ++j) {
      const int w = neighbor(v, j);
      if (w != kGhost) t.emplace_back(v, w, -1.0);
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Point FiniteLattice::tip_point(const DirectedEdge& e) const {
  Point p = point(e.tail);
  const auto off = kind_.offset(e.dir);
  for (int k = 0; k < kind_.dim; ++k) p[k] += off[k];
  return p;
}

DirectedEdge FiniteLattice::reversed(const DirectedEdge& e) const {
  const int t = tip(e);
  if (t == kGhost) throw InvalidInput("cannot reverse an edge whose tip is outside the lattice");
  return {t, kind_.opposite(e.dir)};
}

nlohmann::json FiniteLattice::to_json() const {
  nlohmann::json j = descriptor_.is_object() ? descriptor_ : nlohmann::json::object();
  j["kind"] = kind_.is_triangular() ? "triangular" : "hypercubic";
  if (!kind_.is_triangular()) j["dim"] = kind_.dim;
  j["vertices"] = size();
  return j;
}

FiniteLattice build_box(int d, const std::vector<int>& sides) {
  const auto kind = LatticeKind::hypercubic(d);
  if (static_cast<int>(sides.size()) != d) throw InvalidInput("box needs one side length per dimension");
  long total = 1;
  for (int s : sides) {
    if (s < 1) throw InvalidInput("empty box");
    total *= s;
  }
  std::vector<Point> pts;
  pts.reserve(total);
  Point p(d, 0);
  for (long k = 0; k < total; ++k) {
    pts.push_back(p);
    for (int i = d - 1; i >= 0; --i) {  // last coordinate fastest
      if (++p[i] < sides[i]) break;
      p[i] = 0;
    }
  }
  return FiniteLattice(kind, std::move(pts), {{"shape", "box"}, {"sides", sides}});
}

int graph_distance_triangular(const Point& a, const Point& b) {
  const int x = b[0] - a[0], y = b[1] - a[1];
  return std::max({std::abs(x), std::abs(y), std::abs(x + y)});
}

FiniteLattice build_triangular_patch(int radius) {
  if (radius < 1) throw InvalidInput("triangular patch radius must be >= 1");
  std::vector<Point> pts;
  for (int a = -radius; a <= radius; ++a)
    for (int b = -radius; b <= radius; ++b)
      if (graph_distance_triangular({0, 0}, {a, b}) <= radius) pts.push_back({a, b});
  return FiniteLattice(LatticeKind::triangular(), std::move(pts), {{"shape", "patch"}, {"radius", radius}});
}

FiniteLattice build_region(LatticeKind kind, std::vector<Point> points, nlohmann::json descriptor) {
  std::sort(points.begin(), points.end());
  if (descriptor.is_null()) descriptor = {{"shape", "region"}};
  return FiniteLattice(kind, std::move(points), std::move(descriptor));
}

FiniteLattice lattice_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  if (kind == "triangular") return build_triangular_patch(j.at("radius").get<int>());
  if (kind == "hypercubic") {
    const auto sides = j.at("sides").get<std::vector<int>>();
    return build_box(j.value("dim", static_cast<int>(sides.size())), sides);
  }
  throw InvalidInput("unknown lattice kind: " + kind);
}

bool is_good_set(const FiniteLattice& L, const std::vector<int>& V) {
  const int n = L.size();
  std::vector<char> inV(n, 0);
  for (int v : V) {
    if (v < 0 || v >= n) throw InvalidInput("vertex set is not contained in the lattice");
    if (inV[v]) return false;
    inV[v] = 1;
  }
  for (int v : V)
    for (int j = 0; j < L.coordination(); ++j) {
      const int w = L.neighbor(v, j);
      if (w != kGhost && inV[w]) return false;
    }
  // every vertex of Λ \ V must reach the ghost avoiding V
  std::vector<char> seen(n, 0);
  std::deque<int> q;
  for (int v : L.inner_boundary())
    if (!inV[v]) {
      seen[v] = 1;
      q.push_back(v);
    }
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int j = 0; j < L.coordination(); ++j) {
      const int w = L.neighbor(v, j);
      if (w != kGhost && !inV[w] && !seen[w]) {
        seen[w] = 1;
        q.push_back(w);
      }
    }
  }
  for (int v = 0; v < n; ++v)
    if (!inV[v] && !seen[v]) return false;
  return true;
}

void require_good_set(const FiniteLattice& L, const std::vector<int>& V) {
  if (!is_good_set(L, V)) throw InvalidInput("vertex set is not good");
}

EdgeSet edge_star(const FiniteLattice& L, int v) {
  if (v < 0 || v >= L.size()) throw InvalidInput("vertex outside lattice");
  EdgeSet out;
  for (int j = 0; j < L.coordination(); ++j) out.push_back({v, j});
  return out;
}

EdgeSet edge_set(const FiniteLattice& L, const std::vector<int>& V) {
  EdgeSet out;
  for (int v : V) {
    auto s = edge_star(L, v);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace fgff
