#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <json.hpp>

#include "fgff/errors.hpp"
#include "fgff/scalar.hpp"

namespace fgff {

enum class LatticeFamily { Hypercubic, Triangular };

struct LatticeKind {
  LatticeFamily family = LatticeFamily::Hypercubic;
  int dim = 2;

  static LatticeKind hypercubic(int d);
  static LatticeKind triangular() { return {LatticeFamily::Triangular, 2}; }

  bool is_triangular() const { return family == LatticeFamily::Triangular; }
  // 2d for Z^d, 6 for T
  int coordination() const { return is_triangular() ? 6 : 2 * dim; }
  int opposite(int dir) const {
    return is_triangular() ? (dir + 3) % 6 : (dir + dim) % (2 * dim);
  }
  // integer offset of a direction (axial coordinates on T)
  std::vector<int> offset(int dir) const;
  // embedded unit vector (for T: angle dir*pi/3)
  std::vector<double> unit(int dir) const;
  std::string name() const;

  friend bool operator==(const LatticeKind&, const LatticeKind&) = default;
};

using Point = std::vector<int>;

inline constexpr int kGhost = -1;

// Oriented edge (f-, f+) with f- a vertex of the lattice; f+ = f- + offset(dir)
// may lie outside, in which case it is an edge to the ghost.
struct DirectedEdge {
  int tail = 0;
  int dir = 0;
  friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

using EdgeSet = std::vector<DirectedEdge>;

class FiniteLattice {
 public:
  FiniteLattice(LatticeKind kind, std::vector<Point> points, nlohmann::json descriptor);

  const LatticeKind& kind() const { return kind_; }
  int size() const { return static_cast<int>(points_.size()); }
  int coordination() const { return kind_.coordination(); }
  std::uint64_t id() const { return id_; }

  const Point& point(int v) const { return points_.at(v); }
  // vertex id or kGhost when p is outside
  int index(const Point& p) const;
  bool contains(const Point& p) const { return index(p) != kGhost; }
  int neighbor(int v, int dir) const { return nbr_[v * coordination() + dir]; }
  int ghost_multiplicity(int v) const { return ghost_mult_[v]; }
  bool on_inner_boundary(int v) const { return ghost_mult_[v] > 0; }
  std::array<double, 2> position(int v) const;

  const std::vector<int>& inner_boundary() const { return boundary_in_; }
  const std::vector<int>& interior() const { return interior_; }
  std::vector<Point> exterior_boundary() const;

  // -Δ_Λ (Dirichlet), positive definite
  template <class S>
  Matrix<S> neg_laplacian() const;
  Eigen::SparseMatrix<double> neg_laplacian_sparse() const;
  // Δ^g on Λ ∪ {g}; the ghost is the last index
  template <class S>
  Matrix<S> wired_laplacian() const;

  Point tip_point(const DirectedEdge& e) const;
  int tip(const DirectedEdge& e) const { return neighbor(e.tail, e.dir); }
  bool escapes(const DirectedEdge& e) const { return tip(e) == kGhost; }
  // (f+, f-); needs f+ inside Λ
  DirectedEdge reversed(const DirectedEdge& e) const;
  // -f = (f-, f- - e_i)
  DirectedEdge reflected(const DirectedEdge& e) const { return {e.tail, kind_.opposite(e.dir)}; }

  const nlohmann::json& descriptor() const { return descriptor_; }
  nlohmann::json to_json() const;

 private:
  LatticeKind kind_;
  std::vector<Point> points_;
  std::map<Point, int> index_;
  std::vector<int> nbr_;
  std::vector<int> ghost_mult_;
  std::vector<int> boundary_in_;
  std::vector<int> interior_;
  nlohmann::json descriptor_;
  std::uint64_t id_;
};

FiniteLattice build_box(int d, const std::vector<int>& sides);
FiniteLattice build_triangular_patch(int radius);
// arbitrary finite vertex set; sorted into canonical (lexicographic) order
FiniteLattice build_region(LatticeKind kind, std::vector<Point> points, nlohmann::json descriptor = {});
FiniteLattice lattice_from_json(const nlohmann::json& j);

int graph_distance_triangular(const Point& a, const Point& b);

bool is_good_set(const FiniteLattice& L, const std::vector<int>& V);
void require_good_set(const FiniteLattice& L, const std::vector<int>& V);

EdgeSet edge_star(const FiniteLattice& L, int v);
EdgeSet edge_set(const FiniteLattice& L, const std::vector<int>& V);

// ---- template definitions ----

template <class S>
Matrix<S> FiniteLattice::neg_laplacian() const {
  const int n = size();
  Matrix<S> m = Matrix<S>::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    m(v, v) = S(coordination());
    for (int j = 0; j < coordination(); ++j) {
      const int w = neighbor(v, j);
      if (w != kGhost) m(v, w) -= S(1);
    }
  }
  return m;
}

template <class S>
Matrix<S> FiniteLattice::wired_laplacian() const {
  const int n = size();
  Matrix<S> m = Matrix<S>::Zero(n + 1, n + 1);
  for (int v = 0; v < n; ++v) {
    m(v, v) = -S(coordination());
    for (int j = 0; j < coordination(); ++j) {
      const int w = neighbor(v, j);
      const int col = (w == kGhost) ? n : w;
      m(v, col) += S(1);
      if (w == kGhost) {
        m(n, v) += S(1);
        m(n, n) -= S(1);
      }
    }
  }
  return m;
}

}  // namespace fgff
