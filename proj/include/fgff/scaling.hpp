#pragma once

#include <memory>
#include <vector>

#include "fgff/cumulants.hpp"
#include "fgff/greenfn.hpp"

namespace fgff {

// U_ε = (U/ε) ∩ Z² for the open unit disk U, with its Green table
struct ScalingGrid {
  double epsilon;
  GreenTable<double> green;

  const FiniteLattice& lattice() const { return green.lattice(); }
  // v ↦ ⌊v/ε⌋
  Point discretize(const Vec2& v) const;
  int vertex(const Vec2& v) const;
};

std::shared_ptr<const ScalingGrid> scaling_grid(double epsilon);

// ε^{−2n} κ at the discretized points, closed-form path
double scaled_cumulant(FieldKind field, const std::vector<Vec2>& V, double epsilon, CumulantStats* stats = nullptr);

struct TargetOptions {
  // sum η over ±e_i and divide by 2^n instead of summing over e_1, e_2
  bool all_directions = false;
  double min_boundary_distance = 1e-3;
};

// Σ_{σ∈S_cycl} Σ_η ∏_i ∂_{η(v_i)}∂_{η(v_σ(i))} g_U(v_i, v_σ(i)), no prefactor
double cyclic_derivative_sum(const std::vector<Vec2>& V, const TargetOptions& opts = {});
// field prefactor: −(1/2)^n NegX, −(−1/2)^n Degree, −C^n XY with C = C_2 (or C_T)
double continuum_prefactor(FieldKind field, int n, bool triangular = false);
double continuum_target(FieldKind field, const std::vector<Vec2>& V, bool triangular = false,
                        const TargetOptions& opts = {});

struct SweepRow {
  double epsilon;
  double scaled;
  double target;
  double rel_error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int non_monotone_steps = 0;
  bool decaying = false;  // at most one non-monotone step and last error below the first
};

SweepResult convergence_sweep(FieldKind field, const std::vector<Vec2>& V, const std::vector<double>& eps_list);

struct TestFunction {
  Vec2 center{0, 0};
  double radius = 0.1;
  double amplitude = 1.0;
  double operator()(const Vec2& x) const;
};

struct SmearOptions {
  int subdivisions = 4;     // midpoints per lattice cell side for ∫_{cell} f
  int target_points = 40;   // midpoint grid per support diameter for the continuum integral
  int threads = 1;
};

// ε^{−2n} ∫ κ(⌊x_1/ε⌋, …, ⌊x_n/ε⌋) ∏ f_i(x_i) dx_i; the integrand is constant on lattice cells
double smeared_cumulant(FieldKind field, const std::vector<TestFunction>& fns, double epsilon,
                        const SmearOptions& opts = {});
// ∫ continuum_target(x_1, …, x_n) ∏ f_i(x_i) dx_i
double smeared_target(FieldKind field, const std::vector<TestFunction>& fns, const SmearOptions& opts = {});

}  // namespace fgff
