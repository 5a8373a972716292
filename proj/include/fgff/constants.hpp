#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "fgff/greenfn.hpp"

namespace fgff {

// One subset ℰ of the origin edge star that contains direction 0.
struct SubsetTerm {
  std::uint32_t mask = 0;  // bit j set iff direction j ∈ ℰ
  int size = 0;
  int weight = 0;                 // (−1)^{|ℰ|}|ℰ|
  double det = 0.0;               // det M̄ on ℰ∖{0}
  std::vector<double> alt_dets;   // det of the row-replaced matrix per direction (0 if absent)
  double contribution = 0.0;      // prefactor · weight · (det − Σ γ_α alt_dets[α])
};

struct ConstantResult {
  LatticeKind kind;
  double value = 0.0;
  std::optional<double> closed_form;
  std::vector<double> gammas;  // γ_α indexed by direction; γ_0 unused
  std::vector<SubsetTerm> terms;
};

enum class GreenEvaluator { Default, HeatKernel, Fourier };

using Green0 = std::function<double(const Point&)>;

// Generic subset sum  prefactor · Σ_{ℰ∋0} (−1)^{|ℰ|}|ℰ| [det M̄_ℰ' − Σ_α γ_α 1{α∈ℰ} det M̄^α_ℰ']
// over the c directions of `kind`; M̄^α replaces the row of direction α by direction 0.
ConstantResult subset_constant(const LatticeKind& kind, const std::vector<double>& gammas, double prefactor,
                               const Green0& green0);

// C_d for Z^d, d ∈ {2,3,4}. Fourier is d = 3 only.
ConstantResult c_d(int d, GreenEvaluator evaluator = GreenEvaluator::Default);
ConstantResult c_t();
// the triangular template run on Z² with γ_α = cos(απ/2)
ConstantResult c_t_square_degeneration();

double c2_closed_form();
double ct_closed_form();

// infinite-volume single-site height-one probability implied by the constant
double single_site_height_one(const ConstantResult& c);

void write_constant_csv(std::ostream& os, const ConstantResult& r);

}  // namespace fgff
