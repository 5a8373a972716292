#pragma once

#include <cmath>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Core>

namespace fgff {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
inline constexpr bool is_exact_v = !std::is_floating_point_v<S>;

// wider accumulator for floating point, identity for exact types
template <class S>
using Accumulator = std::conditional_t<std::is_floating_point_v<S>, long double, S>;

template <class S>
double to_double(const S& x) {
  if constexpr (std::is_floating_point_v<S>)
    return static_cast<double>(x);
  else
    return x.template convert_to<double>();
}

template <class S>
S from_ratio(long num, long den = 1) {
  if constexpr (std::is_floating_point_v<S>)
    return static_cast<S>(num) / static_cast<S>(den);
  else
    return S(num) / S(den);
}

template <class S>
bool is_zero(const S& x) {
  return x == S(0);
}

}  // namespace fgff

namespace Eigen {
template <>
struct NumTraits<fgff::Rational> : GenericNumTraits<fgff::Rational> {
  using Real = fgff::Rational;
  using NonInteger = fgff::Rational;
  using Literal = fgff::Rational;
  using Nested = fgff::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 100,
    MulCost = 100
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};
}  // namespace Eigen
