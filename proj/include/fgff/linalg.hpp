#pragma once

#include <utility>
#include <vector>

#include <Eigen/LU>

#include "fgff/errors.hpp"
#include "fgff/scalar.hpp"

namespace fgff {

// Exact Gaussian elimination; any nonzero pivot is fine over Q.
template <class S>
S exact_determinant(Matrix<S> a) {
  const Eigen::Index n = a.rows();
  S det(1);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    while (p < n && is_zero(a(p, c))) ++p;
    if (p == n) return S(0);
    if (p != c) {
      a.row(p).swap(a.row(c));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (is_zero(a(r, c))) continue;
      const S f = a(r, c) / a(c, c);
      for (Eigen::Index k = c + 1; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

template <class Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw InvalidInput("determinant of a non-square matrix");
  if (m.rows() == 0) return S(1);
  if constexpr (is_exact_v<S>) {
    return exact_determinant<S>(m.eval());
  } else {
    if (m.rows() <= 4) return m.eval().determinant();
    return Eigen::PartialPivLU<Matrix<S>>(m).determinant();
  }
}

template <class S>
Matrix<S> exact_inverse(Matrix<S> a) {
  const Eigen::Index n = a.rows();
  Matrix<S> inv = Matrix<S>::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    while (p < n && is_zero(a(p, c))) ++p;
    if (p == n) throw NumericalError("singular matrix in exact inverse");
    if (p != c) {
      a.row(p).swap(a.row(c));
      inv.row(p).swap(inv.row(c));
    }
    const S piv = a(c, c);
    a.row(c) /= piv;
    inv.row(c) /= piv;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c || is_zero(a(r, c))) continue;
      const S f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

template <class Derived>
Matrix<typename Derived::Scalar> inverse(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  if constexpr (is_exact_v<S>) {
    return exact_inverse<S>(m.eval());
  } else {
    Eigen::PartialPivLU<Matrix<S>> lu(m);
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0 || std::abs(lu.determinant()) == 0 || lu.rcond() < 1e-14)
      throw NumericalError("matrix is numerically singular");
    return lu.inverse();
  }
}

// Principal submatrix on an index list (order preserved, repeats allowed).
template <class Derived>
Matrix<typename Derived::Scalar> principal(const Eigen::MatrixBase<Derived>& m,
                                           const std::vector<int>& idx) {
  Matrix<typename Derived::Scalar> out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

}  // namespace fgff
