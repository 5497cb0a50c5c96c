#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "crjet/gaussq.hpp"

namespace crjet {

/// Rational field helpers so mpq_class fits the generic routines below.
inline bool is_zero(const mpq_class& x) { return sgn(x) == 0; }
inline bool is_unit(const mpq_class& x) { return sgn(x) != 0; }
inline mpq_class inverse(const mpq_class& x) {
  if (sgn(x) == 0) throw math_error("division by zero");
  return mpq_class(1) / x;
}

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// Inverse of a square matrix over a ring where nonzero pivots are units.
template <class R>
Matrix<R> invert_matrix(Matrix<R> a) {
  const std::size_t n = a.size();
  Matrix<R> inv(n, std::vector<R>(n, R(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = R(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = n;
    for (std::size_t r = col; r < n && piv == n; ++r)
      if (is_unit(a[r][col])) piv = r;
    if (piv == n) throw math_error("singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    R s = inverse(a[col][col]);
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] = a[col][k] * s;
      inv[col][k] = inv[col][k] * s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || is_zero(a[r][col])) continue;
      R f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] = a[r][k] - f * a[col][k];
        inv[r][k] = inv[r][k] - f * inv[col][k];
      }
    }
  }
  return inv;
}

/// Determinant by cofactor expansion; works over any commutative ring.
template <class T>
T determinant(const Matrix<T>& a) {
  const std::size_t n = a.size();
  if (n == 0) return T(1);
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  std::optional<T> det;
  for (std::size_t c = 0; c < n; ++c) {
    Matrix<T> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<T> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(std::move(row));
    }
    T term = a[0][c] * determinant(minor);
    if (!det) det = (c % 2 == 0) ? term : -term;
    else det = (c % 2 == 0) ? *det + term : *det - term;
  }
  return *det;
}

/// Rank over a field by Gaussian elimination (field elements must support is_zero/inverse).
template <class F>
std::size_t matrix_rank(Matrix<F> a) {
  std::size_t rank = 0;
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t piv = rows;
    for (std::size_t r = rank; r < rows && piv == rows; ++r)
      if (!is_zero(a[r][col])) piv = r;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    F s = inverse(a[rank][col]);
    for (std::size_t k = col; k < cols; ++k) a[rank][k] = a[rank][k] * s;
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (is_zero(a[r][col])) continue;
      F f = a[r][col];
      for (std::size_t k = col; k < cols; ++k) a[r][k] = a[r][k] - f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

/// Row-reduced kernel basis over a field; each returned vector v satisfies a v = 0.
template <class F>
Matrix<F> kernel_basis(Matrix<F> a, std::size_t cols) {
  const std::size_t rows = a.size();
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t piv = rows;
    for (std::size_t r = rank; r < rows && piv == rows; ++r)
      if (!is_zero(a[r][col])) piv = r;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    F s = inverse(a[rank][col]);
    for (std::size_t k = 0; k < cols; ++k) a[rank][k] = a[rank][k] * s;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || is_zero(a[r][col])) continue;
      F f = a[r][col];
      for (std::size_t k = 0; k < cols; ++k) a[r][k] = a[r][k] - f * a[rank][k];
    }
    pivots.push_back(col);
    ++rank;
  }
  Matrix<F> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
    std::vector<F> v(cols, F(0));
    v[free] = F(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace crjet
