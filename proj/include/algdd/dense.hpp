// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_DENSE_HPP
#define ALGDD_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "core.hpp"

namespace algdd {

/// Column-major dense matrix, the layout expected by Fortran LAPACK.
template <scalar K>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(index_t rows, index_t cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, K{}) {}

  static DenseMatrix identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = K(1);
    return m;
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }

  K& operator()(index_t i, index_t j) { return data_[static_cast<std::size_t>(j) * rows_ + i]; }
  const K& operator()(index_t i, index_t j) const {
    return data_[static_cast<std::size_t>(j) * rows_ + i];
  }

  K* data() { return data_.data(); }
  const K* data() const { return data_.data(); }

  std::span<K> col(index_t j) { return {data_.data() + static_cast<std::size_t>(j) * rows_, static_cast<std::size_t>(rows_)}; }
  std::span<const K> col(index_t j) const {
    return {data_.data() + static_cast<std::size_t>(j) * rows_, static_cast<std::size_t>(rows_)};
  }

  /// Copy of columns [first, first + count).
  DenseMatrix columns(index_t first, index_t count) const {
    DenseMatrix m(rows_, count);
    std::copy_n(data_.data() + static_cast<std::size_t>(first) * rows_,
                static_cast<std::size_t>(count) * rows_, m.data());
    return m;
  }

  DenseMatrix adjoint() const {
    DenseMatrix m(cols_, rows_);
    for (index_t j = 0; j < cols_; ++j)
      for (index_t i = 0; i < rows_; ++i) m(j, i) = conj_of((*this)(i, j));
    return m;
  }

  double norm_frobenius() const {
    double s = 0;
    for (const K& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  double norm_max() const {
    double m = 0;
    for (const K& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<K> data_;
};

/// out = [a | b] column concatenation; either side may be empty.
template <scalar K>
DenseMatrix<K> hcat(const DenseMatrix<K>& a, const DenseMatrix<K>& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
  DenseMatrix<K> m(a.rows(), a.cols() + b.cols());
  for (index_t j = 0; j < a.cols(); ++j) std::ranges::copy(a.col(j), m.col(j).begin());
  for (index_t j = 0; j < b.cols(); ++j) std::ranges::copy(b.col(j), m.col(a.cols() + j).begin());
  return m;
}

template <scalar K>
bool is_hermitian_dense(const DenseMatrix<K>& a, double rtol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  double tol = rtol * a.norm_max();
  for (index_t j = 0; j < a.cols(); ++j)
    for (index_t i = 0; i <= j; ++i)
      if (std::abs(a(i, j) - conj_of(a(j, i))) > tol) return false;
  return true;
}

template <scalar K>
std::vector<K> matvec(const DenseMatrix<K>& a, std::span<const K> x) {
  std::vector<K> y(a.rows(), K{});
  for (index_t j = 0; j < a.cols(); ++j) {
    K xj = x[j];
    auto c = a.col(j);
    for (index_t i = 0; i < a.rows(); ++i) y[i] += c[i] * xj;
  }
  return y;
}

}  // namespace algdd

#endif  // ALGDD_DENSE_HPP
