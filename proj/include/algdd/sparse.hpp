// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_SPARSE_HPP
#define ALGDD_SPARSE_HPP

#include <algorithm>
#include <span>
#include <vector>

#include "core.hpp"
#include "dense.hpp"

namespace algdd {

/// Symmetry promised by the producer of a matrix (file header or generator).
/// Purely advisory: consumers that rely on it must verify numerically.
enum class SymmetryHint { general, symmetric, hermitian };

template <scalar K>
struct Triplet {
  index_t row;
  index_t col;
  K value;
};

/// Immutable CSR sparse matrix.  Construction canonicalizes: entries are
/// sorted by (row, col), duplicates are merged by summation, and entries
/// whose merged value is exactly zero are dropped.
template <scalar K>
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(index_t n_rows, index_t n_cols, std::vector<Triplet<K>> entries,
               SymmetryHint hint = SymmetryHint::general)
      : rows_(n_rows), cols_(n_cols), hint_(hint) {
    if (n_rows < 0 || n_cols < 0)
      throw std::invalid_argument("SparseMatrix: negative dimension");
    for (const auto& t : entries)
      if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
        throw std::invalid_argument(
            format_msg("SparseMatrix: entry (", t.row, ", ", t.col, ") outside ", n_rows, " x ",
                       n_cols));
    std::sort(entries.begin(), entries.end(), [](const Triplet<K>& a, const Triplet<K>& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    offsets_.assign(n_rows + 1, 0);
    cols_idx_.reserve(entries.size());
    values_.reserve(entries.size());
    std::size_t i = 0;
    for (index_t r = 0; r < n_rows; ++r) {
      while (i < entries.size() && entries[i].row == r) {
        index_t c = entries[i].col;
        K v{};
        while (i < entries.size() && entries[i].row == r && entries[i].col == c)
          v += entries[i++].value;
        if (v != K{}) {
          cols_idx_.push_back(c);
          values_.push_back(v);
        }
      }
      offsets_[r + 1] = static_cast<index_t>(cols_idx_.size());
    }
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t nnz() const { return static_cast<index_t>(values_.size()); }
  SymmetryHint hint() const { return hint_; }

  std::span<const index_t> row_offsets() const { return offsets_; }
  std::span<const index_t> col_indices() const { return cols_idx_; }
  std::span<const K> values() const { return values_; }

  std::span<const index_t> row_cols(index_t r) const {
    return {cols_idx_.data() + offsets_[r], static_cast<std::size_t>(offsets_[r + 1] - offsets_[r])};
  }
  std::span<const K> row_values(index_t r) const {
    return {values_.data() + offsets_[r], static_cast<std::size_t>(offsets_[r + 1] - offsets_[r])};
  }

  /// Entry lookup by binary search; zero when not stored.
  K at(index_t r, index_t c) const {
    auto cols = row_cols(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return K{};
    return values_[offsets_[r] + static_cast<index_t>(it - cols.begin())];
  }

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  SymmetryHint hint_ = SymmetryHint::general;
  std::vector<index_t> offsets_{0};
  std::vector<index_t> cols_idx_;
  std::vector<K> values_;
};

template <scalar K>
void spmv(const SparseMatrix<K>& a, std::span<const K> x, std::span<K> y) {
  if (static_cast<index_t>(x.size()) != a.cols() || static_cast<index_t>(y.size()) != a.rows())
    throw std::invalid_argument("spmv: dimension mismatch");
  auto off = a.row_offsets();
  auto col = a.col_indices();
  auto val = a.values();
  for (index_t r = 0; r < a.rows(); ++r) {
    K s{};
    for (index_t k = off[r]; k < off[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

template <scalar K>
std::vector<K> spmv(const SparseMatrix<K>& a, std::span<const K> x) {
  std::vector<K> y(a.rows());
  spmv(a, x, std::span<K>(y));
  return y;
}

/// Dense block a(rows, cols) in the given index orderings.
template <scalar K>
DenseMatrix<K> extract_submatrix(const SparseMatrix<K>& a, std::span<const index_t> rows,
                                 std::span<const index_t> cols) {
  for (index_t r : rows)
    if (r < 0 || r >= a.rows()) throw std::invalid_argument("extract_submatrix: row out of range");
  std::vector<index_t> col_pos(a.cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= a.cols())
      throw std::invalid_argument("extract_submatrix: column out of range");
    col_pos[cols[j]] = static_cast<index_t>(j);
  }
  DenseMatrix<K> m(static_cast<index_t>(rows.size()), static_cast<index_t>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto rc = a.row_cols(rows[i]);
    auto rv = a.row_values(rows[i]);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      index_t j = col_pos[rc[k]];
      if (j >= 0) m(static_cast<index_t>(i), j) = rv[k];
    }
  }
  return m;
}

/// Sparse block a(idx, idx) with rows and columns renumbered by position in
/// idx.  Touches only the rows listed in idx.
template <scalar K>
SparseMatrix<K> extract_sparse_block(const SparseMatrix<K>& a, std::span<const index_t> idx) {
  std::vector<index_t> pos(a.cols(), -1);
  for (std::size_t j = 0; j < idx.size(); ++j) pos[idx[j]] = static_cast<index_t>(j);
  std::vector<Triplet<K>> t;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto rc = a.row_cols(idx[i]);
    auto rv = a.row_values(idx[i]);
    for (std::size_t k = 0; k < rc.size(); ++k)
      if (pos[rc[k]] >= 0)
        t.push_back({static_cast<index_t>(i), pos[rc[k]], rv[k]});
  }
  auto n = static_cast<index_t>(idx.size());
  return SparseMatrix<K>(n, n, std::move(t), a.hint());
}

/// Pattern of |a| + |a^H| as a matrix of ones; the structural symmetrization
/// used for graph construction.
template <scalar K>
SparseMatrix<K> hermitian_transpose_pattern(const SparseMatrix<K>& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("hermitian_transpose_pattern: matrix not square");
  std::vector<Triplet<K>> t;
  t.reserve(2 * static_cast<std::size_t>(a.nnz()));
  for (index_t r = 0; r < a.rows(); ++r)
    for (index_t c : a.row_cols(r)) {
      t.push_back({r, c, K(1)});
      t.push_back({c, r, K(1)});
    }
  std::vector<Triplet<K>> uniq;
  std::sort(t.begin(), t.end(), [](const Triplet<K>& x, const Triplet<K>& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  for (const auto& e : t)
    if (uniq.empty() || uniq.back().row != e.row || uniq.back().col != e.col) uniq.push_back(e);
  return SparseMatrix<K>(a.rows(), a.cols(), std::move(uniq), SymmetryHint::symmetric);
}

template <scalar K>
double norm_inf(const SparseMatrix<K>& a) {
  double m = 0;
  for (index_t r = 0; r < a.rows(); ++r) {
    double s = 0;
    for (const K& v : a.row_values(r)) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

/// Numerical Hermitian check: |a - a^H| entries bounded by rtol * max|a|.
template <scalar K>
bool is_hermitian(const SparseMatrix<K>& a, double rtol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  double scale = 0;
  for (const K& v : a.values()) scale = std::max(scale, std::abs(v));
  double tol = rtol * scale;
  for (index_t r = 0; r < a.rows(); ++r) {
    auto rc = a.row_cols(r);
    auto rv = a.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k)
      if (std::abs(rv[k] - conj_of(a.at(rc[k], r))) > tol) return false;
  }
  return true;
}

template <scalar K>
DenseMatrix<K> to_dense(const SparseMatrix<K>& a) {
  DenseMatrix<K> m(a.rows(), a.cols());
  for (index_t r = 0; r < a.rows(); ++r) {
    auto rc = a.row_cols(r);
    auto rv = a.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) m(r, rc[k]) = rv[k];
  }
  return m;
}

}  // namespace algdd

#endif  // ALGDD_SPARSE_HPP
