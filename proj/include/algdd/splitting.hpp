// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_SPLITTING_HPP
#define ALGDD_SPLITTING_HPP

#include <vector>

#include "lapack.hpp"
#include "partition.hpp"
#include "sparse.hpp"

namespace algdd {

/// Local matrices of one subdomain in the [interior | boundary] ordering of
/// its overlapping set.  a_tilde_ii differs from a_ii only on the diagonal of
/// the boundary rows, where the coupling of each boundary vertex to the
/// exterior is lumped and subtracted:
///
///   a_tilde_ii(j, j) = a_ii(j, j) - sum_k |a(v_j, k)|  over exterior k,
///
/// so the lifted local matrix stays below a in the positive semidefinite
/// order whenever a is Hermitian and diagonally dominant.
template <scalar K>
struct LocalSplitting {
  index_t subdomain = 0;
  index_t n_interior = 0;
  index_t n_boundary = 0;
  SparseMatrix<K> a_ii;
  SparseMatrix<K> a_tilde_ii;
  std::vector<double> lump;  // exterior coupling per boundary row
};

/// Builds the splitting for subdomain i, touching only the rows listed in its
/// overlapping set.
template <scalar K>
LocalSplitting<K> build_local_splitting(const SparseMatrix<K>& a, const OverlapLayout& layout,
                                        index_t i) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("build_local_splitting: matrix not square");
  if (a.rows() != layout.n)
    throw std::invalid_argument("build_local_splitting: layout size mismatch");
  const auto& idx = layout.overlapping[i];
  const auto n_local = static_cast<index_t>(idx.size());
  const auto n_interior = static_cast<index_t>(layout.interior[i].size());

  std::vector<index_t> pos(a.cols(), -1);
  for (index_t k = 0; k < n_local; ++k) pos[idx[k]] = k;

  LocalSplitting<K> s;
  s.subdomain = i;
  s.n_interior = n_interior;
  s.n_boundary = n_local - n_interior;
  s.lump.assign(s.n_boundary, 0.0);

  std::vector<Triplet<K>> block;
  for (index_t k = 0; k < n_local; ++k) {
    auto rc = a.row_cols(idx[k]);
    auto rv = a.row_values(idx[k]);
    for (std::size_t e = 0; e < rc.size(); ++e) {
      index_t c = pos[rc[e]];
      if (c >= 0)
        block.push_back({k, c, rv[e]});
      else if (k >= n_interior)
        s.lump[k - n_interior] += std::abs(rv[e]);
    }
  }
  std::vector<Triplet<K>> lumped = block;
  for (index_t b = 0; b < s.n_boundary; ++b)
    if (s.lump[b] != 0.0)
      lumped.push_back({n_interior + b, n_interior + b, K(-s.lump[b])});
  s.a_ii = SparseMatrix<K>(n_local, n_local, std::move(block), a.hint());
  s.a_tilde_ii = SparseMatrix<K>(n_local, n_local, std::move(lumped), a.hint());
  return s;
}

struct HpsdReport {
  double min_eig_local = 0;      // smallest eigenvalue of a_tilde_ii
  double min_eig_remainder = 0;  // smallest eigenvalue of a - lift(a_tilde_ii)
  double scale = 0;              // infinity norm of a, the reference for tol
  bool local_psd = false;
  bool remainder_psd = false;

  bool ok() const { return local_psd && remainder_psd; }
};

/// Checks both halves of the splitting order a_tilde_ii >= 0 and
/// a - R_i^T a_tilde_ii R_i >= 0 by dense eigendecomposition, allowing
/// eigenvalues down to -tol * |a|_inf.  Refuses non-Hermitian input, for
/// which the positive semidefinite order is meaningless.
template <scalar K>
HpsdReport verify_hpsd_splitting(const SparseMatrix<K>& a, const OverlapLayout& layout,
                                 const LocalSplitting<K>& s, double tol = 1e-10) {
  if (!is_hermitian(a))
    throw std::invalid_argument("verify_hpsd_splitting: matrix is not Hermitian");
  HpsdReport report;
  report.scale = norm_inf(a);
  const double floor = -tol * (report.scale > 0 ? report.scale : 1.0);

  auto [w_local, v_local] = la::eig_hermitian(to_dense(s.a_tilde_ii));
  report.min_eig_local = w_local.empty() ? 0.0 : w_local.front();

  DenseMatrix<K> rest = to_dense(a);
  const auto& idx = layout.overlapping[s.subdomain];
  DenseMatrix<K> local = to_dense(s.a_tilde_ii);
  for (index_t r = 0; r < local.rows(); ++r)
    for (index_t c = 0; c < local.cols(); ++c) rest(idx[r], idx[c]) -= local(r, c);
  auto [w_rest, v_rest] = la::eig_hermitian(std::move(rest));
  report.min_eig_remainder = w_rest.empty() ? 0.0 : w_rest.front();

  report.local_psd = report.min_eig_local >= floor;
  report.remainder_psd = report.min_eig_remainder >= floor;
  return report;
}

}  // namespace algdd

#endif  // ALGDD_SPLITTING_HPP
