// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_SCHWARZ_HPP
#define ALGDD_SCHWARZ_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "coarse.hpp"
#include "lapack.hpp"
#include "partition.hpp"
#include "sparse.hpp"

namespace algdd {

/// One-level combination rule: additive sums plain prolongations (ASM),
/// restricted applies the partition-of-unity weights on the way back (RAS).
enum class OneLevelType { additive, restricted };

enum class CoarseCorrection { none, additive, deflated };

template <scalar K>
class SchwarzPreconditioner {
 public:
  struct Options {
    OneLevelType one_level = OneLevelType::restricted;
    CoarseCorrection coarse = CoarseCorrection::none;
    index_t dense_threshold = 4096;  // local blocks above this use a sparse factorization
  };

  /// Factors every local block a(overlap_i, overlap_i).  The matrix and the
  /// layout must outlive the preconditioner.  Throws when a local block or
  /// the coarse matrix is singular.
  static SchwarzPreconditioner setup(const SparseMatrix<K>& a, const OverlapLayout& layout,
                                     Options opt, CoarseSpace<K> coarse = {}) {
    if (a.rows() != a.cols())
      throw std::invalid_argument("SchwarzPreconditioner: matrix not square");
    if (a.rows() != layout.n)
      throw std::invalid_argument("SchwarzPreconditioner: layout size mismatch");
    if (opt.coarse != CoarseCorrection::none && coarse.n0 > 0 && !coarse.a00_lu.ipiv.empty() &&
        coarse.a00.rows() != coarse.n0)
      throw std::invalid_argument("SchwarzPreconditioner: malformed coarse space");
    SchwarzPreconditioner pc;
    pc.a_ = &a;
    pc.layout_ = &layout;
    pc.opt_ = opt;
    pc.coarse_ = std::move(coarse);
    pc.local_.resize(layout.parts());
    parallel_for(layout.parts(), [&](index_t i) {
      const auto& idx = layout.overlapping[i];
      const auto n_i = static_cast<index_t>(idx.size());
      LocalSolver& solver = pc.local_[i];
      try {
        if (n_i <= opt.dense_threshold) {
          solver.dense = la::lu_factor(extract_submatrix(a, idx, idx), "local matrix");
        } else {
          SparseMatrix<K> block = extract_sparse_block(a, idx);
          Eigen::SparseMatrix<K> eb(n_i, n_i);
          std::vector<Eigen::Triplet<K>> trip;
          trip.reserve(block.nnz());
          for (index_t r = 0; r < n_i; ++r) {
            auto rc = block.row_cols(r);
            auto rv = block.row_values(r);
            for (std::size_t e = 0; e < rc.size(); ++e) trip.emplace_back(r, rc[e], rv[e]);
          }
          eb.setFromTriplets(trip.begin(), trip.end());
          solver.sparse = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<K>>>();
          solver.sparse->compute(eb);
          if (solver.sparse->info() != Eigen::Success)
            throw std::runtime_error("local matrix is singular");
        }
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(format_msg(e.what(), " on subdomain ", i));
      }
    });
    return pc;
  }

  index_t size() const { return layout_->n; }
  const Options& options() const { return opt_; }
  const CoarseSpace<K>& coarse() const { return coarse_; }

  /// out = M^{-1} v for the configured variant; v and out must not alias.
  void apply(std::span<const K> v, std::span<K> out) const {
    if (opt_.coarse == CoarseCorrection::none || coarse_.n0 == 0)
      apply_one_level(v, out);
    else
      apply_two_level(v, out);
  }

  /// out = sum_i R_i^T (D_i) a_ii^{-1} R_i v; the weights appear for the
  /// restricted variant only.
  void apply_one_level(std::span<const K> v, std::span<K> out) const {
    const index_t parts = layout_->parts();
    std::vector<std::vector<K>> slot(parts);
    parallel_for(parts, [&](index_t i) {
      auto& local = slot[i];
      local.resize(layout_->overlapping[i].size());
      restrict_vec<K>(*layout_, i, v, local);
      solve_local(i, local.data(), 1);
    });
    std::fill(out.begin(), out.end(), K{});
    for (index_t i = 0; i < parts; ++i) {
      if (opt_.one_level == OneLevelType::restricted)
        prolong_add_weighted<K>(*layout_, i, slot[i], out);
      else
        prolong_add<K>(*layout_, i, slot[i], out);
    }
  }

  /// Adds the coarse correction, additively or as a deflation step
  /// M^{-1} v = P_0 v + M_1^{-1}(v - a P_0 v) with P_0 = R_0^H a00^{-1} R_0.
  void apply_two_level(std::span<const K> v, std::span<K> out) const {
    const index_t n = layout_->n;
    std::vector<K> y0(coarse_.n0);
    coarse_.restrict_vec(v, y0);
    coarse_.solve(y0.data(), 1);
    std::vector<K> w(n, K{});
    coarse_.prolong_add(y0, w);
    if (opt_.coarse == CoarseCorrection::additive) {
      apply_one_level(v, out);
    } else {
      std::vector<K> r(n);
      spmv(*a_, std::span<const K>(w), std::span<K>(r));
      for (index_t i = 0; i < n; ++i) r[i] = v[i] - r[i];
      apply_one_level(r, out);
    }
    for (index_t i = 0; i < n; ++i) out[i] += w[i];
  }

  /// Block application with per-subdomain multi-right-hand-side solves; used
  /// to densify the preconditioned operator.
  DenseMatrix<K> apply_block(const DenseMatrix<K>& v) const {
    if (opt_.coarse == CoarseCorrection::none || coarse_.n0 == 0) return one_level_block(v);
    const index_t n = layout_->n, cols = v.cols();
    DenseMatrix<K> y0(coarse_.n0, cols);
    for (index_t j = 0; j < cols; ++j) coarse_.restrict_vec(v.col(j), y0.col(j));
    coarse_.solve(y0.data(), cols);
    DenseMatrix<K> w(n, cols);
    for (index_t j = 0; j < cols; ++j) coarse_.prolong_add(y0.col(j), w.col(j));
    DenseMatrix<K> out(n, cols);
    if (opt_.coarse == CoarseCorrection::additive) {
      out = one_level_block(v);
    } else {
      DenseMatrix<K> r(n, cols);
      for (index_t j = 0; j < cols; ++j) {
        spmv(*a_, std::span<const K>(w.col(j)), r.col(j));
        auto vc = v.col(j);
        auto rc = r.col(j);
        for (index_t i = 0; i < n; ++i) rc[i] = vc[i] - rc[i];
      }
      out = one_level_block(r);
    }
    for (index_t j = 0; j < cols; ++j) {
      auto oc = out.col(j);
      auto wc = w.col(j);
      for (index_t i = 0; i < n; ++i) oc[i] += wc[i];
    }
    return out;
  }

 private:
  struct LocalSolver {
    la::LuFactors<K> dense;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<K>>> sparse;
  };

  DenseMatrix<K> one_level_block(const DenseMatrix<K>& v) const {
    const index_t cols = v.cols();
    DenseMatrix<K> out(layout_->n, cols);
    for (index_t i = 0; i < layout_->parts(); ++i) {
      const auto& idx = layout_->overlapping[i];
      const auto n_i = static_cast<index_t>(idx.size());
      DenseMatrix<K> local(n_i, cols);
      for (index_t j = 0; j < cols; ++j) {
        auto vc = v.col(j);
        auto lc = local.col(j);
        for (index_t k = 0; k < n_i; ++k) lc[k] = vc[idx[k]];
      }
      solve_local(i, local.data(), cols);
      for (index_t j = 0; j < cols; ++j) {
        if (opt_.one_level == OneLevelType::restricted)
          prolong_add_weighted<K>(*layout_, i, local.col(j), out.col(j));
        else
          prolong_add<K>(*layout_, i, local.col(j), out.col(j));
      }
    }
    return out;
  }

  void solve_local(index_t i, K* rhs, index_t nrhs) const {
    const LocalSolver& s = local_[i];
    if (s.sparse) {
      const auto n_i = static_cast<index_t>(layout_->overlapping[i].size());
      using EMat = Eigen::Matrix<K, Eigen::Dynamic, Eigen::Dynamic>;
      Eigen::Map<EMat> b(rhs, n_i, nrhs);
      EMat x = s.sparse->solve(b);
      b = x;
    } else {
      la::lu_solve(s.dense, rhs, nrhs);
    }
  }

  const SparseMatrix<K>* a_ = nullptr;
  const OverlapLayout* layout_ = nullptr;
  Options opt_;
  CoarseSpace<K> coarse_;
  std::vector<LocalSolver> local_;
};

}  // namespace algdd

#endif  // ALGDD_SCHWARZ_HPP
