// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_COARSE_HPP
#define ALGDD_COARSE_HPP

#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include "lapack.hpp"
#include "partition.hpp"
#include "splitting.hpp"

namespace algdd {

/// Orthonormal basis of the (right) null space at relative tolerance
/// tol * sigma_max; the zero matrix has a full kernel.
template <scalar K>
DenseMatrix<K> kernel_basis(const DenseMatrix<K>& m, double tol = 1e-10) {
  const index_t n = m.cols();
  if (m.rows() == 0 || n == 0) return DenseMatrix<K>::identity(n);
  la::Svd<K> s = la::svd(m);
  const double cut = tol * (s.sigma.empty() ? 0.0 : s.sigma.front());
  DenseMatrix<K> basis(n, 0);
  std::vector<index_t> keep;
  for (index_t j = 0; j < n; ++j) {
    double sj = j < static_cast<index_t>(s.sigma.size()) ? s.sigma[j] : 0.0;
    if (sj <= cut) keep.push_back(j);
  }
  basis = DenseMatrix<K>(n, static_cast<index_t>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (index_t i = 0; i < n; ++i) basis(i, static_cast<index_t>(c)) = conj_of(s.vh(keep[c], i));
  return basis;
}

/// Orthonormal basis of the subspace of k orthogonal to its intersection with
/// l, computed from the principal angles between the two spaces.  Columns of
/// k and l must each be orthonormal.
template <scalar K>
DenseMatrix<K> kernel_complement(const DenseMatrix<K>& k, const DenseMatrix<K>& l,
                                 double angle_tol = 1e-8) {
  if (k.cols() == 0) return k;
  if (l.cols() == 0) return k;
  la::Svd<K> s = la::svd(la::multiply(k, l, 'C', 'N'));
  index_t shared = 0;
  for (double sigma : s.sigma)
    if (sigma >= 1.0 - angle_tol) ++shared;
  // Left singular vectors beyond the intersection span its orthogonal
  // complement in the coordinates of k.
  if (shared == k.cols()) return DenseMatrix<K>(k.rows(), 0);
  DenseMatrix<K> coords = s.u.columns(shared, k.cols() - shared);
  return la::multiply(k, coords);
}

/// One retained eigenpair of the local pencil.  Eigenvectors are kept in
/// complex form; for real scalar types the retained subspace takes the real
/// and imaginary parts as separate columns.
struct EigenPair {
  std::complex<double> lambda;
  bool infinite = false;  // beta == 0 in the QZ parameterization
  std::vector<std::complex<double>> vec;

  double magnitude() const {
    return infinite ? std::numeric_limits<double>::infinity() : std::abs(lambda);
  }
};

struct GevpOptions {
  double tau = 0.3;
  index_t max_ev = 60;
  double kernel_tol = 1e-10;
  double residual_tol = 1e-8;
  double rank_tol = 1e-10;
};

template <scalar K>
struct LocalEigenSelection {
  index_t subdomain = 0;
  DenseMatrix<K> kernel;             // null space of a_tilde_ii
  DenseMatrix<K> kernel_weighted;    // null space of D a_ii D
  DenseMatrix<K> complement;         // part of kernel not shared with kernel_weighted
  std::vector<EigenPair> eigenpairs; // retained, by decreasing |lambda|
  DenseMatrix<K> z;                  // [complement | eigenvector columns], rank filtered
  bool solver_ok = true;
  std::string diagnostic;            // non-empty when the eigensolver gave up
};

namespace detail {

/// Hermitian split of kernel and range from one eigendecomposition.
template <scalar K>
void split_kernel_range_hermitian(const DenseMatrix<K>& m, double tol, DenseMatrix<K>* kernel,
                                  std::type_identity_t<DenseMatrix<K>*> range) {
  auto [w, v] = la::eig_hermitian(m);
  double amax = 0;
  for (double x : w) amax = std::max(amax, std::abs(x));
  const double cut = tol * amax;
  std::vector<index_t> null_cols, range_cols;
  for (index_t j = 0; j < m.cols(); ++j)
    (std::abs(w[j]) <= cut ? null_cols : range_cols).push_back(j);
  auto take = [&](const std::vector<index_t>& cols) {
    DenseMatrix<K> out(m.rows(), static_cast<index_t>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      std::ranges::copy(v.col(cols[c]), out.col(static_cast<index_t>(c)).begin());
    return out;
  };
  if (kernel) *kernel = take(null_cols);
  if (range) *range = take(range_cols);
}

/// General split via singular value decomposition: kernel from the right
/// singular vectors, range (column space) from the left ones.
template <scalar K>
void split_kernel_range_svd(const DenseMatrix<K>& m, double tol, DenseMatrix<K>* kernel,
                            std::type_identity_t<DenseMatrix<K>*> range) {
  la::Svd<K> s = la::svd(m);
  const index_t n = m.cols();
  const double cut = tol * (s.sigma.empty() ? 0.0 : s.sigma.front());
  index_t rank = 0;
  for (double sigma : s.sigma)
    if (sigma > cut) ++rank;
  if (kernel) {
    *kernel = DenseMatrix<K>(n, n - rank);
    for (index_t c = rank; c < n; ++c)
      for (index_t i = 0; i < n; ++i) (*kernel)(i, c - rank) = conj_of(s.vh(c, i));
  }
  if (range) *range = s.u.columns(0, rank);
}

template <scalar K>
DenseMatrix<std::complex<double>> to_complex(const DenseMatrix<K>& a) {
  DenseMatrix<std::complex<double>> out(a.rows(), a.cols());
  for (index_t j = 0; j < a.cols(); ++j)
    for (index_t i = 0; i < a.rows(); ++i) out(i, j) = a(i, j);
  return out;
}

}  // namespace detail

/// Solves the local generalized eigenproblem
///
///   Pi D a_ii D Pi u = lambda a_tilde_ii u,   Pi = projector onto range(a_tilde_ii),
///
/// reduced onto an orthonormal range basis Q: (Q^H D a D Q) y = lambda (Q^H a_tilde Q) y
/// with u = Q y.  The reduction is exact when a_tilde is Hermitian (the range
/// is then an invariant subspace); otherwise it is the Galerkin approximation
/// on range(a_tilde) and residuals are measured in the reduced space.
/// Retains |lambda| > 1/tau, capped at max_ev pairs, plus the part of
/// ker(a_tilde) outside ker(D a D).
template <scalar K>
LocalEigenSelection<K> solve_local_gevp(const DenseMatrix<K>& a_ii,
                                        const DenseMatrix<K>& a_tilde_ii,
                                        std::span<const double> weights,
                                        const GevpOptions& opt = {}) {
  using Z = std::complex<double>;
  const index_t n = a_ii.rows();
  if (a_ii.cols() != n || a_tilde_ii.rows() != n || a_tilde_ii.cols() != n)
    throw std::invalid_argument("solve_local_gevp: square blocks of equal size required");
  if (static_cast<index_t>(weights.size()) != n)
    throw std::invalid_argument("solve_local_gevp: weight vector size mismatch");
  if (!(opt.tau > 0)) throw std::invalid_argument("solve_local_gevp: tau must be positive");
  if (opt.max_ev < 0) throw std::invalid_argument("solve_local_gevp: max_ev must be >= 0");

  LocalEigenSelection<K> sel;
  DenseMatrix<K> dad(n, n);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < n; ++i) dad(i, j) = weights[i] * a_ii(i, j) * weights[j];

  const bool hermitian = is_hermitian_dense(a_ii) && is_hermitian_dense(a_tilde_ii);
  DenseMatrix<K> range;
  if (hermitian) {
    detail::split_kernel_range_hermitian(a_tilde_ii, opt.kernel_tol, &sel.kernel, &range);
    detail::split_kernel_range_hermitian(dad, opt.kernel_tol, &sel.kernel_weighted, nullptr);
  } else {
    detail::split_kernel_range_svd(a_tilde_ii, opt.kernel_tol, &sel.kernel, &range);
    detail::split_kernel_range_svd(dad, opt.kernel_tol, &sel.kernel_weighted, nullptr);
  }
  sel.complement = kernel_complement(sel.kernel, sel.kernel_weighted);

  struct Candidate {
    Z lambda;
    bool infinite;
    std::vector<Z> vec;  // lifted, unit norm
    double residual;
  };
  std::vector<Candidate> retained;

  const index_t k = range.cols();
  if (k > 0 && opt.max_ev > 0) {
    DenseMatrix<K> bq = la::multiply(range, la::multiply(dad, range), 'C', 'N');
    DenseMatrix<K> tq = la::multiply(range, la::multiply(a_tilde_ii, range), 'C', 'N');
    const double scale_b = dad.norm_frobenius();
    const double scale_t = a_tilde_ii.norm_frobenius();

    auto lift = [&](std::span<const Z> y) {
      std::vector<Z> u(n, Z{});
      for (index_t j = 0; j < k; ++j) {
        Z yj = y[j];
        auto c = range.col(j);
        for (index_t i = 0; i < n; ++i) u[i] += Z(c[i]) * yj;
      }
      double nrm = 0;
      for (const Z& x : u) nrm += std::norm(x);
      nrm = std::sqrt(nrm);
      if (nrm > 0)
        for (Z& x : u) x /= nrm;
      return u;
    };

    // Residual of the reduced pencil in homogeneous form
    // |beta * Bq y - alpha * Tq y| / (|beta| |Bq| + |alpha| |Tq|).
    auto reduced_residual = [&](const DenseMatrix<Z>& bqz, const DenseMatrix<Z>& tqz,
                                std::span<const Z> y, Z alpha, Z beta) {
      std::vector<Z> r(k, Z{});
      for (index_t j = 0; j < k; ++j)
        for (index_t i = 0; i < k; ++i) r[i] += (beta * bqz(i, j) - alpha * tqz(i, j)) * y[j];
      double num = 0, ynrm = 0;
      for (const Z& x : r) num += std::norm(x);
      for (const Z& x : y) ynrm += std::norm(x);
      double den = std::abs(beta) * scale_b + std::abs(alpha) * scale_t;
      if (den == 0 || ynrm == 0) return std::numeric_limits<double>::infinity();
      return std::sqrt(num) / (den * std::sqrt(ynrm));
    };

    bool solved = false;
    if (hermitian) {
      auto definite = la::eig_pencil_definite(bq, tq);
      if (definite) {
        solved = true;
        auto& [vals, vecs] = *definite;
        std::vector<index_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
          double ma = std::abs(vals[a]), mb = std::abs(vals[b]);
          return ma != mb ? ma > mb : a < b;
        });
        for (index_t pos : order) {
          if (static_cast<index_t>(retained.size()) >= opt.max_ev) break;
          if (!(std::abs(vals[pos]) > 1.0 / opt.tau)) break;
          std::vector<Z> y(k);
          auto c = vecs.col(pos);
          for (index_t i = 0; i < k; ++i) y[i] = Z(c[i]);
          Candidate cand{Z(vals[pos]), false, lift(y), 0.0};
          cand.residual =
              reduced_residual(detail::to_complex(bq), detail::to_complex(tq), y, Z(vals[pos]), Z(1));
          retained.push_back(std::move(cand));
        }
      }
    }
    if (!solved) {
      try {
        DenseMatrix<Z> bqz = detail::to_complex(bq);
        DenseMatrix<Z> tqz = detail::to_complex(tq);
        la::PencilEig eig = la::eig_pencil_general(bqz, tqz);
        // An eigenvalue is treated as infinite when beta vanishes relative to
        // the homogeneous pair (alpha, beta); a pair where both vanish is
        // indeterminate (singular pencil) and skipped.
        auto is_infinite = [&](index_t i) {
          return std::abs(eig.beta[i]) <= 1e-14 * (std::abs(eig.alpha[i]) + std::abs(eig.beta[i]));
        };
        auto indeterminate = [&](index_t i) {
          return std::abs(eig.alpha[i]) + std::abs(eig.beta[i]) == 0.0;
        };
        auto mag = [&](index_t i) {
          if (indeterminate(i)) return -1.0;
          if (is_infinite(i)) return std::numeric_limits<double>::infinity();
          return std::abs(eig.alpha[i] / eig.beta[i]);
        };
        std::vector<index_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
          double ma = mag(a), mb = mag(b);
          return ma != mb ? ma > mb : a < b;
        });
        for (index_t pos : order) {
          if (static_cast<index_t>(retained.size()) >= opt.max_ev) break;
          if (!(mag(pos) > 1.0 / opt.tau)) break;
          std::vector<Z> y(k);
          auto c = eig.vectors.col(pos);
          for (index_t i = 0; i < k; ++i) y[i] = c[i];
          bool infinite = is_infinite(pos);
          Z lambda = infinite ? Z(std::numeric_limits<double>::infinity(), 0)
                              : eig.alpha[pos] / eig.beta[pos];
          Candidate cand{lambda, infinite, lift(y), 0.0};
          cand.residual = reduced_residual(bqz, tqz, y, eig.alpha[pos], eig.beta[pos]);
          retained.push_back(std::move(cand));
        }
        solved = true;
      } catch (const std::exception& e) {
        sel.solver_ok = false;
        sel.diagnostic = e.what();
        retained.clear();
      }
    }
  }

  // Discard pairs whose reduced residual exceeds the tolerance; a large
  // residual means the solver did not deliver that pair.
  std::vector<Candidate> accepted;
  for (auto& c : retained) {
    if (c.residual <= opt.residual_tol) {
      accepted.push_back(std::move(c));
    } else {
      sel.solver_ok = false;
      sel.diagnostic = format_msg("eigenpair residual ", c.residual, " above tolerance");
    }
  }

  index_t eig_cols = 0;
  for (const auto& c : accepted) {
    bool complex_pair = !is_complex_v<K> && !c.infinite && std::abs(c.lambda.imag()) >
                            1e-14 * std::max(1.0, std::abs(c.lambda.real()));
    eig_cols += is_complex_v<K> ? 1 : (complex_pair ? 2 : 1);
  }
  DenseMatrix<K> eig_basis(n, eig_cols);
  index_t col = 0;
  for (const auto& c : accepted) {
    sel.eigenpairs.push_back({c.lambda, c.infinite, c.vec});
    if constexpr (is_complex_v<K>) {
      for (index_t i = 0; i < n; ++i) eig_basis(i, col) = c.vec[i];
      ++col;
    } else {
      bool complex_pair = !c.infinite && std::abs(c.lambda.imag()) >
                              1e-14 * std::max(1.0, std::abs(c.lambda.real()));
      for (index_t i = 0; i < n; ++i) eig_basis(i, col) = c.vec[i].real();
      ++col;
      if (complex_pair) {
        for (index_t i = 0; i < n; ++i) eig_basis(i, col) = c.vec[i].imag();
        ++col;
      }
    }
  }

  DenseMatrix<K> z = hcat(sel.complement, eig_basis);
  if (z.cols() > 0) {
    // Drop dependent columns (conjugate twins of real pencils, eigenvectors
    // falling back into the kernel complement) by pivoted-QR subset selection.
    la::QrPivots piv = la::independent_columns(z, opt.rank_tol);
    std::vector<index_t> keep(piv.pivots.begin(), piv.pivots.begin() + piv.rank);
    std::sort(keep.begin(), keep.end());
    sel.z = DenseMatrix<K>(n, static_cast<index_t>(keep.size()));
    for (std::size_t c2 = 0; c2 < keep.size(); ++c2)
      std::ranges::copy(z.col(keep[c2]), sel.z.col(static_cast<index_t>(c2)).begin());
  } else {
    sel.z = std::move(z);
  }
  return sel;
}

/// Upper bound (k_c + 1) * (2 + (2 k_c + 1) k_m / tau) on the spectral
/// condition number of the two-level additive method for Hermitian positive
/// definite diagonally dominant matrices.
inline double bound_rhs(index_t k_c, index_t k_m, double tau) {
  if (k_c < 1 || k_m < 1)
    throw std::invalid_argument("bound_rhs: counts must be at least 1");
  if (!(tau > 0)) throw std::invalid_argument("bound_rhs: tau must be positive");
  return (k_c + 1.0) * (2.0 + (2.0 * k_c + 1.0) * k_m / tau);
}

/// One column of the coarse basis R_0^H, stored sparse on its subdomain
/// support with entries sorted by global index.
template <scalar K>
struct CoarseColumn {
  index_t subdomain = 0;
  std::vector<index_t> idx;
  std::vector<K> val;
};

template <scalar K>
struct CoarseSpace {
  index_t n0 = 0;
  std::vector<CoarseColumn<K>> basis;
  DenseMatrix<K> a00;
  la::LuFactors<K> a00_lu;

  /// out = R_0 v (rows of R_0 are the conjugated basis columns).
  void restrict_vec(std::span<const K> v, std::span<K> out) const {
    for (index_t c = 0; c < n0; ++c) {
      K s{};
      const auto& col = basis[c];
      for (std::size_t k = 0; k < col.idx.size(); ++k) s += conj_of(col.val[k]) * v[col.idx[k]];
      out[c] = s;
    }
  }

  /// out += R_0^H y.
  void prolong_add(std::span<const K> y, std::span<K> out) const {
    for (index_t c = 0; c < n0; ++c) {
      const auto& col = basis[c];
      for (std::size_t k = 0; k < col.idx.size(); ++k) out[col.idx[k]] += col.val[k] * y[c];
    }
  }

  /// y := a00^{-1} y for nrhs column-major right-hand sides.
  void solve(K* y, index_t nrhs) const { la::lu_solve(a00_lu, y, nrhs); }
};

/// Assembles R_0^H = [R_1^T D_1 Z_1 | ... | R_N^T D_N Z_N], drops columns
/// whose weighted norm falls below drop_tol, removes rank deficiencies via
/// pivoted Cholesky of the Gram matrix, and factors a00 = R_0 a R_0^H.
/// Throws when a00 is singular (tau admitted a dependent coarse basis).
template <scalar K>
CoarseSpace<K> assemble_coarse(const SparseMatrix<K>& a, const OverlapLayout& layout,
                               const std::vector<LocalEigenSelection<K>>& selections,
                               double drop_tol = 1e-12, double rank_tol = 1e-8) {
  CoarseSpace<K> coarse;
  std::vector<CoarseColumn<K>> candidates;
  for (const auto& sel : selections) {
    const index_t i = sel.subdomain;
    const auto& idx = layout.overlapping[i];
    const auto& w = layout.weights[i];
    for (index_t j = 0; j < sel.z.cols(); ++j) {
      CoarseColumn<K> col;
      col.subdomain = i;
      auto zc = sel.z.col(j);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        K v = K(w[k]) * zc[k];
        if (v != K{}) {
          col.idx.push_back(idx[k]);
          col.val.push_back(v);
        }
      }
      double nrm = 0;
      for (const K& v : col.val) nrm += std::norm(v);
      if (std::sqrt(nrm) < drop_tol) continue;
      std::vector<index_t> perm(col.idx.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::sort(perm.begin(), perm.end(),
                [&](index_t x, index_t y) { return col.idx[x] < col.idx[y]; });
      CoarseColumn<K> sorted;
      sorted.subdomain = i;
      sorted.idx.reserve(perm.size());
      sorted.val.reserve(perm.size());
      for (index_t p : perm) {
        sorted.idx.push_back(col.idx[p]);
        sorted.val.push_back(col.val[p]);
      }
      candidates.push_back(std::move(sorted));
    }
  }

  auto sparse_dot = [](const CoarseColumn<K>& x, const CoarseColumn<K>& y) {
    K s{};
    std::size_t i = 0, j = 0;
    while (i < x.idx.size() && j < y.idx.size()) {
      if (x.idx[i] < y.idx[j])
        ++i;
      else if (x.idx[i] > y.idx[j])
        ++j;
      else
        s += conj_of(x.val[i++]) * y.val[j++];
    }
    return s;
  };

  const auto m = static_cast<index_t>(candidates.size());
  if (m > 0) {
    DenseMatrix<K> gram(m, m);
    for (index_t c = 0; c < m; ++c)
      for (index_t r = 0; r <= c; ++r) {
        K g = sparse_dot(candidates[r], candidates[c]);
        gram(r, c) = g;
        gram(c, r) = conj_of(g);
      }
    double max_diag = 0;
    for (index_t c = 0; c < m; ++c) max_diag = std::max(max_diag, real_part(gram(c, c)));
    // The pivot gate is the squared relative residual, floored at the factor
    // n * eps below which a Cholesky pivot is indistinguishable from rounding
    // noise (the same floor LAPACK applies when no tolerance is given).
    const double gate =
        std::max(rank_tol * rank_tol,
                 static_cast<double>(m) * std::numeric_limits<double>::epsilon()) *
        max_diag;
    auto [rank, order] = la::pivoted_cholesky_rank(std::move(gram), gate);
    std::vector<index_t> keep(order.begin(), order.begin() + rank);
    std::sort(keep.begin(), keep.end());
    coarse.basis.reserve(keep.size());
    for (index_t k : keep) coarse.basis.push_back(std::move(candidates[k]));
  }
  coarse.n0 = static_cast<index_t>(coarse.basis.size());

  coarse.a00 = DenseMatrix<K>(coarse.n0, coarse.n0);
  std::vector<K> dense_col(layout.n), image(layout.n);
  for (index_t c = 0; c < coarse.n0; ++c) {
    std::fill(dense_col.begin(), dense_col.end(), K{});
    const auto& col = coarse.basis[c];
    for (std::size_t k = 0; k < col.idx.size(); ++k) dense_col[col.idx[k]] = col.val[k];
    spmv(a, std::span<const K>(dense_col), std::span<K>(image));
    for (index_t r = 0; r < coarse.n0; ++r) {
      K s{};
      const auto& rc = coarse.basis[r];
      for (std::size_t k = 0; k < rc.idx.size(); ++k) s += conj_of(rc.val[k]) * image[rc.idx[k]];
      coarse.a00(r, c) = s;
    }
  }
  if (is_hermitian(a)) {
    for (index_t c = 0; c < coarse.n0; ++c)
      for (index_t r = 0; r < c; ++r) {
        K avg = (coarse.a00(r, c) + conj_of(coarse.a00(c, r))) / K(2);
        coarse.a00(r, c) = avg;
        coarse.a00(c, r) = conj_of(avg);
      }
  }

  try {
    coarse.a00_lu = la::lu_factor(coarse.a00, "coarse matrix");
  } catch (const std::runtime_error&) {
    throw std::runtime_error(
        "coarse matrix is singular; increase tau so fewer near-dependent vectors are retained");
  }
  if (coarse.n0 > 0 && coarse.a00_lu.pivot_ratio() < 1e-14)
    throw std::runtime_error(
        "coarse matrix is numerically singular; increase tau so fewer near-dependent vectors are "
        "retained");
  return coarse;
}

}  // namespace algdd

#endif  // ALGDD_COARSE_HPP
