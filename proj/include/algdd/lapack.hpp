// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_LAPACK_HPP
#define ALGDD_LAPACK_HPP

#include <algorithm>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "dense.hpp"

// Reference Fortran prototypes (LP64 interface).  std::complex<double> is
// layout-compatible with the Fortran double complex expected by the symbols.
extern "C" {
void dgemm_(const char*, const char*, const int*, const int*, const int*, const double*,
            const double*, const int*, const double*, const int*, const double*, double*,
            const int*);
void zgemm_(const char*, const char*, const int*, const int*, const int*,
            const std::complex<double>*, const std::complex<double>*, const int*,
            const std::complex<double>*, const int*, const std::complex<double>*,
            std::complex<double>*, const int*);
void dgetrf_(const int*, const int*, double*, const int*, int*, int*);
void zgetrf_(const int*, const int*, std::complex<double>*, const int*, int*, int*);
void dgetrs_(const char*, const int*, const int*, const double*, const int*, const int*, double*,
             const int*, int*);
void zgetrs_(const char*, const int*, const int*, const std::complex<double>*, const int*,
             const int*, std::complex<double>*, const int*, int*);
void dsyevd_(const char*, const char*, const int*, double*, const int*, double*, double*,
             const int*, int*, const int*, int*);
void zheevd_(const char*, const char*, const int*, std::complex<double>*, const int*, double*,
             std::complex<double>*, const int*, double*, const int*, int*, const int*, int*);
void dgesdd_(const char*, const int*, const int*, double*, const int*, double*, double*,
             const int*, double*, const int*, double*, const int*, int*, int*);
void zgesdd_(const char*, const int*, const int*, std::complex<double>*, const int*, double*,
             std::complex<double>*, const int*, std::complex<double>*, const int*,
             std::complex<double>*, const int*, double*, int*, int*);
void zggev_(const char*, const char*, const int*, std::complex<double>*, const int*,
            std::complex<double>*, const int*, std::complex<double>*, std::complex<double>*,
            std::complex<double>*, const int*, std::complex<double>*, const int*,
            std::complex<double>*, const int*, double*, int*);
void dsygvd_(const int*, const char*, const char*, const int*, double*, const int*, double*,
             const int*, double*, double*, const int*, int*, const int*, int*);
void zhegvd_(const int*, const char*, const char*, const int*, std::complex<double>*, const int*,
             std::complex<double>*, const int*, double*, std::complex<double>*, const int*,
             double*, const int*, int*, const int*, int*);
void dpstrf_(const char*, const int*, double*, const int*, int*, int*, const double*, double*,
             int*);
void zpstrf_(const char*, const int*, std::complex<double>*, const int*, int*, int*,
             const double*, double*, int*);
void dgeqp3_(const int*, const int*, double*, const int*, int*, double*, double*, const int*,
             int*);
void zgeqp3_(const int*, const int*, std::complex<double>*, const int*, int*,
             std::complex<double>*, std::complex<double>*, const int*, double*, int*);
void dorgqr_(const int*, const int*, const int*, double*, const int*, const double*, double*,
             const int*, int*);
void zungqr_(const int*, const int*, const int*, std::complex<double>*, const int*,
             const std::complex<double>*, std::complex<double>*, const int*, int*);
}

namespace algdd::la {

inline void check_info(int info, const char* routine) {
  if (info < 0)
    throw std::logic_error(format_msg(routine, ": illegal argument ", -info));
  if (info > 0)
    throw std::runtime_error(format_msg(routine, ": failed with info ", info));
}

/// c = op(a) * op(b); op is 'N', 'T' or 'C'.
template <scalar K>
DenseMatrix<K> multiply(const DenseMatrix<K>& a, const DenseMatrix<K>& b, char opa = 'N',
                        char opb = 'N') {
  const int m = opa == 'N' ? a.rows() : a.cols();
  const int k = opa == 'N' ? a.cols() : a.rows();
  const int kb = opb == 'N' ? b.rows() : b.cols();
  const int n = opb == 'N' ? b.cols() : b.rows();
  if (k != kb) throw std::invalid_argument("multiply: inner dimension mismatch");
  DenseMatrix<K> c(m, n);
  if (m == 0 || n == 0) return c;
  const K one(1), zero(0);
  const int lda = std::max(1, static_cast<int>(a.rows()));
  const int ldb = std::max(1, static_cast<int>(b.rows()));
  const int ldc = std::max(1, m);
  if (k == 0) return c;
  if constexpr (is_complex_v<K>)
    zgemm_(&opa, &opb, &m, &n, &k, &one, a.data(), &lda, b.data(), &ldb, &zero, c.data(), &ldc);
  else
    dgemm_(&opa, &opb, &m, &n, &k, &one, a.data(), &lda, b.data(), &ldb, &zero, c.data(), &ldc);
  return c;
}

/// LU factorization with partial pivoting.
template <scalar K>
struct LuFactors {
  DenseMatrix<K> lu;
  std::vector<int> ipiv;

  index_t order() const { return lu.rows(); }

  /// Relative size of the smallest pivot; 0 for an exactly singular factor.
  double pivot_ratio() const {
    const index_t n = lu.rows();
    if (n == 0) return 1;
    double lo = std::abs(lu(0, 0)), hi = lo;
    for (index_t i = 1; i < n; ++i) {
      double p = std::abs(lu(i, i));
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    return hi == 0 ? 0 : lo / hi;
  }
};

/// Factors a in place; throws std::runtime_error on an exactly singular matrix.
template <scalar K>
LuFactors<K> lu_factor(DenseMatrix<K> a, const char* what = "matrix") {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu_factor: matrix not square");
  const int n = a.rows();
  LuFactors<K> f{std::move(a), std::vector<int>(std::max(n, 1))};
  if (n == 0) return f;
  int info = 0;
  if constexpr (is_complex_v<K>)
    zgetrf_(&n, &n, f.lu.data(), &n, f.ipiv.data(), &info);
  else
    dgetrf_(&n, &n, f.lu.data(), &n, f.ipiv.data(), &info);
  if (info > 0) throw std::runtime_error(format_msg(what, " is singular (zero pivot)"));
  check_info(info, "getrf");
  return f;
}

/// Solves in place for nrhs right-hand sides stored column-major in b.
template <scalar K>
void lu_solve(const LuFactors<K>& f, K* b, index_t nrhs) {
  const int n = f.lu.rows();
  if (n == 0 || nrhs == 0) return;
  const char trans = 'N';
  const int m = nrhs;
  int info = 0;
  if constexpr (is_complex_v<K>)
    zgetrs_(&trans, &n, &m, f.lu.data(), &n, f.ipiv.data(), b, &n, &info);
  else
    dgetrs_(&trans, &n, &m, f.lu.data(), &n, f.ipiv.data(), b, &n, &info);
  check_info(info, "getrs");
}

/// Full eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors returned as columns.
template <scalar K>
std::pair<std::vector<double>, DenseMatrix<K>> eig_hermitian(DenseMatrix<K> a) {
  const int n = a.rows();
  std::vector<double> w(std::max(n, 1));
  if (n == 0) return {std::vector<double>{}, std::move(a)};
  const char jobz = 'V', uplo = 'L';
  int info = 0;
  int lwork = -1, liwork = -1;
  int iwork_query = 0;
  if constexpr (is_complex_v<K>) {
    int lrwork = -1;
    K work_query;
    double rwork_query = 0;
    zheevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), &work_query, &lwork, &rwork_query, &lrwork,
            &iwork_query, &liwork, &info);
    check_info(info, "heevd");
    lwork = static_cast<int>(work_query.real());
    int lr = static_cast<int>(rwork_query);
    liwork = iwork_query;
    std::vector<K> work(lwork);
    std::vector<double> rwork(lr);
    std::vector<int> iwork(liwork);
    zheevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), work.data(), &lwork, rwork.data(), &lr,
            iwork.data(), &liwork, &info);
  } else {
    double work_query = 0;
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), &work_query, &lwork, &iwork_query, &liwork,
            &info);
    check_info(info, "syevd");
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), work.data(), &lwork, iwork.data(), &liwork,
            &info);
  }
  check_info(info, "heevd");
  return {std::move(w), std::move(a)};
}

template <scalar K>
struct Svd {
  std::vector<double> sigma;  // descending
  DenseMatrix<K> u;           // m x m
  DenseMatrix<K> vh;          // n x n
};

/// Full singular value decomposition a = u * diag(sigma) * vh.
template <scalar K>
Svd<K> svd(DenseMatrix<K> a) {
  const int m = a.rows(), n = a.cols();
  Svd<K> out;
  out.sigma.assign(std::max(std::min(m, n), 1), 0.0);
  out.u = DenseMatrix<K>(m, m);
  out.vh = DenseMatrix<K>(n, n);
  if (m == 0 || n == 0) {
    out.sigma.clear();
    for (index_t i = 0; i < m; ++i) out.u(i, i) = K(1);
    for (index_t i = 0; i < n; ++i) out.vh(i, i) = K(1);
    return out;
  }
  const char jobz = 'A';
  const int ldu = std::max(1, m), ldvt = std::max(1, n);
  int info = 0, lwork = -1;
  std::vector<int> iwork(8 * std::min(m, n));
  if constexpr (is_complex_v<K>) {
    std::size_t mn = std::min(m, n), mx = std::max(m, n);
    std::vector<double> rwork(std::max<std::size_t>(1, mn * std::max(5 * mn + 7, 2 * mx + 2 * mn + 1)));
    K work_query;
    zgesdd_(&jobz, &m, &n, a.data(), &m, out.sigma.data(), out.u.data(), &ldu, out.vh.data(),
            &ldvt, &work_query, &lwork, rwork.data(), iwork.data(), &info);
    check_info(info, "gesdd");
    lwork = static_cast<int>(work_query.real());
    std::vector<K> work(lwork);
    zgesdd_(&jobz, &m, &n, a.data(), &m, out.sigma.data(), out.u.data(), &ldu, out.vh.data(),
            &ldvt, work.data(), &lwork, rwork.data(), iwork.data(), &info);
  } else {
    double work_query = 0;
    dgesdd_(&jobz, &m, &n, a.data(), &m, out.sigma.data(), out.u.data(), &ldu, out.vh.data(),
            &ldvt, &work_query, &lwork, iwork.data(), &info);
    check_info(info, "gesdd");
    lwork = static_cast<int>(work_query);
    std::vector<double> work(lwork);
    dgesdd_(&jobz, &m, &n, a.data(), &m, out.sigma.data(), out.u.data(), &ldu, out.vh.data(),
            &ldvt, work.data(), &lwork, iwork.data(), &info);
  }
  check_info(info, "gesdd");
  if (static_cast<int>(out.sigma.size()) > std::min(m, n)) out.sigma.resize(std::min(m, n));
  return out;
}

/// Hermitian-definite pencil b*y = lambda*t*y with t positive definite
/// (itype 1).  Returns nullopt when the Cholesky factorization of t fails,
/// so callers can fall back to the general QZ path.
template <scalar K>
std::optional<std::pair<std::vector<double>, DenseMatrix<K>>> eig_pencil_definite(
    DenseMatrix<K> b, DenseMatrix<K> t) {
  const int n = b.rows();
  std::vector<double> w(std::max(n, 1));
  if (n == 0) return std::make_pair(std::vector<double>{}, std::move(b));
  const int itype = 1;
  const char jobz = 'V', uplo = 'L';
  int info = 0, lwork = -1, liwork = -1, iwork_query = 0;
  if constexpr (is_complex_v<K>) {
    int lrwork = -1;
    K work_query;
    double rwork_query = 0;
    zhegvd_(&itype, &jobz, &uplo, &n, b.data(), &n, t.data(), &n, w.data(), &work_query, &lwork,
            &rwork_query, &lrwork, &iwork_query, &liwork, &info);
    check_info(info, "hegvd");
    lwork = static_cast<int>(work_query.real());
    int lr = static_cast<int>(rwork_query);
    liwork = iwork_query;
    std::vector<K> work(lwork);
    std::vector<double> rwork(lr);
    std::vector<int> iwork(liwork);
    zhegvd_(&itype, &jobz, &uplo, &n, b.data(), &n, t.data(), &n, w.data(), work.data(), &lwork,
            rwork.data(), &lr, iwork.data(), &liwork, &info);
  } else {
    double work_query = 0;
    dsygvd_(&itype, &jobz, &uplo, &n, b.data(), &n, t.data(), &n, w.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    check_info(info, "sygvd");
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dsygvd_(&itype, &jobz, &uplo, &n, b.data(), &n, t.data(), &n, w.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
  }
  if (info > n) return std::nullopt;  // t not positive definite
  check_info(info, "hegvd");
  return std::make_pair(std::move(w), std::move(b));
}

/// Eigenvalues of p*a for Hermitian a and positive definite p (itype 3 of the
/// definite generalized solver); both matrices are destroyed.
template <scalar K>
std::vector<double> eigvals_product_hpd(DenseMatrix<K> a, DenseMatrix<K> p) {
  const int n = a.rows();
  std::vector<double> w(std::max(n, 1));
  if (n == 0) return {};
  const int itype = 3;
  const char jobz = 'N', uplo = 'L';
  int info = 0, lwork = -1, liwork = -1, iwork_query = 0;
  if constexpr (is_complex_v<K>) {
    int lrwork = -1;
    K work_query;
    double rwork_query = 0;
    zhegvd_(&itype, &jobz, &uplo, &n, a.data(), &n, p.data(), &n, w.data(), &work_query, &lwork,
            &rwork_query, &lrwork, &iwork_query, &liwork, &info);
    check_info(info, "hegvd");
    lwork = static_cast<int>(work_query.real());
    int lr = static_cast<int>(rwork_query);
    liwork = iwork_query;
    std::vector<K> work(lwork);
    std::vector<double> rwork(std::max(lr, 1));
    std::vector<int> iwork(std::max(liwork, 1));
    zhegvd_(&itype, &jobz, &uplo, &n, a.data(), &n, p.data(), &n, w.data(), work.data(), &lwork,
            rwork.data(), &lr, iwork.data(), &liwork, &info);
  } else {
    double work_query = 0;
    dsygvd_(&itype, &jobz, &uplo, &n, a.data(), &n, p.data(), &n, w.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    check_info(info, "sygvd");
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dsygvd_(&itype, &jobz, &uplo, &n, a.data(), &n, p.data(), &n, w.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
  }
  if (info > n)
    throw std::runtime_error("eigvals_product_hpd: second operand not positive definite");
  check_info(info, "hegvd");
  w.resize(n);
  return w;
}

struct PencilEig {
  std::vector<std::complex<double>> alpha;
  std::vector<std::complex<double>> beta;
  DenseMatrix<std::complex<double>> vectors;  // right eigenvectors, one per column
};

/// General (QZ) solve of b*y = lambda*t*y; eigenvalue i is alpha[i]/beta[i],
/// with beta[i] == 0 encoding an infinite eigenvalue.
inline PencilEig eig_pencil_general(DenseMatrix<std::complex<double>> b,
                                    DenseMatrix<std::complex<double>> t) {
  using Z = std::complex<double>;
  const int n = b.rows();
  PencilEig out;
  out.alpha.resize(n);
  out.beta.resize(n);
  out.vectors = DenseMatrix<Z>(n, n);
  if (n == 0) return out;
  const char jobvl = 'N', jobvr = 'V';
  int info = 0, lwork = -1;
  std::vector<double> rwork(8 * n);
  Z work_query;
  Z* vl = nullptr;
  const int ldvl = 1;
  zggev_(&jobvl, &jobvr, &n, b.data(), &n, t.data(), &n, out.alpha.data(), out.beta.data(), vl,
         &ldvl, out.vectors.data(), &n, &work_query, &lwork, rwork.data(), &info);
  check_info(info, "ggev");
  lwork = static_cast<int>(work_query.real());
  std::vector<Z> work(lwork);
  zggev_(&jobvl, &jobvr, &n, b.data(), &n, t.data(), &n, out.alpha.data(), out.beta.data(), vl,
         &ldvl, out.vectors.data(), &n, work.data(), &lwork, rwork.data(), &info);
  check_info(info, "ggev");
  return out;
}

/// Rank-revealing pivoted Cholesky of a Hermitian PSD matrix.  Returns the
/// numerical rank and the pivot order (0-based).  tol is an absolute
/// threshold on the remaining diagonal.
template <scalar K>
std::pair<index_t, std::vector<index_t>> pivoted_cholesky_rank(DenseMatrix<K> g, double tol) {
  const int n = g.rows();
  if (n == 0) return {0, {}};
  const char uplo = 'L';
  std::vector<int> piv(n);
  int rank = 0, info = 0;
  std::vector<double> work(2 * n);
  if constexpr (is_complex_v<K>)
    zpstrf_(&uplo, &n, g.data(), &n, piv.data(), &rank, &tol, work.data(), &info);
  else
    dpstrf_(&uplo, &n, g.data(), &n, piv.data(), &rank, &tol, work.data(), &info);
  if (info < 0) check_info(info, "pstrf");
  std::vector<index_t> order(n);
  for (int i = 0; i < n; ++i) order[i] = piv[i] - 1;
  return {static_cast<index_t>(rank), std::move(order)};
}

struct QrPivots {
  index_t rank = 0;
  std::vector<index_t> pivots;  // column pivot order, 0-based
};

/// Column-pivoted QR based subset selection: numerical rank at relative
/// tolerance rtol and the pivot order by decreasing |r_jj|.
template <scalar K>
QrPivots independent_columns(DenseMatrix<K> a, double rtol) {
  const int m = a.rows(), n = a.cols();
  QrPivots out;
  if (n == 0) return out;
  std::vector<int> jpvt(n, 0);
  std::vector<K> tau(std::min(m, n));
  int info = 0, lwork = -1;
  if (m == 0) return out;
  if constexpr (is_complex_v<K>) {
    std::vector<double> rwork(2 * n);
    K work_query;
    zgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), &work_query, &lwork, rwork.data(),
            &info);
    check_info(info, "geqp3");
    lwork = static_cast<int>(work_query.real());
    std::vector<K> work(lwork);
    zgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), work.data(), &lwork, rwork.data(),
            &info);
  } else {
    double work_query = 0;
    dgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), &work_query, &lwork, &info);
    check_info(info, "geqp3");
    lwork = static_cast<int>(work_query);
    std::vector<double> work(lwork);
    dgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), work.data(), &lwork, &info);
  }
  check_info(info, "geqp3");
  const int kmax = std::min(m, n);
  double r00 = std::abs(a(0, 0));
  index_t rank = 0;
  for (int j = 0; j < kmax; ++j)
    if (std::abs(a(j, j)) > rtol * r00) ++rank;
  out.rank = r00 == 0 ? 0 : rank;
  out.pivots.resize(n);
  for (int j = 0; j < n; ++j) out.pivots[j] = jpvt[j] - 1;
  return out;
}

/// Orthonormal basis of the column span at relative tolerance rtol.
template <scalar K>
DenseMatrix<K> orth_columns(DenseMatrix<K> a, double rtol = 1e-12) {
  const int m = a.rows(), n = a.cols();
  if (n == 0 || m == 0) return DenseMatrix<K>(m, 0);
  std::vector<int> jpvt(n, 0);
  std::vector<K> tau(std::min(m, n));
  int info = 0, lwork = -1;
  if constexpr (is_complex_v<K>) {
    std::vector<double> rwork(2 * n);
    K work_query;
    zgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), &work_query, &lwork, rwork.data(),
            &info);
    check_info(info, "geqp3");
    lwork = static_cast<int>(work_query.real());
    std::vector<K> work(lwork);
    zgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), work.data(), &lwork, rwork.data(),
            &info);
  } else {
    double work_query = 0;
    dgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), &work_query, &lwork, &info);
    check_info(info, "geqp3");
    lwork = static_cast<int>(work_query);
    std::vector<double> work(lwork);
    dgeqp3_(&m, &n, a.data(), &m, jpvt.data(), tau.data(), work.data(), &lwork, &info);
  }
  check_info(info, "geqp3");
  const int kmax = std::min(m, n);
  double r00 = std::abs(a(0, 0));
  int rank = 0;
  for (int j = 0; j < kmax; ++j)
    if (r00 > 0 && std::abs(a(j, j)) > rtol * r00) ++rank;
  if (rank == 0) return DenseMatrix<K>(m, 0);
  lwork = -1;
  info = 0;
  if constexpr (is_complex_v<K>) {
    K work_query;
    zungqr_(&m, &rank, &rank, a.data(), &m, tau.data(), &work_query, &lwork, &info);
    check_info(info, "ungqr");
    lwork = static_cast<int>(work_query.real());
    std::vector<K> work(lwork);
    zungqr_(&m, &rank, &rank, a.data(), &m, tau.data(), work.data(), &lwork, &info);
  } else {
    double work_query = 0;
    dorgqr_(&m, &rank, &rank, a.data(), &m, tau.data(), &work_query, &lwork, &info);
    check_info(info, "orgqr");
    lwork = static_cast<int>(work_query);
    std::vector<double> work(lwork);
    dorgqr_(&m, &rank, &rank, a.data(), &m, tau.data(), work.data(), &lwork, &info);
  }
  check_info(info, "orgqr");
  return a.columns(0, rank);
}

}  // namespace algdd::la

#endif  // ALGDD_LAPACK_HPP
