// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_GMRES_HPP
#define ALGDD_GMRES_HPP

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "lapack.hpp"
#include "schwarz.hpp"
#include "sparse.hpp"

namespace algdd {

struct GmresOptions {
  index_t restart = 30;
  double rtol = 1e-8;
  index_t maxit = 100;  // total inner iterations across restart cycles
};

struct SolveReport {
  bool converged = false;
  bool breakdown = false;  // Arnoldi collapse without convergence, or NaN
  index_t iterations = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> history;  // |b - a x| / |b|; entry k after iteration k
};

namespace detail {

inline void givens(double a, double b, double* c, double* s, double* r) {
  double h = std::hypot(a, b);
  if (h == 0) {
    *c = 1;
    *s = 0;
    *r = 0;
    return;
  }
  *c = a / h;
  *s = b / h;
  *r = h;
}

/// Applies G = [[c, s], [-conj(s), c]] to the pair (h_i, h_ip1).
template <scalar K>
void apply_rotation(K* h_i, K* h_ip1, double c, const K& s) {
  K t = K(c) * (*h_i) + s * (*h_ip1);
  *h_ip1 = K(c) * (*h_ip1) - conj_of(s) * (*h_i);
  *h_i = t;
}

}  // namespace detail

/// Restarted GMRES with right preconditioning and a zero initial guess.
/// apply_a and apply_m map a const input span to an output span of the same
/// size.  Orthogonalization is modified Gram-Schmidt with one
/// reorthogonalization pass when cancellation is detected.  Convergence is
/// decided on the recomputed unpreconditioned residual |b - a x| / |b|.
template <scalar K, class OpA, class OpM>
  requires std::invocable<OpA&, std::span<const K>, std::span<K>> &&
           std::invocable<OpM&, std::span<const K>, std::span<K>>
std::pair<std::vector<K>, SolveReport> gmres(OpA&& apply_a, OpM&& apply_m, std::span<const K> b,
                                             const GmresOptions& opt = {}) {
  const auto n = static_cast<index_t>(b.size());
  if (opt.restart < 1) throw std::invalid_argument("gmres: restart must be at least 1");
  if (opt.maxit < 0) throw std::invalid_argument("gmres: maxit must be non-negative");
  if (!(opt.rtol >= 0)) throw std::invalid_argument("gmres: rtol must be non-negative");

  std::vector<K> x(n, K{});
  SolveReport report;
  double bnorm = 0;
  for (const K& v : b) bnorm += std::norm(v);
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0) {
    report.converged = true;
    report.final_residual = 0;
    report.history = {0.0};
    return {std::move(x), report};
  }
  report.history.push_back(1.0);

  const index_t m = opt.restart;
  std::vector<std::vector<K>> v(m + 1, std::vector<K>(n));
  DenseMatrix<K> h(m + 1, m);
  std::vector<double> cs(m);
  std::vector<K> sn(m);
  std::vector<K> g(m + 1);
  std::vector<K> w(n), z(n), r(n);

  auto true_residual = [&](const std::vector<K>& xv) {
    apply_a(std::span<const K>(xv), std::span<K>(r));
    double s = 0;
    for (index_t i = 0; i < n; ++i) s += std::norm(b[i] - r[i]);
    return std::sqrt(s) / bnorm;
  };

  // x += m^{-1} (v_{0..j-1} y) with y solved from the rotated Hessenberg.
  // Returns false, leaving x untouched, when the triangular factor is
  // singular.
  auto form_update = [&](index_t j) {
    if (j == 0) return true;
    for (index_t i = 0; i < j; ++i)
      if (std::abs(h(i, i)) == 0) return false;
    std::vector<K> y(g.begin(), g.begin() + j);
    for (index_t i = j - 1; i >= 0; --i) {
      for (index_t k2 = i + 1; k2 < j; ++k2) y[i] -= h(i, k2) * y[k2];
      y[i] /= h(i, i);
    }
    std::fill(w.begin(), w.end(), K{});
    for (index_t k2 = 0; k2 < j; ++k2)
      for (index_t i = 0; i < n; ++i) w[i] += v[k2][i] * y[k2];
    apply_m(std::span<const K>(w), std::span<K>(z));
    for (index_t i = 0; i < n; ++i) x[i] += z[i];
    return true;
  };

  bool stop = false;
  while (!stop && report.iterations < opt.maxit) {
    // Cycle start: r = b - a x.
    apply_a(std::span<const K>(x), std::span<K>(r));
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = 0;
    for (const K& t : r) beta += std::norm(t);
    beta = std::sqrt(beta);
    if (!std::isfinite(beta)) {
      report.breakdown = true;
      break;
    }
    if (beta / bnorm <= opt.rtol) {
      report.converged = true;
      break;
    }
    for (index_t i = 0; i < n; ++i) v[0][i] = r[i] / K(beta);
    std::fill(g.begin(), g.end(), K{});
    g[0] = K(beta);

    index_t j = 0;
    bool cycle_done = false;
    while (j < m && report.iterations < opt.maxit && !cycle_done) {
      apply_m(std::span<const K>(v[j]), std::span<K>(z));
      apply_a(std::span<const K>(z), std::span<K>(w));
      double pre_norm = 0;
      for (const K& t : w) pre_norm += std::norm(t);
      pre_norm = std::sqrt(pre_norm);
      for (index_t i = 0; i <= j; ++i) {
        K hij{};
        for (index_t k2 = 0; k2 < n; ++k2) hij += conj_of(v[i][k2]) * w[k2];
        h(i, j) = hij;
        for (index_t k2 = 0; k2 < n; ++k2) w[k2] -= hij * v[i][k2];
      }
      double post_norm = 0;
      for (const K& t : w) post_norm += std::norm(t);
      post_norm = std::sqrt(post_norm);
      if (post_norm < 0.70710678118654752 * pre_norm) {
        // Severe cancellation: run a second Gram-Schmidt sweep.
        for (index_t i = 0; i <= j; ++i) {
          K corr{};
          for (index_t k2 = 0; k2 < n; ++k2) corr += conj_of(v[i][k2]) * w[k2];
          h(i, j) += corr;
          for (index_t k2 = 0; k2 < n; ++k2) w[k2] -= corr * v[i][k2];
        }
        post_norm = 0;
        for (const K& t : w) post_norm += std::norm(t);
        post_norm = std::sqrt(post_norm);
      }
      h(j + 1, j) = K(post_norm);
      if (!std::isfinite(post_norm)) {
        report.breakdown = true;
        report.iterations += 1;
        report.history.push_back(std::numeric_limits<double>::quiet_NaN());
        cycle_done = true;
        stop = true;
        break;
      }

      const bool happy = post_norm <= 1e-14 * (pre_norm > 0 ? pre_norm : 1.0);
      if (!happy)
        for (index_t i = 0; i < n; ++i) v[j + 1][i] = w[i] / K(post_norm);

      for (index_t i = 0; i < j; ++i) detail::apply_rotation(&h(i, j), &h(i + 1, j), cs[i], sn[i]);
      // New rotation annihilating h(j+1, j); for complex scalars the row is
      // first rotated to make the subdiagonal real.
      double r_out;
      if constexpr (is_complex_v<K>) {
        // G = [[c, s], [-conj(s), c]] with real c = |h_jj| / denom and
        // s = conj(h_{j+1,j}) * phase / denom, phase = h_jj / |h_jj|, which
        // zeroes the subdiagonal and leaves r = phase * denom on the diagonal.
        double hn = std::abs(h(j, j));
        double hs = std::abs(h(j + 1, j));
        double denom = std::hypot(hn, hs);
        if (denom == 0) {
          cs[j] = 1;
          sn[j] = K{};
          r_out = 0;
        } else {
          K phase = hn == 0 ? K(1) : h(j, j) / K(hn);
          cs[j] = hn / denom;
          sn[j] = conj_of(h(j + 1, j)) * phase / K(denom);
          r_out = denom;
          h(j, j) = phase * K(denom);
        }
        h(j + 1, j) = K{};
        K gj = g[j];
        g[j] = K(cs[j]) * gj;
        g[j + 1] = -conj_of(sn[j]) * gj;
      } else {
        detail::givens(h(j, j), h(j + 1, j), &cs[j], &sn[j], &r_out);
        h(j, j) = r_out;
        h(j + 1, j) = 0;
        double gj = g[j];
        g[j] = cs[j] * gj;
        g[j + 1] = -sn[j] * gj;
      }

      report.iterations += 1;
      double estimate = std::abs(g[j + 1]) / bnorm;
      report.history.push_back(estimate);
      ++j;
      if (happy || estimate <= opt.rtol) cycle_done = true;
      if (happy && estimate > opt.rtol) {
        // The Krylov space closed without reaching the tolerance.
        report.breakdown = true;
        stop = true;
      }
    }
    if (!form_update(j)) {
      report.breakdown = true;  // singular Hessenberg factor
      break;
    }
    double rel = true_residual(x);
    if (!std::isfinite(rel)) {
      report.breakdown = true;
      break;
    }
    if (rel <= opt.rtol) {
      report.converged = true;
      report.breakdown = false;
      report.history.back() = rel;
      break;
    }
    if (report.breakdown) break;
  }
  if (!std::isfinite(report.final_residual)) report.final_residual = true_residual(x);
  if (report.converged) report.history.back() = report.final_residual;
  return {std::move(x), report};
}

/// gmres on a sparse matrix with a Schwarz preconditioner.
template <scalar K>
std::pair<std::vector<K>, SolveReport> gmres(const SparseMatrix<K>& a,
                                             const SchwarzPreconditioner<K>& m,
                                             std::span<const K> b, const GmresOptions& opt = {}) {
  return gmres<K>([&](std::span<const K> in, std::span<K> out) { spmv(a, in, out); },
                  [&](std::span<const K> in, std::span<K> out) { m.apply(in, out); }, b, opt);
}

/// gmres without preconditioning.
template <scalar K>
std::pair<std::vector<K>, SolveReport> gmres(const SparseMatrix<K>& a, std::span<const K> b,
                                             const GmresOptions& opt = {}) {
  return gmres<K>([&](std::span<const K> in, std::span<K> out) { spmv(a, in, out); },
                  [](std::span<const K> in, std::span<K> out) {
                    std::copy(in.begin(), in.end(), out.begin());
                  },
                  b, opt);
}

/// Spectral condition estimate of a densified operator: the ratio of extreme
/// singular values.  Refuses sizes whose dense image would be unreasonable.
template <scalar K, class Op>
double estimate_condition(Op&& op, index_t n, index_t max_n = 4096) {
  if (n > max_n)
    throw std::invalid_argument(
        format_msg("estimate_condition: n = ", n, " exceeds the dense limit ", max_n));
  DenseMatrix<K> dense(n, n);
  std::vector<K> e(n, K{});
  for (index_t j = 0; j < n; ++j) {
    e[j] = K(1);
    op(std::span<const K>(e), dense.col(j));
    e[j] = K{};
  }
  la::Svd<K> s = la::svd(std::move(dense));
  if (s.sigma.empty()) return 1;
  double smin = s.sigma.back(), smax = s.sigma.front();
  if (smin == 0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

/// Condition estimate of the preconditioned operator m^{-1} a.  When both the
/// matrix and the preconditioner are Hermitian positive definite the spectrum
/// of m^{-1} a is real and the definite pencil path is used; otherwise the
/// operator is densified and measured by singular values.
template <scalar K>
double estimate_condition(const SchwarzPreconditioner<K>& m, const SparseMatrix<K>& a,
                          bool hermitian_definite, index_t max_n = 4096) {
  const index_t n = a.rows();
  if (n > max_n)
    throw std::invalid_argument(
        format_msg("estimate_condition: n = ", n, " exceeds the dense limit ", max_n));
  if (!hermitian_definite) {
    std::vector<K> t(n);
    return estimate_condition<K>(
        [&](std::span<const K> in, std::span<K> out) {
          spmv(a, in, std::span<K>(t));
          m.apply(std::span<const K>(t), out);
        },
        n, max_n);
  }
  DenseMatrix<K> p = m.apply_block(DenseMatrix<K>::identity(n));
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < j; ++i) {
      K avg = (p(i, j) + conj_of(p(j, i))) / K(2);
      p(i, j) = avg;
      p(j, i) = conj_of(avg);
    }
  std::vector<double> w = la::eigvals_product_hpd(to_dense(a), std::move(p));
  if (w.empty()) return 1;
  double lo = w.front(), hi = w.back();
  for (double x : w) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo <= 0)
    throw std::runtime_error("estimate_condition: preconditioned operator is not definite");
  return hi / lo;
}

}  // namespace algdd

#endif  // ALGDD_GMRES_HPP
