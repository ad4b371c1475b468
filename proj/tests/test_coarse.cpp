// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <vector>

#include <algdd/coarse.hpp>
#include <algdd/problems.hpp>
#include <algdd/splitting.hpp>

#include "support/generators.hpp"
#include "support/oracle.hpp"

using algdd::DenseMatrix;
using algdd::GevpOptions;
using algdd::index_t;
using algdd::OverlapLayout;
using Catch::Approx;
using zdouble = std::complex<double>;

namespace {

template <class K>
struct LocalProblem {
  DenseMatrix<K> a_ii;
  DenseMatrix<K> a_tilde_ii;
  std::vector<double> weights;
};

// Dense local blocks + partition-of-unity weights of one subdomain.
template <class K>
LocalProblem<K> local_blocks(const algdd::SparseMatrix<K>& a, const OverlapLayout& layout,
                             index_t i) {
  auto s = algdd::build_local_splitting(a, layout, i);
  return {algdd::to_dense(s.a_ii), algdd::to_dense(s.a_tilde_ii), layout.weights[i]};
}

template <class K>
oracle::EMat<K> weighted(const DenseMatrix<K>& a, const std::vector<double>& w) {
  oracle::EMat<K> m = oracle::to_eigen(a);
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < m.rows(); ++i) m(i, j) *= K(w[i] * w[j]);
  return m;
}

}  // namespace

TEST_CASE("kernel_basis finds the null space of a rank-deficient matrix", "[coarse]") {
  algdd::Rng rng(71);
  // 6x6 gram matrix of 3 independent columns: rank 3, kernel dimension 3.
  DenseMatrix<double> c(6, 3);
  for (index_t j = 0; j < 3; ++j)
    for (index_t i = 0; i < 6; ++i) c(i, j) = rng.symmetric();
  auto g = algdd::la::multiply(c, c, 'N', 'C');
  auto k = algdd::kernel_basis(g);
  REQUIRE(k.cols() == 3);
  auto ek = oracle::to_eigen(k);
  REQUIRE((oracle::to_eigen(g) * ek).norm() <= 1e-10 * oracle::to_eigen(g).norm());
  REQUIRE((ek.adjoint() * ek - oracle::EMatd::Identity(3, 3)).norm() <= 1e-12);

  REQUIRE(algdd::kernel_basis(DenseMatrix<double>::identity(4)).cols() == 0);
  DenseMatrix<double> zero(3, 3);
  REQUIRE(algdd::kernel_basis(zero).cols() == 3);
}

TEST_CASE("kernel_complement splits shared from private directions", "[coarse]") {
  DenseMatrix<double> k(4, 2);
  k(0, 0) = 1.0;  // e0
  k(1, 1) = 1.0;  // e1
  DenseMatrix<double> l(4, 1);
  l(0, 0) = 1.0;  // e0 shared
  auto c = algdd::kernel_complement(k, l);
  REQUIRE(c.cols() == 1);
  REQUIRE(std::abs(std::abs(c(1, 0)) - 1.0) <= 1e-12);
  REQUIRE(std::abs(c(0, 0)) <= 1e-12);

  // l == k: everything is shared.
  REQUIRE(algdd::kernel_complement(k, k).cols() == 0);
  // empty l: nothing is shared.
  DenseMatrix<double> none(4, 0);
  REQUIRE(algdd::kernel_complement(k, none).cols() == 2);
}

TEST_CASE("path-graph eigenproblem reproduces frozen values, one-sided boundary", "[gevp]") {
  // Order-16 path matrix split in two; first subdomain sees vertices 0..8
  // with one lumped boundary vertex.  The largest pencil eigenvalue is
  // exactly 9 and the rest of the spectrum is {1 (x7), 0}.
  auto a = algdd::generate_laplacian1d(16);
  auto g = algdd::build_graph(a);
  std::vector<std::vector<index_t>> parts = {{0, 1, 2, 3, 4, 5, 6, 7},
                                             {8, 9, 10, 11, 12, 13, 14, 15}};
  OverlapLayout layout = algdd::extend_overlap(g, parts, algdd::PouMode::boolean_interior);
  auto lp = local_blocks(a, layout, 0);

  GevpOptions opt;
  opt.tau = 0.3;
  auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
  REQUIRE(sel.solver_ok);
  REQUIRE(sel.kernel.cols() == 0);      // lumped block is nonsingular here
  REQUIRE(sel.complement.cols() == 0);
  REQUIRE(sel.eigenpairs.size() == 1);  // only 9 > 1/0.3
  REQUIRE_FALSE(sel.eigenpairs[0].infinite);
  REQUIRE(sel.eigenpairs[0].lambda.real() == Approx(9.0).epsilon(1e-9));
  REQUIRE(std::abs(sel.eigenpairs[0].lambda.imag()) <= 1e-9);
  REQUIRE(sel.z.cols() == 1);
}

TEST_CASE("path-graph eigenproblem reproduces frozen values, floating subdomain", "[gevp]") {
  // Middle subdomain of a path split in three: both ends are lumped, so the
  // local matrix gains the constant vector as kernel.  Frozen reduced
  // spectrum (descending): 3, 1.2187326963070388, 1, 1, 0.0669815894..., 0.
  auto a = algdd::generate_laplacian1d(16);
  auto g = algdd::build_graph(a);
  std::vector<std::vector<index_t>> parts = {
      {0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}, {11, 12, 13, 14, 15}};
  OverlapLayout layout = algdd::extend_overlap(g, parts, algdd::PouMode::boolean_interior);
  auto lp = local_blocks(a, layout, 1);

  GevpOptions opt;
  opt.tau = 0.3;  // 1/tau = 3.33: no eigenvalue qualifies
  auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
  REQUIRE(sel.solver_ok);
  REQUIRE(sel.kernel.cols() == 1);           // constants
  REQUIRE(sel.kernel_weighted.cols() == 2);  // the two zero-weight boundary axes
  REQUIRE(sel.complement.cols() == 1);       // constants are not boundary-supported
  REQUIRE(sel.eigenpairs.empty());
  REQUIRE(sel.z.cols() == 1);

  opt.tau = 0.5;  // 1/tau = 2: retains exactly the eigenvalue 3
  sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
  REQUIRE(sel.eigenpairs.size() == 1);
  REQUIRE(sel.eigenpairs[0].lambda.real() == Approx(3.0).epsilon(1e-9));
  REQUIRE(sel.z.cols() == 2);

  opt.tau = 0.9;  // 1/tau = 1.11: adds the frozen second eigenvalue
  sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
  REQUIRE(sel.eigenpairs.size() == 2);
  REQUIRE(sel.eigenpairs[0].lambda.real() == Approx(3.0).epsilon(1e-9));
  REQUIRE(sel.eigenpairs[1].lambda.real() == Approx(1.2187326963070388).epsilon(1e-9));
}

TEMPLATE_TEST_CASE("hermitian eigenproblem agrees with the independent route", "[gevp]", double,
                   zdouble) {
  using K = TestType;
  algdd::Rng rng(72);
  for (int trial = 0; trial < 8; ++trial) {
    auto a = gen::hermitian_dominant<K>(rng, 36, 2, 0.05);
    auto layout = gen::make_layout(a, 3, static_cast<std::uint64_t>(trial));
    for (index_t i = 0; i < 3; ++i) {
      auto lp = local_blocks(a, layout, i);
      GevpOptions opt;
      opt.tau = 2.0;  // generous: retain anything above 0.5
      auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
      REQUIRE(sel.solver_ok);

      auto et = oracle::to_eigen(lp.a_tilde_ii);
      auto dad = weighted(lp.a_ii, lp.weights);
      auto [ovals, ovecs] = oracle::gevp_semidefinite(dad, oracle::EMat<K>(et), 1e-10);
      std::size_t want = 0;
      while (want < ovals.size() && ovals[want] > 1.0 / opt.tau) ++want;
      CAPTURE(trial, i, want, ovals);
      REQUIRE(sel.eigenpairs.size() == want);
      for (std::size_t e = 0; e < want; ++e) {
        REQUIRE(sel.eigenpairs[e].lambda.real() ==
                Approx(ovals[e]).epsilon(1e-9).margin(1e-9));
        REQUIRE(std::abs(sel.eigenpairs[e].lambda.imag()) <= 1e-9);
      }
    }
  }
}

TEMPLATE_TEST_CASE("retained eigenpairs satisfy the projected pencil equation", "[gevp]", double,
                   zdouble) {
  using K = TestType;
  algdd::Rng rng(73);
  auto a = gen::hermitian_dominant<K>(rng, 48, 3, 0.02);
  auto layout = gen::make_layout(a, 4);
  for (index_t i = 0; i < 4; ++i) {
    auto lp = local_blocks(a, layout, i);
    GevpOptions opt;
    opt.tau = 3.0;
    auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
    REQUIRE(sel.solver_ok);
    oracle::EMatz t = oracle::to_eigen(lp.a_tilde_ii).template cast<zdouble>();
    oracle::EMatz dad = weighted(lp.a_ii, lp.weights).template cast<zdouble>();
    oracle::EMatz q = oracle::range_basis(t, 1e-10);
    for (const auto& pair : sel.eigenpairs) {
      REQUIRE_FALSE(pair.infinite);
      oracle::EVec<zdouble> u = oracle::to_eigen_vec(pair.vec);
      oracle::EVec<zdouble> r = q.adjoint() * (dad * u - pair.lambda * (t * u));
      double scale = (dad.norm() + std::abs(pair.lambda) * t.norm()) * u.norm();
      REQUIRE(r.norm() <= 1e-8 * scale);
    }
  }
}

TEST_CASE("retention threshold and cap control the selection size", "[gevp]") {
  algdd::Rng rng(74);
  auto a = gen::hermitian_dominant<double>(rng, 60, 3, 0.02);
  auto layout = gen::make_layout(a, 3);
  auto lp = local_blocks(a, layout, 1);

  GevpOptions small, mid, big;
  small.tau = 0.2;
  mid.tau = 1.0;
  big.tau = 5.0;
  auto n_small = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, small).eigenpairs.size();
  auto n_mid = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, mid).eigenpairs.size();
  auto n_big = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, big).eigenpairs.size();
  REQUIRE(n_small <= n_mid);
  REQUIRE(n_mid <= n_big);
  REQUIRE(n_big >= 1);

  GevpOptions capped = big;
  capped.max_ev = 1;
  auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, capped);
  REQUIRE(sel.eigenpairs.size() == 1);
  capped.max_ev = 0;
  REQUIRE(algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, capped).eigenpairs.empty());
}

TEST_CASE("non-hermitian blocks go through the general pencil path", "[gevp]") {
  auto a = algdd::generate_convdiff2d(12, 12, 1e-2, algdd::KappaField::contrast);
  auto layout = gen::make_layout(a, 3);
  for (index_t i = 0; i < 3; ++i) {
    auto lp = local_blocks(a, layout, i);
    GevpOptions opt;
    opt.tau = 5.0;
    auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
    REQUIRE(sel.solver_ok);
    // Galerkin residual, recomputed against an independent range basis.
    oracle::EMatz t = oracle::to_eigen(lp.a_tilde_ii).cast<zdouble>();
    oracle::EMatz dad = weighted(lp.a_ii, lp.weights).cast<zdouble>();
    oracle::EMatz q = oracle::range_basis(t, 1e-10);
    for (const auto& pair : sel.eigenpairs) {
      oracle::EVec<zdouble> u = oracle::to_eigen_vec(pair.vec);
      zdouble alpha = pair.infinite ? zdouble(1, 0) : pair.lambda;
      zdouble beta = pair.infinite ? zdouble(0, 0) : zdouble(1, 0);
      oracle::EVec<zdouble> r = q.adjoint() * (beta * (dad * u) - alpha * (t * u));
      double scale = (std::abs(beta) * dad.norm() + std::abs(alpha) * t.norm()) * u.norm();
      REQUIRE(r.norm() <= 1e-7 * scale);
    }
    // Real scalars, possibly complex pairs: the basis must still be real and
    // of full column rank.
    if (sel.z.cols() > 0) {
      auto sv = oracle::singular_values(oracle::to_eigen(sel.z));
      REQUIRE(sv.back() > 1e-10 * sv.front());
    }
  }
}

TEST_CASE("eigenproblem rejects malformed inputs", "[gevp]") {
  DenseMatrix<double> a(3, 3), t(2, 2);
  std::vector<double> w(3, 1.0);
  REQUIRE_THROWS_AS(algdd::solve_local_gevp(a, t, w), std::invalid_argument);
  DenseMatrix<double> t3(3, 3);
  std::vector<double> w2(2, 1.0);
  REQUIRE_THROWS_AS(algdd::solve_local_gevp(a, t3, w2), std::invalid_argument);
  GevpOptions bad;
  bad.tau = 0.0;
  REQUIRE_THROWS_AS(algdd::solve_local_gevp(a, t3, w, bad), std::invalid_argument);
}

TEST_CASE("condition bound formula reproduces pinned values", "[coarse]") {
  REQUIRE(algdd::bound_rhs(2, 2, 0.1) == Approx(306.0).epsilon(1e-12));
  REQUIRE(algdd::bound_rhs(2, 2, 0.3) == Approx(106.0).epsilon(1e-12));
  REQUIRE(algdd::bound_rhs(2, 2, 1.0) == Approx(36.0).epsilon(1e-12));
  REQUIRE(algdd::bound_rhs(1, 1, 2.0) == Approx(2.0 * (2.0 + 1.5)).epsilon(1e-12));
  REQUIRE_THROWS_AS(algdd::bound_rhs(0, 2, 0.3), std::invalid_argument);
  REQUIRE_THROWS_AS(algdd::bound_rhs(2, 2, 0.0), std::invalid_argument);
}

TEMPLATE_TEST_CASE("coarse assembly matches a dense reconstruction", "[coarse]", double,
                   zdouble) {
  using K = TestType;
  algdd::Rng rng(75);
  auto a = gen::hermitian_dominant<K>(rng, 80, 2, 0.02);
  auto layout = gen::make_layout(a, 4);
  std::vector<algdd::LocalEigenSelection<K>> sels;
  GevpOptions opt;
  opt.tau = 2.0;
  for (index_t i = 0; i < 4; ++i) {
    auto lp = local_blocks(a, layout, i);
    auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
    sel.subdomain = i;
    sels.push_back(std::move(sel));
  }
  auto coarse = algdd::assemble_coarse(a, layout, sels);
  REQUIRE(coarse.n0 >= 1);

  // Dense reconstruction: C holds the coarse basis columns, a00 = C^H A C.
  oracle::EMat<K> c = oracle::EMat<K>::Zero(80, coarse.n0);
  for (index_t j = 0; j < coarse.n0; ++j)
    for (std::size_t k = 0; k < coarse.basis[j].idx.size(); ++k)
      c(coarse.basis[j].idx[k], j) = coarse.basis[j].val[k];
  oracle::EMat<K> a00 = c.adjoint() * oracle::to_eigen(a) * c;
  REQUIRE((oracle::to_eigen(coarse.a00) - a00).norm() <= 1e-10 * (1.0 + a00.norm()));

  // restrict = C^H v, prolong = C y, solve = a00^{-1}.
  auto v = gen::random_vector<K>(rng, 80);
  std::vector<K> r(static_cast<std::size_t>(coarse.n0));
  coarse.restrict_vec(v, r);
  oracle::EVec<K> want_r = c.adjoint() * oracle::to_eigen_vec(v);
  REQUIRE((oracle::to_eigen_vec(r) - want_r).norm() <= 1e-12 * (1.0 + want_r.norm()));

  std::vector<K> y = r;
  coarse.solve(y.data(), 1);
  oracle::EVec<K> want_y = oracle::solve_dense(a00, want_r);
  REQUIRE((oracle::to_eigen_vec(y) - want_y).norm() <= 1e-8 * (1.0 + want_y.norm()));

  std::vector<K> out(80, K{});
  coarse.prolong_add(y, out);
  oracle::EVec<K> want_out = c * want_y;
  REQUIRE((oracle::to_eigen_vec(out) - want_out).norm() <= 1e-8 * (1.0 + want_out.norm()));
}

TEST_CASE("duplicated selections are removed by the rank filter", "[coarse]") {
  algdd::Rng rng(76);
  auto a = gen::hermitian_dominant<double>(rng, 60, 2, 0.02);
  auto layout = gen::make_layout(a, 3);
  std::vector<algdd::LocalEigenSelection<double>> sels;
  GevpOptions opt;
  opt.tau = 2.0;
  index_t base_cols = 0;
  for (index_t i = 0; i < 3; ++i) {
    auto lp = local_blocks(a, layout, i);
    auto sel = algdd::solve_local_gevp(lp.a_ii, lp.a_tilde_ii, lp.weights, opt);
    sel.subdomain = i;
    base_cols += sel.z.cols();
    sels.push_back(sel);
    sels.push_back(std::move(sel));  // exact duplicate of every column
  }
  REQUIRE(base_cols >= 1);
  auto coarse = algdd::assemble_coarse(a, layout, sels);
  REQUIRE(coarse.n0 == base_cols);  // duplicates must not survive
  // The factorization is usable: solve a small consistent system.
  std::vector<double> y(static_cast<std::size_t>(coarse.n0), 1.0);
  coarse.solve(y.data(), 1);
  for (double v : y) REQUIRE(std::isfinite(v));
}

TEST_CASE("near-zero weighted columns are dropped", "[coarse]") {
  // With boolean weights, a column supported purely on the boundary layer is
  // annihilated by the partition of unity and must be dropped.
  auto a = algdd::generate_laplacian1d(12);
  auto g = algdd::build_graph(a);
  OverlapLayout layout =
      algdd::extend_overlap(g, {{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}});
  algdd::LocalEigenSelection<double> fake;
  fake.subdomain = 0;
  fake.z = algdd::DenseMatrix<double>(7, 1);
  fake.z(6, 0) = 1.0;  // the boundary position of subdomain 0
  auto coarse = algdd::assemble_coarse(a, layout, {fake});
  REQUIRE(coarse.n0 == 0);
}
