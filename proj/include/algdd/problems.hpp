// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_PROBLEMS_HPP
#define ALGDD_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sparse.hpp"

namespace algdd {

/// Tridiagonal (-1, 2, -1) stencil on n interior points.
inline SparseMatrix<double> generate_laplacian1d(index_t n) {
  if (n < 1) throw std::invalid_argument("generate_laplacian1d: n must be positive");
  std::vector<Triplet<double>> t;
  t.reserve(3 * n);
  for (index_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix<double>(n, n, std::move(t), SymmetryHint::symmetric);
}

/// Five-point stencil (4 on the diagonal, -1 to grid neighbors) on an
/// nx x ny grid of interior points, rows ordered by y then x.
inline SparseMatrix<double> generate_laplacian2d(index_t nx, index_t ny) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("generate_laplacian2d: grid extents must be positive");
  const index_t n = nx * ny;
  std::vector<Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(n));
  for (index_t j = 0; j < ny; ++j)
    for (index_t i = 0; i < nx; ++i) {
      index_t k = j * nx + i;
      t.push_back({k, k, 4.0});
      if (i > 0) t.push_back({k, k - 1, -1.0});
      if (i + 1 < nx) t.push_back({k, k + 1, -1.0});
      if (j > 0) t.push_back({k, k - nx, -1.0});
      if (j + 1 < ny) t.push_back({k, k + nx, -1.0});
    }
  return SparseMatrix<double>(n, n, std::move(t), SymmetryHint::symmetric);
}

enum class KappaField { constant, contrast };

namespace detail {

/// Recirculating velocity, divergence free on the unit square.
inline double velocity_x(double x, double y) { return x * (1.0 - x) * (2.0 * y - 1.0); }
inline double velocity_y(double x, double y) { return -y * (1.0 - y) * (2.0 * x - 1.0); }

/// Two horizontal layers with a strong jump, or the constant field 1.
inline double kappa_at(KappaField field, double /*x*/, double y) {
  if (field == KappaField::constant) return 1.0;
  return y >= 0.5 ? 2.0 : 6e-2;
}

/// Stencil of the convection-diffusion operator at interior node (i, j):
/// centered diffusion with face-averaged kappa plus conservative first-order
/// upwind convection with face-midpoint velocities.  Off coefficients of
/// neighbors outside the grid belong to the Dirichlet boundary and are
/// reported so the right-hand-side helper can move them.
struct ConvDiffStencil {
  double c, e, w, n, s;
};

inline ConvDiffStencil convdiff_stencil(index_t nx, index_t ny, double nu, KappaField field,
                                        index_t i, index_t j) {
  const double hx = 1.0 / (nx + 1), hy = 1.0 / (ny + 1);
  const double x = (i + 1) * hx, y = (j + 1) * hy;
  auto kap = [&](double px, double py) { return kappa_at(field, px, py); };
  const double ke = 0.5 * (kap(x, y) + kap(x + hx, y));
  const double kw = 0.5 * (kap(x, y) + kap(x - hx, y));
  const double kn = 0.5 * (kap(x, y) + kap(x, y + hy));
  const double ks = 0.5 * (kap(x, y) + kap(x, y - hy));
  ConvDiffStencil st{};
  st.c = nu * ((ke + kw) / (hx * hx) + (kn + ks) / (hy * hy));
  st.e = -nu * ke / (hx * hx);
  st.w = -nu * kw / (hx * hx);
  st.n = -nu * kn / (hy * hy);
  st.s = -nu * ks / (hy * hy);

  const double fe = velocity_x(x + 0.5 * hx, y);
  const double fw = velocity_x(x - 0.5 * hx, y);
  const double fn = velocity_y(x, y + 0.5 * hy);
  const double fs = velocity_y(x, y - 0.5 * hy);
  st.c += (std::max(fe, 0.0) - std::min(fw, 0.0)) / hx;
  st.e += std::min(fe, 0.0) / hx;
  st.w += -std::max(fw, 0.0) / hx;
  st.c += (std::max(fn, 0.0) - std::min(fs, 0.0)) / hy;
  st.n += std::min(fn, 0.0) / hy;
  st.s += -std::max(fs, 0.0) / hy;
  return st;
}

}  // namespace detail

/// Convection-diffusion operator -nu div(kappa grad u) + div(V u) on the unit
/// square with homogeneous Dirichlet boundary, discretized on nx x ny
/// interior nodes (y-major ordering).
inline SparseMatrix<double> generate_convdiff2d(index_t nx, index_t ny, double nu,
                                                KappaField field = KappaField::contrast) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("generate_convdiff2d: grid extents must be positive");
  if (!(nu > 0)) throw std::invalid_argument("generate_convdiff2d: nu must be positive");
  const index_t n = nx * ny;
  std::vector<Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(n));
  for (index_t j = 0; j < ny; ++j)
    for (index_t i = 0; i < nx; ++i) {
      const index_t k = j * nx + i;
      auto st = detail::convdiff_stencil(nx, ny, nu, field, i, j);
      t.push_back({k, k, st.c});
      if (i + 1 < nx) t.push_back({k, k + 1, st.e});
      if (i > 0) t.push_back({k, k - 1, st.w});
      if (j + 1 < ny) t.push_back({k, k + nx, st.n});
      if (j > 0) t.push_back({k, k - nx, st.s});
    }
  return SparseMatrix<double>(n, n, std::move(t), SymmetryHint::general);
}

/// Right-hand side for the inflow condition u = 1 on the x = 0 edge and u = 0
/// on the rest of the boundary: the boundary coefficients of the same stencil
/// move to the right-hand side with opposite sign.
inline std::vector<double> convdiff2d_inlet_rhs(index_t nx, index_t ny, double nu,
                                                KappaField field = KappaField::contrast) {
  std::vector<double> b(static_cast<std::size_t>(nx) * ny, 0.0);
  for (index_t j = 0; j < ny; ++j) {
    auto st = detail::convdiff_stencil(nx, ny, nu, field, 0, j);
    b[j * nx] = -st.w * 1.0;
  }
  return b;
}

}  // namespace algdd

#endif  // ALGDD_PROBLEMS_HPP
