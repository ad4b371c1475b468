// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_RUN_HPP
#define ALGDD_RUN_HPP

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coarse.hpp"
#include "gmres.hpp"
#include "graph.hpp"
#include "matrix_market.hpp"
#include "partition.hpp"
#include "problems.hpp"
#include "schwarz.hpp"
#include "splitting.hpp"

namespace algdd {

enum class ProblemKind { matrix_file, laplacian1d, laplacian2d, convdiff2d };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::laplacian2d;
  std::string path;  // matrix_file
  index_t n = 64;    // laplacian1d
  index_t nx = 64;
  index_t ny = 64;
  double nu = 1e-2;
  KappaField kappa = KappaField::contrast;

  std::string label() const {
    switch (kind) {
      case ProblemKind::matrix_file:
        return std::filesystem::path(path).stem().string();
      case ProblemKind::laplacian1d:
        return format_msg("lap1d-", n);
      case ProblemKind::laplacian2d:
        return format_msg("lap2d-", nx, "x", ny);
      case ProblemKind::convdiff2d:
      default:
        return format_msg("convdiff2d-", nx, "x", ny, "-nu", nu,
                          kappa == KappaField::contrast ? "-contrast" : "-constant");
    }
  }
};

enum class RhsKind { random, inlet };

struct SolverConfig {
  index_t n_parts = 8;
  std::string partition_file;  // overrides the built-in partitioner
  std::uint64_t seed = 0;      // partitioner seed
  PouMode pou = PouMode::boolean_interior;
  double tau = 0.3;
  index_t max_ev = 60;
  double kernel_tol = 1e-10;
  OneLevelType one_level = OneLevelType::restricted;
  CoarseCorrection coarse = CoarseCorrection::deflated;
  index_t restart = 30;
  double rtol = 1e-8;
  index_t maxit = 100;
  RhsKind rhs = RhsKind::random;
  std::uint64_t rhs_seed = 0;
  index_t dense_threshold = 4096;
  std::string dump_dir;  // when set, local matrices are written here
};

struct SubdomainRecord {
  index_t size = 0;
  index_t interior = 0;
  index_t kernel_dim = 0;
  index_t eigenpairs = 0;
  index_t columns = 0;  // contributed to the coarse candidate basis
  bool solver_ok = true;
};

/// Everything observable about one solve, including an echo of the protocol
/// actually applied.
struct RunRecord {
  std::string problem;
  index_t n = 0;
  std::int64_t nnz = 0;
  std::string one_level;  // "asm" | "ras"
  std::string coarse;     // "none" | "additive" | "deflated"
  std::string pou;        // "boolean" | "multiplicity"
  double tau = 0;
  index_t max_ev = 0;
  index_t n_parts = 0;
  index_t n0 = 0;
  index_t k_c = 0;
  index_t k_m = 0;
  bool converged = false;
  bool breakdown = false;
  index_t iterations = 0;
  double final_residual = 0;
  std::vector<double> history;
  index_t restart = 0;
  double rtol = 0;
  index_t maxit = 0;
  std::string rhs_kind;
  std::uint64_t rhs_seed = 0;
  bool zero_initial_guess = true;
  std::vector<SubdomainRecord> subdomains;
  std::map<std::string, double> seconds;  // per stage
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>* out) : out_(out) {}
  template <class F>
  auto time(const std::string& stage, F&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      (*out_)[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      auto result = fn();
      (*out_)[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return result;
    }
  }

 private:
  std::map<std::string, double>* out_;
};

}  // namespace detail

/// Full pipeline on an assembled matrix: graph, partition, overlap, local
/// splittings, spectral coarse space, Schwarz setup, GMRES solve.  When rhs
/// is empty a deterministic random right-hand side is drawn from rhs_seed.
template <scalar K>
RunRecord run(const SparseMatrix<K>& a, const std::string& label, const SolverConfig& cfg,
              std::vector<K> rhs = {}) {
  if (a.rows() != a.cols()) throw std::invalid_argument("run: matrix not square");
  RunRecord rec;
  rec.problem = label;
  rec.n = a.rows();
  rec.nnz = a.nnz();
  rec.one_level = cfg.one_level == OneLevelType::restricted ? "ras" : "asm";
  rec.coarse = cfg.coarse == CoarseCorrection::none ? "none"
               : cfg.coarse == CoarseCorrection::additive ? "additive"
                                                          : "deflated";
  rec.pou = cfg.pou == PouMode::boolean_interior ? "boolean" : "multiplicity";
  rec.tau = cfg.tau;
  rec.max_ev = cfg.max_ev;
  rec.restart = cfg.restart;
  rec.rtol = cfg.rtol;
  rec.maxit = cfg.maxit;
  rec.rhs_kind = cfg.rhs == RhsKind::random ? "random" : "inlet";
  rec.rhs_seed = cfg.rhs_seed;
  detail::StageTimer timer(&rec.seconds);

  AdjacencyGraph g = timer.time("graph", [&] { return build_graph(a); });
  auto parts = timer.time("partition", [&] {
    return cfg.partition_file.empty() ? partition_graph(g, cfg.n_parts, cfg.seed)
                                      : import_partition(cfg.partition_file, a.rows());
  });
  rec.n_parts = static_cast<index_t>(parts.size());
  OverlapLayout layout =
      timer.time("overlap", [&] { return extend_overlap(g, std::move(parts), cfg.pou); });
  auto [k_c, k_m] = coloring_and_multiplicity(layout, g);
  rec.k_c = k_c;
  rec.k_m = k_m;

  const index_t n_parts = layout.parts();
  rec.subdomains.resize(n_parts);
  std::vector<LocalSplitting<K>> splittings(n_parts);
  timer.time("splitting", [&] {
    parallel_for(n_parts, [&](index_t i) { splittings[i] = build_local_splitting(a, layout, i); });
  });
  for (index_t i = 0; i < n_parts; ++i) {
    rec.subdomains[i].size = layout.size(i);
    rec.subdomains[i].interior = layout.interior_size(i);
  }
  if (!cfg.dump_dir.empty()) {
    std::filesystem::create_directories(cfg.dump_dir);
    for (index_t i = 0; i < n_parts; ++i) {
      auto stem = format_msg(cfg.dump_dir, "/", label, "-sub", i);
      write_matrix_market(splittings[i].a_ii, stem + "-aii.mtx");
      write_matrix_market(splittings[i].a_tilde_ii, stem + "-atilde.mtx");
    }
  }

  CoarseSpace<K> coarse;
  if (cfg.coarse != CoarseCorrection::none) {
    std::vector<LocalEigenSelection<K>> selections(n_parts);
    timer.time("eigenproblems", [&] {
      parallel_for(n_parts, [&](index_t i) {
        if (layout.size(i) > cfg.dense_threshold)
          throw std::runtime_error(format_msg(
              "subdomain ", i, " has ", layout.size(i),
              " rows, above the dense eigensolver limit; raise the subdomain count"));
        GevpOptions opt;
        opt.tau = cfg.tau;
        opt.max_ev = cfg.max_ev;
        opt.kernel_tol = cfg.kernel_tol;
        selections[i] = solve_local_gevp(to_dense(splittings[i].a_ii),
                                         to_dense(splittings[i].a_tilde_ii),
                                         layout.weights[i], opt);
        selections[i].subdomain = i;
      });
    });
    for (index_t i = 0; i < n_parts; ++i) {
      rec.subdomains[i].kernel_dim = selections[i].kernel.cols();
      rec.subdomains[i].eigenpairs = static_cast<index_t>(selections[i].eigenpairs.size());
      rec.subdomains[i].columns = selections[i].z.cols();
      rec.subdomains[i].solver_ok = selections[i].solver_ok;
    }
    coarse = timer.time("coarse", [&] { return assemble_coarse(a, layout, selections); });
    rec.n0 = coarse.n0;
  }

  typename SchwarzPreconditioner<K>::Options popt;
  popt.one_level = cfg.one_level;
  popt.coarse = cfg.coarse;
  popt.dense_threshold = cfg.dense_threshold;
  SchwarzPreconditioner<K> pc = timer.time(
      "factorization", [&] { return SchwarzPreconditioner<K>::setup(a, layout, popt, std::move(coarse)); });

  if (rhs.empty()) {
    rhs.resize(a.rows());
    Rng rng(cfg.rhs_seed);
    for (K& v : rhs) v = rng.sample<K>();
  } else if (static_cast<index_t>(rhs.size()) != a.rows()) {
    throw std::invalid_argument("run: right-hand side size mismatch");
  }

  auto [x, report] = timer.time("solve", [&] {
    return gmres(a, pc, std::span<const K>(rhs), GmresOptions{cfg.restart, cfg.rtol, cfg.maxit});
  });
  rec.converged = report.converged;
  rec.breakdown = report.breakdown;
  rec.iterations = report.iterations;
  rec.final_residual = report.final_residual;
  rec.history = std::move(report.history);
  return rec;
}

/// Generates or reads the problem, dispatching on the scalar type of files.
inline RunRecord run(const ProblemSpec& problem, const SolverConfig& cfg) {
  if (cfg.rhs == RhsKind::inlet && problem.kind != ProblemKind::convdiff2d)
    throw std::invalid_argument("run: the inlet right-hand side needs the convdiff2d generator");
  switch (problem.kind) {
    case ProblemKind::laplacian1d:
      return run(generate_laplacian1d(problem.n), problem.label(), cfg);
    case ProblemKind::laplacian2d:
      return run(generate_laplacian2d(problem.nx, problem.ny), problem.label(), cfg);
    case ProblemKind::convdiff2d: {
      SparseMatrix<double> a = generate_convdiff2d(problem.nx, problem.ny, problem.nu, problem.kappa);
      std::vector<double> rhs;
      if (cfg.rhs == RhsKind::inlet)
        rhs = convdiff2d_inlet_rhs(problem.nx, problem.ny, problem.nu, problem.kappa);
      return run(a, problem.label(), cfg, std::move(rhs));
    }
    case ProblemKind::matrix_file:
    default: {
      MmHeader h = peek_matrix_market(problem.path);
      if (h.field == MmField::complex_)
        return run(read_matrix_market<std::complex<double>>(problem.path), problem.label(), cfg);
      return run(read_matrix_market<double>(problem.path), problem.label(), cfg);
    }
  }
}

/// Text table over runs; non-converged runs leave the iteration cell empty
/// and breakdowns render a dagger, matching the usual reporting convention.
inline std::string emit_table(std::span<const RunRecord> records) {
  std::vector<std::array<std::string, 8>> rows;
  rows.push_back({"problem", "n", "N", "variant", "tau", "n0", "iters", "residual"});
  for (const auto& r : records) {
    std::string iters = r.breakdown ? "\xe2\x80\xa0" : r.converged ? format_msg(r.iterations) : "";
    char res[32];
    std::snprintf(res, sizeof res, "%.2e", r.final_residual);
    rows.push_back({r.problem, format_msg(r.n), format_msg(r.n_parts),
                    r.one_level + "+" + r.coarse, format_msg(r.tau),
                    r.coarse == "none" ? "" : format_msg(r.n0), iters, res});
  }
  std::array<std::size_t, 8> width{};
  auto display_width = [](const std::string& s) {
    std::size_t w = 0;
    for (char c : s)
      if ((c & 0xc0) != 0x80) ++w;  // count UTF-8 code points, not bytes
    return w;
  };
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], display_width(row[c]));
  std::string out;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    for (std::size_t c = 0; c < rows[ri].size(); ++c) {
      out += rows[ri][c];
      if (c + 1 < rows[ri].size())
        out.append(width[c] - display_width(rows[ri][c]) + 2, ' ');
    }
    out += '\n';
    if (ri == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c + 1 < width.size() ? 2 : 0);
      out.append(total, '-');
      out += '\n';
    }
  }
  return out;
}

}  // namespace algdd

#endif  // ALGDD_RUN_HPP
