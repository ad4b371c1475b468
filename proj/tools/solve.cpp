// SPDX-License-Identifier: Apache-2.0

// Command-line harness: assembles or loads a matrix, runs the two-level
// Schwarz-preconditioned GMRES pipeline, prints a result table, and
// optionally dumps a JSON record and the per-subdomain matrices.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <algdd/algdd.hpp>

namespace {

nlohmann::json record_to_json(const algdd::RunRecord& r) {
  nlohmann::json j;
  j["problem"] = r.problem;
  j["n"] = r.n;
  j["nnz"] = r.nnz;
  j["one_level"] = r.one_level;
  j["coarse"] = r.coarse;
  j["pou"] = r.pou;
  j["tau"] = r.tau;
  j["max_ev"] = r.max_ev;
  j["n_parts"] = r.n_parts;
  j["n0"] = r.n0;
  j["k_c"] = r.k_c;
  j["k_m"] = r.k_m;
  j["converged"] = r.converged;
  j["breakdown"] = r.breakdown;
  j["iterations"] = r.iterations;
  j["final_residual"] = r.final_residual;
  j["history"] = r.history;
  j["restart"] = r.restart;
  j["rtol"] = r.rtol;
  j["maxit"] = r.maxit;
  j["rhs"] = r.rhs_kind;
  j["rhs_seed"] = r.rhs_seed;
  j["zero_initial_guess"] = r.zero_initial_guess;
  j["subdomains"] = nlohmann::json::array();
  for (const auto& s : r.subdomains)
    j["subdomains"].push_back({{"size", s.size},
                               {"interior", s.interior},
                               {"kernel_dim", s.kernel_dim},
                               {"eigenpairs", s.eigenpairs},
                               {"columns", s.columns},
                               {"solver_ok", s.solver_ok}});
  j["seconds"] = r.seconds;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"algebraic two-level Schwarz preconditioned GMRES"};
  app.require_subcommand(1);
  CLI::App* solve = app.add_subcommand("solve", "assemble or load a matrix and solve it");

  std::string matrix_path, generator, partition_file, dump_dir, out_path;
  std::vector<algdd::index_t> grid;
  double nu = 1e-2;
  std::string kappa = "contrast", variant = "ras", coarse = "deflated", pou = "boolean",
              rhs = "random";
  algdd::SolverConfig cfg;
  algdd::index_t lap1d_n = 64;

  auto* opt_matrix = solve->add_option("--matrix", matrix_path, "Matrix Market file to load");
  auto* opt_gen = solve->add_option("--gen", generator, "built-in generator")
                      ->check(CLI::IsMember({"lap1d", "lap2d", "convdiff2d"}));
  opt_matrix->excludes(opt_gen);
  opt_gen->excludes(opt_matrix);
  solve->add_option("--grid", grid, "grid extents NX [NY] for the 2-D generators")
      ->expected(1, 2);
  solve->add_option("--n", lap1d_n, "size for the lap1d generator");
  solve->add_option("--nu", nu, "diffusion coefficient for convdiff2d");
  solve->add_option("--kappa", kappa, "diffusivity field for convdiff2d")
      ->check(CLI::IsMember({"constant", "contrast"}));
  solve->add_option("--nsub", cfg.n_parts, "number of subdomains");
  solve->add_option("--partition-file", partition_file,
                    "file with one 0-based owner id per row, overriding the partitioner");
  solve->add_option("--seed", cfg.seed, "partitioner seed");
  solve->add_option("--pou", pou, "partition-of-unity weights")
      ->check(CLI::IsMember({"boolean", "multiplicity"}));
  solve->add_option("--tau", cfg.tau, "eigenvalue retention threshold (|lambda| > 1/tau)");
  solve->add_option("--max-ev", cfg.max_ev, "eigenpair cap per subdomain");
  solve->add_option("--kernel-tol", cfg.kernel_tol, "relative kernel detection tolerance");
  solve->add_option("--variant", variant, "one-level variant")
      ->check(CLI::IsMember({"asm", "ras"}));
  solve->add_option("--coarse", coarse, "coarse correction")
      ->check(CLI::IsMember({"none", "additive", "deflated"}));
  solve->add_option("--restart", cfg.restart, "GMRES restart length");
  solve->add_option("--rtol", cfg.rtol, "relative residual tolerance");
  solve->add_option("--maxit", cfg.maxit, "total GMRES iteration cap");
  solve->add_option("--rhs", rhs, "right-hand side kind")
      ->check(CLI::IsMember({"random", "inlet"}));
  solve->add_option("--rhs-seed", cfg.rhs_seed, "seed of the random right-hand side");
  solve->add_option("--dense-threshold", cfg.dense_threshold,
                    "local blocks above this size use a sparse factorization");
  solve->add_option("--dump-local", dump_dir, "directory for per-subdomain matrix dumps");
  solve->add_option("--out", out_path, "write the run record as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    algdd::ProblemSpec problem;
    if (!matrix_path.empty()) {
      problem.kind = algdd::ProblemKind::matrix_file;
      problem.path = matrix_path;
    } else if (!generator.empty()) {
      if (generator == "lap1d") {
        problem.kind = algdd::ProblemKind::laplacian1d;
        problem.n = grid.empty() ? lap1d_n : grid[0];
      } else {
        problem.kind = generator == "lap2d" ? algdd::ProblemKind::laplacian2d
                                            : algdd::ProblemKind::convdiff2d;
        if (grid.empty()) throw CLI::ValidationError("--gen " + generator + " needs --grid");
        problem.nx = grid[0];
        problem.ny = grid.size() > 1 ? grid[1] : grid[0];
        problem.nu = nu;
        problem.kappa =
            kappa == "constant" ? algdd::KappaField::constant : algdd::KappaField::contrast;
      }
    } else {
      throw CLI::ValidationError("either --matrix or --gen is required");
    }
    cfg.partition_file = partition_file;
    cfg.dump_dir = dump_dir;
    cfg.pou = pou == "boolean" ? algdd::PouMode::boolean_interior : algdd::PouMode::multiplicity_scaled;
    cfg.one_level = variant == "ras" ? algdd::OneLevelType::restricted : algdd::OneLevelType::additive;
    cfg.coarse = coarse == "none"       ? algdd::CoarseCorrection::none
                 : coarse == "additive" ? algdd::CoarseCorrection::additive
                                        : algdd::CoarseCorrection::deflated;
    cfg.rhs = rhs == "inlet" ? algdd::RhsKind::inlet : algdd::RhsKind::random;

    algdd::RunRecord rec = algdd::run(problem, cfg);
    std::fputs(algdd::emit_table({&rec, 1}).c_str(), stdout);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
      out << record_to_json(rec).dump(2) << '\n';
    }
    if (rec.breakdown) return 3;
    return rec.converged ? 0 : 2;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
