// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <vector>

#include <algdd/graph.hpp>
#include <algdd/partition.hpp>
#include <algdd/problems.hpp>

#include "support/generators.hpp"
#include "support/oracle.hpp"

using algdd::AdjacencyGraph;
using algdd::index_t;
using algdd::OverlapLayout;
using algdd::PouMode;

namespace {

std::string write_lines(const std::string& name, const std::vector<std::string>& lines) {
  auto d = std::filesystem::temp_directory_path() / "algdd_part_tests";
  std::filesystem::create_directories(d);
  auto p = d / name;
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
  return p.string();
}

// Independent validity check: every vertex appears in exactly one part and
// no part is empty.
void check_cover(const std::vector<std::vector<index_t>>& parts, index_t n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& p : parts) {
    REQUIRE_FALSE(p.empty());
    for (index_t v : p) {
      REQUIRE(v >= 0);
      REQUIRE(v < n);
      seen[static_cast<std::size_t>(v)]++;
    }
  }
  for (int s : seen) REQUIRE(s == 1);
}

}  // namespace

TEST_CASE("build_graph symmetrizes the sparsity pattern", "[graph]") {
  std::vector<algdd::Triplet<double>> t = {
      {0, 0, 1.0}, {0, 1, 2.0}, {2, 0, 3.0},  // one-directional entries
  };
  algdd::SparseMatrix<double> a(3, 3, t, algdd::SymmetryHint::general);
  AdjacencyGraph g = algdd::build_graph(a);
  REQUIRE(g.size() == 3);
  REQUIRE(g.degree(0) == 2);  // neighbors 1 and 2, no self loop
  REQUIRE(g.degree(1) == 1);
  REQUIRE(g.degree(2) == 1);
  auto n0 = g.neighbors(0);
  REQUIRE(std::vector<index_t>(n0.begin(), n0.end()) == std::vector<index_t>{1, 2});
}

TEST_CASE("graph of the 2-d laplacian has the right degrees", "[graph]") {
  auto a = algdd::generate_laplacian2d(5, 4);
  AdjacencyGraph g = algdd::build_graph(a);
  REQUIRE(g.size() == 20);
  REQUIRE(g.degree(0) == 2);        // corner
  REQUIRE(g.degree(2) == 3);        // edge
  REQUIRE(g.degree(5 + 2) == 4);    // interior (i=2, j=1)
}

TEST_CASE("path graph splits into contiguous balanced intervals", "[partition]") {
  auto a = algdd::generate_laplacian1d(100);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 4, 0);
  REQUIRE(parts.size() == 4);
  check_cover(parts, 100);
  for (const auto& p : parts) {
    REQUIRE(p.size() == 25);
    auto [mn, mx] = std::minmax_element(p.begin(), p.end());
    REQUIRE(*mx - *mn + 1 == static_cast<index_t>(p.size()));  // contiguous interval
  }
}

TEST_CASE("partitioning is deterministic for a fixed seed", "[partition]") {
  auto a = algdd::generate_laplacian2d(16, 16);
  AdjacencyGraph g = algdd::build_graph(a);
  auto p1 = algdd::partition_graph(g, 8, 3);
  auto p2 = algdd::partition_graph(g, 8, 3);
  REQUIRE(p1 == p2);
  check_cover(p1, 256);
}

TEST_CASE("partitioning covers disconnected graphs", "[partition]") {
  // Two disjoint path components.
  std::vector<std::pair<index_t, index_t>> edges;
  for (index_t i = 0; i + 1 < 10; ++i) edges.push_back({i, i + 1});
  for (index_t i = 10; i + 1 < 20; ++i) edges.push_back({i, i + 1});
  AdjacencyGraph g(20, edges);
  auto parts = algdd::partition_graph(g, 4, 0);
  check_cover(parts, 20);
}

TEST_CASE("degenerate part counts work", "[partition]") {
  auto a = algdd::generate_laplacian1d(6);
  AdjacencyGraph g = algdd::build_graph(a);
  auto one = algdd::partition_graph(g, 1, 0);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].size() == 6);
  auto all = algdd::partition_graph(g, 6, 0);
  REQUIRE(all.size() == 6);
  check_cover(all, 6);
  REQUIRE_THROWS_AS(algdd::partition_graph(g, 7, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(algdd::partition_graph(g, 0, 0), std::invalid_argument);
}

TEST_CASE("parts are labeled by their smallest vertex", "[partition]") {
  auto a = algdd::generate_laplacian2d(12, 12);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 6, 1);
  std::vector<index_t> mins;
  for (const auto& p : parts) mins.push_back(*std::min_element(p.begin(), p.end()));
  REQUIRE(std::is_sorted(mins.begin(), mins.end()));
  REQUIRE(mins[0] == 0);
}

TEST_CASE("import_partition reads owner files and validates them", "[partition]") {
  auto path = write_lines("owners.txt", {"0", "0", "1", "1", "2"});
  auto parts = algdd::import_partition(path, 5);
  REQUIRE(parts.size() == 3);
  REQUIRE(parts[0] == std::vector<index_t>{0, 1});
  REQUIRE(parts[1] == std::vector<index_t>{2, 3});
  REQUIRE(parts[2] == std::vector<index_t>{4});

  REQUIRE_THROWS(algdd::import_partition(write_lines("short.txt", {"0", "0"}), 5));
  REQUIRE_THROWS(algdd::import_partition(write_lines("neg.txt", {"0", "-1", "0", "0", "0"}), 5));
  REQUIRE_THROWS(algdd::import_partition(write_lines("gap.txt", {"0", "2", "0", "2", "2"}), 5));
  REQUIRE_THROWS(algdd::import_partition(write_lines("text.txt", {"0", "x", "0", "0", "0"}), 5));
  REQUIRE_THROWS(algdd::import_partition("/nonexistent/owners.txt", 5));
}

TEST_CASE("overlap adds exactly the distance-one neighbors", "[overlap]") {
  auto a = algdd::generate_laplacian2d(10, 10);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 4, 0);
  OverlapLayout layout = algdd::extend_overlap(g, parts, PouMode::boolean_interior);

  REQUIRE(layout.n == 100);
  REQUIRE(layout.parts() == 4);
  for (index_t i = 0; i < 4; ++i) {
    std::set<index_t> inside(parts[i].begin(), parts[i].end());
    // Independent recomputation of the one-layer halo.
    std::set<index_t> halo;
    for (index_t v : parts[i])
      for (index_t w : g.neighbors(v))
        if (!inside.count(w)) halo.insert(w);
    std::set<index_t> got_boundary(layout.boundary[i].begin(), layout.boundary[i].end());
    REQUIRE(got_boundary == halo);
    // overlapping = [interior, boundary] in that order.
    REQUIRE(layout.overlapping[i].size() == parts[i].size() + halo.size());
    std::vector<index_t> head(layout.overlapping[i].begin(),
                              layout.overlapping[i].begin() + parts[i].size());
    REQUIRE(std::set<index_t>(head.begin(), head.end()) == inside);
  }
}

TEST_CASE("overlap validates its input partition", "[overlap]") {
  auto a = algdd::generate_laplacian1d(6);
  AdjacencyGraph g = algdd::build_graph(a);
  REQUIRE_THROWS(algdd::extend_overlap(g, {{0, 1, 2}, {2, 3, 4, 5}}));  // overlap not allowed
  REQUIRE_THROWS(algdd::extend_overlap(g, {{0, 1, 2}, {3, 4}}));        // 5 unassigned
  REQUIRE_THROWS(algdd::extend_overlap(g, {{0, 1, 2, 3, 4, 5}, {}}));   // empty part
}

TEMPLATE_TEST_CASE("partition of unity weights sum to one on every vertex", "[overlap]", double,
                   std::complex<double>) {
  using K = TestType;
  algdd::Rng rng(51);
  auto a = gen::hermitian_dominant<K>(rng, 120, 2);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 5, 0);

  for (PouMode mode : {PouMode::boolean_interior, PouMode::multiplicity_scaled}) {
    OverlapLayout layout = algdd::extend_overlap(g, parts, mode);
    std::vector<K> ones(120, K(1)), acc(120, K(0));
    for (index_t i = 0; i < layout.parts(); ++i) {
      std::vector<K> local(static_cast<std::size_t>(layout.size(i)));
      algdd::restrict_vec<K>(layout, i, ones, local);
      algdd::prolong_add_weighted<K>(layout, i, local, acc);
    }
    for (const K& v : acc) REQUIRE(std::abs(v - K(1)) <= 1e-14);
  }
}

TEST_CASE("restriction and prolongation are adjoint", "[overlap]") {
  using K = std::complex<double>;
  algdd::Rng rng(52);
  auto a = gen::hermitian_dominant<K>(rng, 60, 2);
  AdjacencyGraph g = algdd::build_graph(a);
  auto layout = algdd::extend_overlap(g, algdd::partition_graph(g, 3, 0));
  auto x = gen::random_vector<K>(rng, 60);
  for (index_t i = 0; i < 3; ++i) {
    auto y = gen::random_vector<K>(rng, layout.size(i));
    std::vector<K> rx(static_cast<std::size_t>(layout.size(i)));
    algdd::restrict_vec<K>(layout, i, x, rx);
    std::vector<K> py(60, K(0));
    algdd::prolong_add<K>(layout, i, y, py);
    K lhs = algdd::dot(y, rx);   // <y, R x>
    K rhs = algdd::dot(py, x);   // <R^T y, x>
    REQUIRE(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("multiplicity and coloring are validated independently", "[overlap]") {
  auto a = algdd::generate_laplacian2d(24, 24);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 8, 0);
  OverlapLayout layout = algdd::extend_overlap(g, parts);
  auto [k_c, k_m] = algdd::coloring_and_multiplicity(layout, g);

  // Independent recount of the overlap multiplicity.
  std::vector<index_t> mult(576, 0);
  for (index_t i = 0; i < layout.parts(); ++i)
    for (index_t v : layout.overlapping[i]) mult[static_cast<std::size_t>(v)]++;
  REQUIRE(*std::max_element(mult.begin(), mult.end()) == k_m);
  REQUIRE(layout.multiplicity == mult);

  // Independent interaction test: shared vertex or an edge between the sets.
  auto interact = [&](index_t i, index_t j) {
    std::set<index_t> si(layout.overlapping[i].begin(), layout.overlapping[i].end());
    for (index_t v : layout.overlapping[j]) {
      if (si.count(v)) return true;
      for (index_t w : g.neighbors(v))
        if (si.count(w)) return true;
    }
    return false;
  };
  index_t pairs_interacting = 0;
  for (index_t i = 0; i < 8; ++i)
    for (index_t j = i + 1; j < 8; ++j)
      if (interact(i, j)) ++pairs_interacting;
  REQUIRE(pairs_interacting > 0);
  // A valid coloring of any graph with at least one edge needs >= 2 colors,
  // and greedy coloring never exceeds max degree + 1 <= number of parts.
  REQUIRE(k_c >= 2);
  REQUIRE(k_c <= 8);
  REQUIRE(k_m >= 2);
}

TEST_CASE("strip decomposition of a path has two colors and multiplicity two", "[overlap]") {
  auto a = algdd::generate_laplacian1d(64);
  AdjacencyGraph g = algdd::build_graph(a);
  auto parts = algdd::partition_graph(g, 8, 0);
  OverlapLayout layout = algdd::extend_overlap(g, parts);
  auto [k_c, k_m] = algdd::coloring_and_multiplicity(layout, g);
  REQUIRE(k_c == 2);
  REQUIRE(k_m == 2);
}
