// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <complex>
#include <stdexcept>
#include <vector>

#include <algdd/core.hpp>

#include "support/oracle.hpp"

using algdd::index_t;
using Catch::Approx;
using zdouble = std::complex<double>;

TEST_CASE("rng is deterministic and in range", "[core]") {
  algdd::Rng a(42), b(42), c(7);
  bool all_equal = true, any_differs = false;
  for (int i = 0; i < 1000; ++i) {
    double x = a.uniform();
    double y = b.uniform();
    double z = c.uniform();
    all_equal = all_equal && (x == y);
    any_differs = any_differs || (x != z);
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
  REQUIRE(all_equal);
  REQUIRE(any_differs);
}

TEST_CASE("rng symmetric values cover both signs", "[core]") {
  algdd::Rng rng(1);
  bool neg = false, pos = false;
  for (int i = 0; i < 200; ++i) {
    double x = rng.symmetric();
    REQUIRE(x >= -1.0);
    REQUIRE(x <= 1.0);
    neg = neg || x < 0;
    pos = pos || x > 0;
  }
  REQUIRE(neg);
  REQUIRE(pos);
}

TEST_CASE("rng pick stays in bounds and hits every value", "[core]") {
  algdd::Rng rng(3);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 500; ++i) {
    index_t k = rng.pick(5);
    REQUIRE(k >= 0);
    REQUIRE(k < 5);
    hits[static_cast<std::size_t>(k)]++;
  }
  for (int h : hits) REQUIRE(h > 0);
}

TEST_CASE("rng complex samples populate both components", "[core]") {
  algdd::Rng rng(9);
  bool re = false, im = false;
  for (int i = 0; i < 50; ++i) {
    zdouble z = rng.sample<zdouble>();
    re = re || std::abs(z.real()) > 1e-3;
    im = im || std::abs(z.imag()) > 1e-3;
  }
  REQUIRE(re);
  REQUIRE(im);
  double d = rng.sample<double>();
  REQUIRE(std::abs(d) <= 1.0);
}

TEST_CASE("parallel_for runs every index exactly once", "[core]") {
  std::vector<std::atomic<int>> counts(997);
  algdd::parallel_for(997, [&](index_t i) { counts[static_cast<std::size_t>(i)]++; });
  for (auto& c : counts) REQUIRE(c.load() == 1);
}

TEST_CASE("parallel_for propagates the first exception", "[core]") {
  auto task = [] {
    algdd::parallel_for(256, [](index_t i) {
      if (i == 137) throw std::runtime_error("boom at 137");
    });
  };
  REQUIRE_THROWS_AS(task(), std::runtime_error);
}

TEST_CASE("norm2 and dot agree with the dense oracle", "[core]") {
  algdd::Rng rng(5);
  std::vector<zdouble> x(64), y(64);
  for (auto& v : x) v = rng.sample<zdouble>();
  for (auto& v : y) v = rng.sample<zdouble>();
  auto ex = oracle::to_eigen_vec(x);
  auto ey = oracle::to_eigen_vec(y);
  REQUIRE(algdd::norm2(x) == Approx(ex.norm()).epsilon(1e-13));
  zdouble d = algdd::dot(x, y);
  zdouble ed = ex.adjoint() * ey;
  REQUIRE(std::abs(d - ed) <= 1e-12 * std::abs(ed));
}

TEST_CASE("format_msg stitches heterogeneous arguments", "[core]") {
  std::string s = algdd::format_msg("row ", 3, " of ", 7, " value ", 1.5);
  REQUIRE(s == "row 3 of 7 value 1.5");
}
