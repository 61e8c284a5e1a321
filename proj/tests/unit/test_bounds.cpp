// Copyright 2026 The ddrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ddrisk/bounds.hpp"
#include "ddrisk/tasks.hpp"

using namespace ddrisk;

TEST_CASE("q_star_entropy_gap") {
  CHECK(q_star_entropy_gap(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(q_star_entropy_gap(0.5, 0.1) == doctest::Approx(0.51083).epsilon(1e-5));
  CHECK(q_star_entropy_gap(1.0 - 1e-12, 0.1) == doctest::Approx(std::log(10.0)).epsilon(1e-6));
  CHECK(bernoulli_kl(1.0, 0.1) == doctest::Approx(std::log(10.0)));
  CHECK_THROWS_AS(q_star_entropy_gap(0.0, 0.1), Error);
  CHECK_THROWS_AS(q_star_entropy_gap(0.5, 1.0), Error);
}

TEST_CASE("q_star_entropy_gap agrees with the direct entropy formula") {
  for (double v : {0.01, 0.1, 0.37, 0.8})
    for (double eps : {0.02, 0.2, 0.5, 0.93}) {
      const double direct = -q_star_entropy(eps, v);
      REQUIRE(std::abs(direct - q_star_entropy_gap(eps, v)) < 1e-12);
    }
}

TEST_CASE("KL is increasing in epsilon above r") {
  for (double r : {0.01, 0.2, 0.6}) {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double eps = r + (1.0 - r) * i / 1000.0;
      const double kl = bernoulli_kl(eps, r);
      REQUIRE(kl > prev);
      prev = kl;
    }
  }
}

TEST_CASE("dd_risk_exact") {
  CHECK(dd_risk_exact(0.2, 0.0) == 0.2);
  CHECK(dd_risk_exact(std::exp(-0.7), 0.7) == 1.0);
  for (double r : {0.01, 0.05, 0.11, 0.5}) CHECK(dd_risk_exact(r, -std::log(r)) == 1.0);
  CHECK(dd_risk_exact(0.1, 0.51083) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(std::abs(dd_risk_exact(0.1, 0.51083) - 0.5) < 1e-5);
  CHECK(dd_risk_exact(0.0, 1.0) == 0.0);

  // Dense scan for the largest feasible epsilon.
  double best = 0.1;
  for (int i = 0; i <= 1000000; ++i) {
    const double eps = 0.1 + 0.9 * i / 1e6;
    if (bernoulli_kl(eps, 0.1) <= 0.51083) best = eps;
  }
  CHECK(std::abs(dd_risk_exact(0.1, 0.51083) - best) < 2e-6);
  CHECK_THROWS_AS(dd_risk_exact(-0.1, 1.0), Error);
  CHECK_THROWS_AS(dd_risk_exact(0.1, -1.0), Error);
}

TEST_CASE("dd_risk_exact is monotone in both arguments") {
  for (double g = 0.0; g <= 3.0; g += 0.25) {
    double prev = 0.0;
    for (double r = 0.0; r <= 1.0; r += 0.01) {
      const double v = dd_risk_exact(r, g);
      REQUIRE(v >= prev);
      prev = v;
    }
  }
  for (double r = 0.01; r <= 1.0; r += 0.07) {
    double prev = 0.0;
    for (double g = 0.0; g <= 3.0; g += 0.05) {
      const double v = dd_risk_exact(r, g);
      REQUIRE(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("dd_risk_bound") {
  CHECK(dd_risk_bound_simplified(0.1, 0.5) ==
        doctest::Approx((0.5 + std::numbers::ln2) / std::log(10.0)));
  CHECK(dd_risk_bound_simplified(0.1, 0.5) == doctest::Approx(0.51819).epsilon(1e-5));
  const DdBound b = dd_risk_bound_detail(0.1, 0.5);
  CHECK(b.additive == doctest::Approx(0.6));
  CHECK(b.value <= 0.51819);
  CHECK(b.alpha > 0.1);
  CHECK(b.alpha < 1.0);
  CHECK(b.alpha_branch <= alpha_branch(0.1, 0.5, 0.5) + 1e-12);
  CHECK(dd_risk_bound(0.3, 0.0) <= 0.3 + 1e-12);
  CHECK(dd_risk_bound(0.0, 2.0) == 0.0);
  CHECK(dd_risk_bound_detail(0.5, 3.0).vacuous());
}

TEST_CASE("bound dominates the exact value") {
  for (int i = 1; i <= 40; ++i) {
    const double r = 0.01 * i;
    for (int j = 0; j <= 30; ++j) {
      const double g = 0.1 * j;
      const double exact = dd_risk_exact(r, g);
      REQUIRE(dd_risk_bound(r, g) >= exact - 1e-9);
      REQUIRE(dd_risk_bound_simplified(r, g) >= exact - 1e-9);
      REQUIRE(dd_risk_bound(r, g) <= dd_risk_bound_simplified(r, g) + 1e-12);
    }
  }
}

TEST_CASE("l1_to_uniform") {
  const BinGrid g(10);
  std::vector<Point2> grid_pts;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) grid_pts.push_back({(i + 0.5) / 10, (j + 0.5) / 10});
  const std::vector<double> ones(100, 1.0);
  CHECK(l1_to_uniform(grid_pts, ones, g) == doctest::Approx(0.0));

  const std::vector<Point2> lump(5, Point2{0.2, 0.2});
  const std::vector<double> w5(5, 1.0);
  CHECK(l1_to_uniform(lump, w5, BinGrid(100)) == doctest::Approx(1.9998));

  const auto d = sample_uniform(sample_task(0), 100000, 3);
  const std::vector<double> w(d.size(), 1.0);
  CHECK(l1_to_uniform(d, w, g) < 0.1);

  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS_AS(l1_to_uniform(lump, zeros, g), Error);
}
