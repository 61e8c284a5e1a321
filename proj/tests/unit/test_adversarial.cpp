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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddrisk/adversarial.hpp"
#include "ddrisk/bounds.hpp"
#include "ddrisk/entropy.hpp"

using namespace ddrisk;

namespace {

// Classifier that agrees with truth everywhere except on [x0,x0+w) x [y0,y0+h).
AdversarialPool rectangle_pool(double x0, double y0, double w, double h, std::size_t m,
                               std::uint64_t seed) {
  Rng r(seed);
  std::vector<Point2> pts(m);
  std::vector<Label> truth(m, Label::kNegative), pred(m, Label::kNegative);
  for (std::size_t i = 0; i < m; ++i) {
    pts[i] = {r.uniform(), r.uniform()};
    if (pts[i].x >= x0 && pts[i].x < x0 + w && pts[i].y >= y0 && pts[i].y < y0 + h)
      pred[i] = Label::kPositive;
  }
  return make_pool(std::move(pts), std::move(truth), std::move(pred));
}

}  // namespace

TEST_CASE("build_pool") {
  const auto task = sample_task(3);
  const auto perfect = build_pool([&](const Point2& p) { return true_label(task, p); }, task, 2000, 1);
  CHECK(perfect.mislabeled.empty());
  CHECK(perfect.uniform_risk() == 0.0);
  const auto wrong = build_pool(
      [&](const Point2& p) {
        return true_label(task, p) == Label::kPositive ? Label::kNegative : Label::kPositive;
      },
      task, 2000, 1);
  CHECK(wrong.mislabeled.size() == 2000);
  CHECK(wrong.uniform_risk() == 1.0);

  // Pool risk vs quadrature for a fixed half-plane classifier.
  auto half = [](const Point2& p) { return p.x < 0.5 ? Label::kPositive : Label::kNegative; };
  const int q = 400;
  double truth = 0.0;
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) {
      const Point2 p{(i + 0.5) / q, (j + 0.5) / q};
      truth += half(p) != true_label(task, p);
    }
  truth /= q * q;
  const auto pool = build_pool(half, task, 10000, 5);
  CHECK(std::abs(pool.uniform_risk() - truth) < 2.0 / std::sqrt(10000.0));
}

TEST_CASE("greedy with an empty mislabeled set") {
  const auto pool = rectangle_pool(0.0, 0.0, 0.0, 0.0, 500, 1);
  const auto res = greedy_adversarial(pool, 0.5, BinGrid(10));
  CHECK(res.risk == 0.0);
  CHECK(res.achieved_gap == 0.0);
  CHECK_FALSE(res.exhausted);
}

TEST_CASE("greedy with an inactive constraint keeps only the mislabeled set") {
  const auto pool = rectangle_pool(0.2, 0.2, 0.3, 0.3, 2000, 2);
  const auto res = greedy_adversarial(pool, 100.0, BinGrid(10));
  CHECK(res.size() == pool.mislabeled.size());
  CHECK(res.risk == 1.0);
}

TEST_CASE("greedy at gamma = 0 returns the pool risk") {
  const auto pool = rectangle_pool(0.2, 0.2, 0.3, 0.3, 10000, 3);
  const auto res = greedy_adversarial(pool, 0.0, BinGrid(100));
  CHECK(res.exhausted);
  CHECK(res.size() == pool.size());
  CHECK(res.risk == doctest::Approx(pool.uniform_risk()).epsilon(1e-12));
}

TEST_CASE("greedy on a rectangle error set tracks the exact DD risk") {
  // Cell-aligned rectangle of area 0.1 on a 10 x 10 grid.
  const auto pool = rectangle_pool(0.2, 0.4, 0.5, 0.2, 10000, 4);
  const auto res = greedy_adversarial(pool, 0.51, BinGrid(10));
  CHECK(std::abs(res.risk - dd_risk_exact(0.1, 0.51)) < 0.05);
  CHECK_FALSE(res.exhausted);
  CHECK(res.achieved_gap <= 0.51);
}

TEST_CASE("greedy invariants") {
  const auto task = sample_task(8);
  auto clf = [](const Point2& p) { return p.x * p.x + p.y > 0.7 ? Label::kPositive : Label::kNegative; };
  const auto pool = build_pool(clf, task, 5000, 2);
  REQUIRE_FALSE(pool.mislabeled.empty());
  const BinGrid grid(20);
  for (double g : {0.05, 0.3, 1.0, 2.5}) {
    const auto res = greedy_adversarial(pool, g, grid);
    CHECK(std::equal(pool.mislabeled.begin(), pool.mislabeled.end(), res.selected.begin()));
    CHECK(res.risk >= pool.uniform_risk() - 1e-12);
    if (!res.exhausted) CHECK(res.achieved_gap <= g);
    std::vector<Point2> sel;
    for (auto i : res.selected) sel.push_back(pool.points[i]);
    CHECK(res.achieved_gap == doctest::Approx(entropy_gap(histogram(sel, grid))).epsilon(1e-9));
  }
}

TEST_CASE("each greedy addition maximizes the next-step entropy") {
  Rng r(12);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 60;
    std::vector<Point2> pts(m);
    std::vector<Label> truth(m), pred(m);
    for (std::size_t i = 0; i < m; ++i) {
      pts[i] = {r.uniform(), r.uniform()};
      truth[i] = Label::kNegative;
      pred[i] = pts[i].x < 0.3 && r.uniform() < 0.8 ? Label::kPositive : Label::kNegative;
    }
    const auto pool = make_pool(pts, truth, pred);
    if (pool.mislabeled.empty()) continue;
    const BinGrid grid(3);
    const auto res = greedy_adversarial(pool, 0.01, grid);

    EntropyAccumulator acc(grid);
    std::vector<bool> used(m, false);
    for (auto i : pool.mislabeled) {
      acc.add(bin_index(pts[i], grid));
      used[i] = true;
    }
    for (std::size_t s = pool.mislabeled.size(); s < res.size(); ++s) {
      double best = -1.0;
      for (auto c : pool.correct)
        if (!used[c]) best = std::max(best, acc.entropy_if_added(bin_index(pts[c], grid)));
      const auto chosen = res.selected[s];
      REQUIRE_FALSE(used[chosen]);
      REQUIRE(acc.entropy_if_added(bin_index(pts[chosen], grid)) == doctest::Approx(best).epsilon(1e-14));
      acc.add(bin_index(pts[chosen], grid));
      used[chosen] = true;
    }
  }
}

TEST_CASE("dd_curve") {
  const auto task = sample_task(5);
  MlpModel model({2, 8, 2}, 3);
  const std::vector<double> gammas{0.0, 0.25, 0.5, 0.99, 2.0};
  const auto curve = dd_curve(model, task, gammas, 10000, 7, BinGrid(100));
  const auto pool = build_pool(model, task, 10000, 7);
  CHECK(std::abs(curve.at(0.0).risk - pool.uniform_risk()) < 1e-9);
  double prev = 0.0;
  for (const auto& [g, res] : curve) {
    CHECK(res.risk >= prev);
    CHECK(res.risk <= dd_risk_bound(pool.uniform_risk(), g) + 1e-12);
    prev = res.risk;
  }

  std::vector<AdversarialResult> rows;
  for (const auto& [g, res] : curve) rows.push_back(res);
  std::ostringstream os;
  write_adversarial_csv(os, rows);
  CHECK(os.str().rfind("gamma,achieved_gap,risk,selection_size\n", 0) == 0);
}

TEST_CASE("pool construction errors") {
  CHECK_THROWS_AS(make_pool({{0.1, 0.1}}, {Label::kNegative}, {}), Error);
  const auto pool = rectangle_pool(0.1, 0.1, 0.2, 0.2, 100, 1);
  CHECK_THROWS_AS(greedy_adversarial(pool, -1.0, BinGrid(10)), Error);
}
