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
#include <set>

#include "ddrisk/entropy.hpp"
#include "ddrisk/tasks.hpp"

using namespace ddrisk;

namespace {

double brute_density(const GaussianMixtureTask& t, const Point2& p, Label cls) {
  double s = 0.0;
  const double v = t.component_std * t.component_std;
  for (int c = 0; c < 4; ++c) {
    if (t.class_of_component[c] != cls) continue;
    const double d2 = std::pow(p.x - t.means[c].x, 2) + std::pow(p.y - t.means[c].y, 2);
    s += std::exp(-d2 / (2 * v)) / (2 * std::numbers::pi * v);
  }
  return s;
}

}  // namespace

TEST_CASE("sample_task") {
  const auto t = sample_task(3);
  for (const auto& m : t.means) CHECK(m.in_unit_square());
  CHECK(t.class_of_component[0] == Label::kPositive);
  CHECK(t.class_of_component[1] == Label::kPositive);
  CHECK(t.class_of_component[2] == Label::kNegative);
  CHECK(t.class_of_component[3] == Label::kNegative);
  CHECK(sample_task(3) == t);
  CHECK(has_both_classes(t));

  std::set<std::pair<double, double>> firsts;
  for (std::uint64_t s = 0; s < 35; ++s) firsts.insert({sample_task(s).means[0].x, sample_task(s).means[0].y});
  CHECK(firsts.size() == 35);
}

TEST_CASE("degenerate tasks are rejected") {
  GaussianMixtureTask t;
  t.means = {Point2{0.5, 0.5}, Point2{0.5, 0.5}, Point2{0.5, 0.5}, Point2{0.5, 0.5}};
  CHECK_FALSE(has_both_classes(t));
  for (std::uint64_t s = 0; s < 50; ++s) REQUIRE(has_both_classes(sample_task(s)));
}

TEST_CASE("true_label") {
  GaussianMixtureTask t;
  t.means = {Point2{0.2, 0.2}, Point2{0.2, 0.25}, Point2{0.9, 0.9}, Point2{0.95, 0.9}};
  CHECK(true_label(t, {0.2, 0.2}) == Label::kPositive);
  CHECK(true_label(t, {0.9, 0.9}) == Label::kNegative);

  // Mirror-symmetric task: the midline is a tie and goes to the negative class.
  GaussianMixtureTask sym;
  sym.means = {Point2{0.3, 0.3}, Point2{0.3, 0.7}, Point2{0.7, 0.3}, Point2{0.7, 0.7}};
  CHECK(true_label(sym, {0.5, 0.4}) == Label::kNegative);
  CHECK(true_label(sym, {0.49, 0.4}) == Label::kPositive);

  const auto task = sample_task(11);
  Rng r(5);
  for (int i = 0; i < 2000; ++i) {
    const Point2 p{r.uniform(), r.uniform()};
    const bool pos = brute_density(task, p, Label::kPositive) > brute_density(task, p, Label::kNegative);
    REQUIRE(true_label(task, p) == (pos ? Label::kPositive : Label::kNegative));
  }
}

TEST_CASE("sample_uniform") {
  const auto task = sample_task(1);
  const auto d = sample_uniform(task, 10000, 9);
  CHECK(d.size() == 10000);
  CHECK(d.samples == sample_uniform(task, 10000, 9).samples);
  for (const auto& s : d.samples) REQUIRE(s.label == true_label(task, s.point));

  // Chi-square over 100 x 100 bins, 9999 dof: mean 9999, sd ~141.
  const auto h = histogram(d.points(), BinGrid(100));
  double chi2 = 0.0;
  for (auto c : h.counts()) chi2 += (c - 1.0) * (c - 1.0);
  CHECK(chi2 < 9999 + 5 * 141.4);
  CHECK(chi2 > 9999 - 5 * 141.4);
  CHECK_THROWS_AS(sample_uniform(task, 0, 1), Error);
}

TEST_CASE("sample_truncated_gaussian") {
  const auto task = sample_task(2);
  const auto narrow = sample_truncated_gaussian(task, 10000, 0.05, 4);
  int near = 0;
  double mx = 0.0, my = 0.0;
  for (const auto& s : narrow.samples) {
    REQUIRE(s.point.in_unit_square());
    near += std::hypot(s.point.x - 0.5, s.point.y - 0.5) < 0.25;
    mx += s.point.x;
    my += s.point.y;
  }
  CHECK(near > 9900);
  CHECK(mx / 10000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(my / 10000 == doctest::Approx(0.5).epsilon(0.01));

  const BinGrid g(100);
  const double h_wide = binned_entropy(histogram(sample_truncated_gaussian(task, 10000, 10.0, 4).points(), g));
  const double h_mid = binned_entropy(histogram(sample_truncated_gaussian(task, 10000, 0.2, 4).points(), g));
  const double h_uni = binned_entropy(histogram(sample_uniform(task, 10000, 4).points(), g));
  CHECK(h_wide > h_mid);
  CHECK(std::abs(h_wide - h_uni) < 0.05);

  CHECK(sample_truncated_gaussian(task, 50, 0.3, 8).samples ==
        sample_truncated_gaussian(task, 50, 0.3, 8).samples);
  CHECK_THROWS_AS(sample_truncated_gaussian(task, 10, 0.0, 1), Error);
  // A budget of one draw cannot cover sigma = 10 for long.
  CHECK_THROWS_AS(sample_truncated_gaussian(task, 1000, 10.0, 1, 1), Error);
}

TEST_CASE("true_density_truncated_gaussian") {
  CHECK(true_density_truncated_gaussian({0.1, 0.9}, 10.0) == doctest::Approx(1.0).epsilon(0.01));
  for (double sigma : {0.05, 0.1, 0.3, 1.0}) {
    const int q = 400;
    double sum = 0.0;
    for (int j = 0; j < q; ++j)
      for (int i = 0; i < q; ++i)
        sum += true_density_truncated_gaussian({(i + 0.5) / q, (j + 0.5) / q}, sigma);
    CHECK(sum / (q * q) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(true_density_truncated_gaussian({0.5, 0.5}, sigma) >
          true_density_truncated_gaussian({0.0, 0.0}, sigma));
  }
  CHECK(unit_interval_mass(0.5, 1e-3) == doctest::Approx(1.0));
}

TEST_CASE("task JSON round trip") {
  const auto t = sample_task(7);
  const nlohmann::json j = t;
  CHECK(j.get<GaussianMixtureTask>() == t);
  CHECK(j.dump() == nlohmann::json(sample_task(7)).dump());

  auto bad = j;
  bad["components"].erase(0);
  CHECK_THROWS(bad.get<GaussianMixtureTask>());
  bad = j;
  bad["components"][0]["label"] = 0;
  CHECK_THROWS(bad.get<GaussianMixtureTask>());
}
