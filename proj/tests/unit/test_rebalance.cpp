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

#include "ddrisk/bounds.hpp"
#include "ddrisk/rebalance.hpp"
#include "ddrisk/tasks.hpp"

using namespace ddrisk;

namespace {

LogDensityFn truncated_log_density(double sigma) {
  return [sigma](const Point2& p) { return std::log(true_density_truncated_gaussian(p, sigma)); };
}

Label band_classifier(const Point2& p) { return p.x + 0.5 * p.y > 0.6 ? Label::kPositive : Label::kNegative; }

}  // namespace

TEST_CASE("constant density gives unit weights") {
  const auto d = sample_uniform(sample_task(0), 200, 1);
  const auto wd = rebalance_weights(d, [](const Point2&) { return std::log(3.0); }, WeightConfig{});
  for (double w : wd.weights) CHECK(w == doctest::Approx(1.0));

  WeightConfig flat;
  flat.tau = 1e-9;
  const auto wt = rebalance_weights(sample_truncated_gaussian(sample_task(0), 200, 0.2, 1),
                                    truncated_log_density(0.2), flat);
  for (double w : wt.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("weights favour the corners and are capped") {
  const auto d = sample_truncated_gaussian(sample_task(0), 2000, 0.2, 3);
  WeightConfig raw_cfg;
  raw_cfg.normalize = false;
  const auto wd = rebalance_weights(d, truncated_log_density(0.2), raw_cfg);
  double center = 0.0, corner = 0.0;
  int nc = 0, nk = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& p = d.samples[i].point;
    const double r = std::hypot(p.x - 0.5, p.y - 0.5);
    if (r < 0.1) {
      center = std::max(center, wd.weights[i]);
      ++nc;
    }
    if (r > 0.4) {
      corner = corner == 0.0 ? wd.weights[i] : std::min(corner, wd.weights[i]);
      ++nk;
    }
  }
  REQUIRE(nc > 0);
  REQUIRE(nk > 0);
  CHECK(corner > center);

  // The top 1% of raw weights sit at beta after capping.
  std::vector<double> raw;
  for (const auto& s : d.samples) raw.push_back(1.0 / true_density_truncated_gaussian(s.point, 0.2));
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (raw[i] >= sorted[sorted.size() - 20]) CHECK(wd.weights[i] == wd.beta);
  CHECK(*std::max_element(wd.weights.begin(), wd.weights.end()) <= wd.beta);
  CHECK(static_cast<double>(wd.clipped) / d.size() <= 0.01 + 1.0 / d.size());
}

TEST_CASE("normalized weights are scale invariant and capped") {
  const auto d = sample_truncated_gaussian(sample_task(0), 500, 0.3, 4);
  const auto a = rebalance_weights(d, truncated_log_density(0.3), WeightConfig{});
  const auto b = rebalance_weights(
      d, [](const Point2& p) { return std::log(7.5 * true_density_truncated_gaussian(p, 0.3)); },
      WeightConfig{});
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.weights[i] == doctest::Approx(b.weights[i]).epsilon(1e-12));
    mean += a.weights[i];
  }
  CHECK(mean / a.size() == doctest::Approx(1.0));
  CHECK(*std::max_element(a.weights.begin(), a.weights.end()) <= a.beta);
}

TEST_CASE("rebalancing errors") {
  const auto d = sample_uniform(sample_task(0), 20, 1);
  CHECK_THROWS_AS(rebalance_weights(d, [](const Point2&) { return -100.0; }, WeightConfig{}), Error);
  WeightConfig bad;
  bad.beta_quantile = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = WeightConfig{};
  bad.tau = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.tau = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("cross fitting is held out and deterministic") {
  const auto d = sample_truncated_gaussian(sample_task(0), 501, 0.2, 9);
  std::vector<std::size_t> fit_sizes;
  DensityFitter fitter = [&](std::span<const Point2> pts) {
    fit_sizes.push_back(pts.size());
    return fit_kde(pts, 0.08);
  };
  const auto a = rebalance_cross_fit(d, fitter, WeightConfig{}, 5);
  CHECK(fit_sizes.size() == 2);
  CHECK(fit_sizes[0] + fit_sizes[1] == 501);
  const auto b = rebalance_cross_fit(d, fitter, WeightConfig{}, 5);
  CHECK(a.weights == b.weights);
  fit_sizes.clear();
  rebalance_cross_fit(d, fitter, WeightConfig{}, 5, true);
  CHECK(fit_sizes == std::vector<std::size_t>{501});
}

TEST_CASE("rebalancing moves the sample toward uniform") {
  const BinGrid g(10);
  for (double sigma : {0.1, 0.2, 0.3}) {
    int kde_wins = 0;
    int true_wins = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      const auto d = sample_truncated_gaussian(sample_task(s), 500, sigma, 100 + s);
      const std::vector<double> ones(d.size(), 1.0);
      const double base = l1_to_uniform(d, ones, g);
      const auto wk = rebalance_cross_fit(
          d, [](std::span<const Point2> pts) { return fit_kde(pts, scott_bandwidth(pts)); }, WeightConfig{}, s);
      kde_wins += l1_to_uniform(d, wk.weights, g) < base;
      const auto wt = rebalance_weights(
          d, [&](const Point2& p) { return std::log(true_density_truncated_gaussian(p, sigma)); },
          WeightConfig{});
      true_wins += l1_to_uniform(d, wt.weights, g) < base;
    }
    CHECK(kde_wins >= 18);
    CHECK(true_wins >= 18);
  }
}

TEST_CASE("weighted_empirical_risk") {
  CHECK(weighted_empirical_risk(std::vector<double>{2, 0}, std::vector<double>{0.5, 1.0}) ==
        doctest::Approx(0.5));
  CHECK(weighted_empirical_risk(std::vector<double>{3, 9}, std::vector<double>{0, 0}) == 0.0);
  CHECK(weighted_empirical_risk(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 0, 0, 1}) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(weighted_empirical_risk(std::vector<double>{1}, std::vector<double>{1, 0}), Error);
}

TEST_CASE("is_uniform_risk") {
  const std::vector<Point2> pts{{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.2}};
  const std::vector<double> losses{1, 0, 1};
  CHECK(is_uniform_risk(pts, losses, [](const Point2&) { return 2.0; }) == doctest::Approx(2.0 / 3));
  CHECK(is_uniform_risk(std::span(pts).first(1), std::span(losses).first(1),
                        [](const Point2&) { return 0.3; }) == 1.0);
  CHECK_THROWS_AS(is_uniform_risk(pts, losses, [](const Point2&) { return 0.0; }), Error);

  // Analytic classifier against quadrature truth.
  const int q = 400;
  double truth = 0.0;
  const auto task = sample_task(4);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) {
      const Point2 p{(i + 0.5) / q, (j + 0.5) / q};
      truth += band_classifier(p) != true_label(task, p);
    }
  truth /= q * q;
  const auto d = sample_truncated_gaussian(task, 10000, 0.3, 77);
  std::vector<Label> pred;
  for (const auto& s : d.samples) pred.push_back(band_classifier(s.point));
  const double est =
      is_uniform_risk(d, pred, [](const Point2& p) { return true_density_truncated_gaussian(p, 0.3); });
  CHECK(std::abs(est - truth) < 0.02);
}

TEST_CASE("weighted CSV round trip") {
  const auto d = sample_truncated_gaussian(sample_task(0), 30, 0.3, 1);
  const auto wd = rebalance_weights(d, truncated_log_density(0.3), WeightConfig{});
  std::stringstream ss;
  write_weighted_csv(ss, wd);
  const auto back = read_weighted_csv(ss);
  CHECK(back.base.samples == wd.base.samples);
  CHECK(back.weights == wd.weights);
  std::stringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_weighted_csv(bad), Error);
}

TEST_CASE("sample_quantile") {
  CHECK(sample_quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(sample_quantile({5}, 0.99) == 5.0);
  CHECK(sample_quantile({0, 10}, 0.99) == doctest::Approx(9.9));
}
