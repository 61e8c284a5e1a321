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

// Synthetic mixture-of-Gaussians classification tasks on the unit square and
// the training distributions used to sample from them.

#pragma once

#include <array>
#include <cstdint>

#include "json.hpp"

#include "ddrisk/core.hpp"

namespace ddrisk {

inline constexpr double kDefaultComponentStd = 0.15;
inline constexpr std::uint64_t kDefaultRetryBudget = 1'000'000;

// Four isotropic Gaussians. Components 0 and 1 are positive, 2 and 3 negative.
struct GaussianMixtureTask {
  std::array<Point2, 4> means{};
  double component_std = kDefaultComponentStd;
  std::array<Label, 4> class_of_component{Label::kPositive, Label::kPositive,
                                          Label::kNegative, Label::kNegative};
  std::uint64_t seed = 0;
  // Number of rejected (single-class) draws before this task was accepted.
  int rejected_draws = 0;

  friend bool operator==(const GaussianMixtureTask&,
                         const GaussianMixtureTask&) = default;
};

// Resolution of the grid used to reject single-class tasks.
inline constexpr int kDegeneracyGrid = 200;

GaussianMixtureTask sample_task(std::uint64_t seed,
                                double component_std = kDefaultComponentStd);

// 1 iff the positive mixture density strictly exceeds the negative one.
Label true_label(const GaussianMixtureTask& task, const Point2& p);

// True when both classes appear on a kDegeneracyGrid^2 cell-center grid.
bool has_both_classes(const GaussianMixtureTask& task);

Dataset label_points(const GaussianMixtureTask& task,
                     const std::vector<Point2>& points, std::uint64_t seed);

Dataset sample_uniform(const GaussianMixtureTask& task, std::size_t n,
                       std::uint64_t seed);

// Gaussian centered at (0.5, 0.5) restricted to the unit square by rejection.
class TruncatedGaussianSampler {
 public:
  explicit TruncatedGaussianSampler(double sigma,
                                    std::uint64_t retry_budget = kDefaultRetryBudget);

  Point2 draw(Rng& rng) const;
  double sigma() const { return sigma_; }
  static constexpr Point2 center() { return {0.5, 0.5}; }

 private:
  double sigma_;
  std::uint64_t retry_budget_;
};

Dataset sample_truncated_gaussian(const GaussianMixtureTask& task, std::size_t n,
                                  double sigma, std::uint64_t seed,
                                  std::uint64_t retry_budget = kDefaultRetryBudget);

// Density of the truncated sampler above, renormalized by the square's mass.
double true_density_truncated_gaussian(const Point2& p, double sigma);

// Mass of N(mu, sigma^2) on [0, 1].
double unit_interval_mass(double mu, double sigma);

void to_json(nlohmann::json& j, const GaussianMixtureTask& task);
void from_json(const nlohmann::json& j, GaussianMixtureTask& task);

}  // namespace ddrisk
