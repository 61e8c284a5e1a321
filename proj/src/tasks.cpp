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

#include "ddrisk/tasks.hpp"

#include <cmath>
#include <numbers>

namespace ddrisk {

namespace {

constexpr int kMaxTaskDraws = 10'000;

GaussianMixtureTask draw_task(Rng rng, double component_std) {
  GaussianMixtureTask task;
  task.component_std = component_std;
  for (auto& m : task.means) {
    m.x = rng.uniform();
    m.y = rng.uniform();
  }
  return task;
}

}  // namespace

GaussianMixtureTask sample_task(std::uint64_t seed, double component_std) {
  if (!(component_std > 0.0)) throw Error("component_std must be positive");
  const Rng root(seed);
  for (int attempt = 0; attempt < kMaxTaskDraws; ++attempt) {
    GaussianMixtureTask task = draw_task(root.derive(attempt), component_std);
    task.seed = seed;
    task.rejected_draws = attempt;
    if (has_both_classes(task)) return task;
  }
  throw Error("could not draw a two-class task for seed " + std::to_string(seed));
}

Label true_label(const GaussianMixtureTask& task, const Point2& p) {
  // The normalizing constants are shared by all components and cancel.
  const double inv_two_var = 1.0 / (2.0 * task.component_std * task.component_std);
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t c = 0; c < task.means.size(); ++c) {
    const double dx = p.x - task.means[c].x;
    const double dy = p.y - task.means[c].y;
    const double k = std::exp(-(dx * dx + dy * dy) * inv_two_var);
    (task.class_of_component[c] == Label::kPositive ? pos : neg) += k;
  }
  return pos > neg ? Label::kPositive : Label::kNegative;
}

bool has_both_classes(const GaussianMixtureTask& task) {
  bool seen[2] = {false, false};
  for (int j = 0; j < kDegeneracyGrid; ++j) {
    for (int i = 0; i < kDegeneracyGrid; ++i) {
      const Point2 p{(i + 0.5) / kDegeneracyGrid, (j + 0.5) / kDegeneracyGrid};
      seen[to_int(true_label(task, p))] = true;
      if (seen[0] && seen[1]) return true;
    }
  }
  return false;
}

Dataset label_points(const GaussianMixtureTask& task,
                     const std::vector<Point2>& points, std::uint64_t seed) {
  Dataset out;
  out.seed = seed;
  out.samples.reserve(points.size());
  for (const auto& p : points) out.samples.push_back({p, true_label(task, p)});
  return out;
}

Dataset sample_uniform(const GaussianMixtureTask& task, std::size_t n,
                       std::uint64_t seed) {
  if (n == 0) throw Error("sample_uniform: n must be at least 1");
  Rng rng(seed);
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return label_points(task, pts, seed);
}

TruncatedGaussianSampler::TruncatedGaussianSampler(double sigma,
                                                   std::uint64_t retry_budget)
    : sigma_(sigma), retry_budget_(retry_budget) {
  if (!(sigma > 0.0)) throw Error("truncated Gaussian sigma must be positive");
  if (retry_budget == 0) throw Error("retry budget must be positive");
}

Point2 TruncatedGaussianSampler::draw(Rng& rng) const {
  for (std::uint64_t t = 0; t < retry_budget_; ++t) {
    const Point2 p{center().x + sigma_ * rng.normal(),
                   center().y + sigma_ * rng.normal()};
    if (p.in_unit_square()) return p;
  }
  throw Error("truncated Gaussian rejection budget exhausted (sigma=" +
              std::to_string(sigma_) + ")");
}

Dataset sample_truncated_gaussian(const GaussianMixtureTask& task, std::size_t n,
                                  double sigma, std::uint64_t seed,
                                  std::uint64_t retry_budget) {
  if (n == 0) throw Error("sample_truncated_gaussian: n must be at least 1");
  const TruncatedGaussianSampler sampler(sigma, retry_budget);
  Rng rng(seed);
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = sampler.draw(rng);
  return label_points(task, pts, seed);
}

double unit_interval_mass(double mu, double sigma) {
  const double s = sigma * std::numbers::sqrt2;
  return 0.5 * (std::erf((1.0 - mu) / s) - std::erf((0.0 - mu) / s));
}

double true_density_truncated_gaussian(const Point2& p, double sigma) {
  if (!(sigma > 0.0)) throw Error("sigma must be positive");
  const double z = unit_interval_mass(0.5, sigma);
  const double dx = p.x - 0.5;
  const double dy = p.y - 0.5;
  const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) /
                   (2.0 * std::numbers::pi * sigma * sigma);
  return g / (z * z);
}

void to_json(nlohmann::json& j, const GaussianMixtureTask& task) {
  j = nlohmann::json::object();
  j["seed"] = task.seed;
  j["component_std"] = task.component_std;
  j["rejected_draws"] = task.rejected_draws;
  auto& comps = j["components"] = nlohmann::json::array();
  for (std::size_t c = 0; c < task.means.size(); ++c) {
    comps.push_back({{"mean", {task.means[c].x, task.means[c].y}},
                     {"label", to_int(task.class_of_component[c])}});
  }
}

void from_json(const nlohmann::json& j, GaussianMixtureTask& task) {
  task.seed = j.at("seed").get<std::uint64_t>();
  task.component_std = j.at("component_std").get<double>();
  task.rejected_draws = j.value("rejected_draws", 0);
  const auto& comps = j.at("components");
  if (comps.size() != task.means.size())
    throw Error("task JSON must have exactly 4 components");
  int positives = 0;
  for (std::size_t c = 0; c < task.means.size(); ++c) {
    const auto& m = comps[c].at("mean");
    task.means[c] = {m.at(0).get<double>(), m.at(1).get<double>()};
    if (!task.means[c].in_unit_square()) throw Error("task mean outside unit square");
    task.class_of_component[c] = label_from_int(comps[c].at("label").get<int>());
    positives += to_int(task.class_of_component[c]);
  }
  if (positives != 2) throw Error("task JSON must have two components per class");
  if (!(task.component_std > 0.0)) throw Error("component_std must be positive");
}

}  // namespace ddrisk
