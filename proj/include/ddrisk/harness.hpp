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

// Seeded experiment sweeps on the mixture-of-Gaussians benchmark.
//
// fig1: models trained on uniform samples of growing size; per gamma, the
//       greedy adversarial risk next to the closed-form bound.
// fig3: models trained on truncated Gaussian samples of growing sigma, with
//       and without rebalancing.
//
// Runs are independent and dispatched to a worker pool; results are merged in
// job order so the CSV is byte-identical for a given config.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddrisk/density.hpp"
#include "ddrisk/learner.hpp"
#include "ddrisk/rebalance.hpp"

namespace ddrisk {

struct ExperimentConfig {
  std::string experiment = "fig1";  // fig1 | fig3 | single
  int seeds = 35;
  std::uint64_t base_seed = 0;  // task seeds are base_seed, base_seed + 1, ...
  std::vector<int> n_values{100, 316, 1000, 3162, 10000};
  std::vector<double> sigma_values{0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 10.0};
  std::vector<double> gamma_values{0.25, 0.5, 0.99, 2.0};
  std::vector<int> fig3_n_values{500};
  std::vector<double> fig3_gamma_values{0.99};
  int grid_k = 100;
  int pool_m = 10'000;
  int l1_grid_k = 10;
  double component_std = 0.15;

  DensityKind density = DensityKind::kGmm;
  GmmConfig gmm{};
  double kde_bandwidth = 0.0;  // 0 = Scott's rule
  double histogram_pseudocount = 1.0;
  int histogram_k = 10;
  WeightConfig weighting{};
  bool same_set_density = false;

  TrainConfig learner = default_learner();
  int workers = 0;  // 0 = hardware concurrency
  std::string output = "";

  static TrainConfig default_learner();
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
// Parses TOML or JSON by file extension (.toml / .json).
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json load_config_document(const std::filesystem::path& path);

struct Fig1Row {
  std::uint64_t seed = 0;
  int n = 0;
  double gamma = 0.0;
  double uniform_risk = 0.0;
  double dd_risk_greedy = 0.0;
  double dd_bound = 0.0;
  double achieved_gap = 0.0;
  bool exhausted = false;
  std::string status = "ok";
};

struct Fig3Row {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  int n = 0;
  bool rebalanced = false;
  double gamma = 0.0;
  double uniform_risk = 0.0;
  double dd_risk = 0.0;
  double l1_to_uniform_weighted = 0.0;
  std::string status = "ok";
};

std::vector<Fig1Row> run_fig1(const ExperimentConfig& cfg);
std::vector<Fig3Row> run_fig3(const ExperimentConfig& cfg);
// One uniform-trained model: seed base_seed, n = n_values.front().
RiskReport run_single(const ExperimentConfig& cfg);
nlohmann::json to_json(const RiskReport& report);

// Data rows followed by p05 / p50 / p95 summary rows across seeds.
void write_fig1_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<Fig1Row>& rows);
void write_fig3_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<Fig3Row>& rows);

nlohmann::json run_manifest(const ExperimentConfig& cfg, double wall_seconds);

// Linear-interpolation percentile, q in [0, 100]; NaNs are ignored.
double percentile(std::vector<double> values, double q);

// Runs fn(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace ddrisk
