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

// Importance weights that push a non-uniform training sample toward the
// uniform distribution, and the risk estimators that consume them.

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ddrisk/core.hpp"
#include "ddrisk/density.hpp"

namespace ddrisk {

struct WeightConfig {
  double tau = 1.0;             // density exponent
  double beta_quantile = 0.99;  // cap at this quantile of the raw weights
  bool normalize = true;        // rescale to mean 1

  void validate() const;
};

struct WeightedDataset {
  Dataset base;
  std::vector<double> weights;
  double beta = 0.0;          // cap, in the same units as weights
  std::size_t clipped = 0;    // how many raw weights exceeded beta

  std::size_t size() const { return base.size(); }
  void validate() const;
};

using LogDensityFn = std::function<double(const Point2&)>;

// Weights w_i = min(p(x_i)^-tau, beta), beta the beta_quantile of the raw
// weights, optionally normalized to mean 1. The density must not have been
// fitted on `data` (see rebalance_cross_fit).
WeightedDataset rebalance_weights(const Dataset& data, const LogDensityFn& log_density,
                                  const WeightConfig& cfg);
WeightedDataset rebalance_weights(const Dataset& data, const DensityModel& model,
                                  const WeightConfig& cfg);

using DensityFitter = std::function<DensityModel(std::span<const Point2>)>;

// Two-fold cross fitting: the sample is split in half by a seeded permutation,
// a density is fitted on each half and evaluated on the other. Raw weights of
// both halves share one cap and one normalization. With same_set the density
// is fitted once on the full sample instead.
WeightedDataset rebalance_cross_fit(const Dataset& data, const DensityFitter& fitter,
                                    const WeightConfig& cfg, std::uint64_t seed,
                                    bool same_set = false);

WeightedDataset unit_weights(const Dataset& data);

// Linear-interpolation sample quantile (the default in R and NumPy).
double sample_quantile(std::vector<double> values, double q);

// (1/n) sum w_i loss_i.
double weighted_empirical_risk(std::span<const double> weights, std::span<const double> losses);
double weighted_empirical_risk(const WeightedDataset& wd, std::span<const Label> predictions);

// Self-normalized importance sampling estimate of the uniform risk:
// sum(loss_i / p(x_i)) / sum(1 / p(x_i)).
double is_uniform_risk(std::span<const Point2> points, std::span<const double> losses,
                       const std::function<double(const Point2&)>& density_at);
double is_uniform_risk(const Dataset& data, std::span<const Label> predictions,
                       const std::function<double(const Point2&)>& density_at);

// CSV with header x,y,label,weight.
void write_weighted_csv(std::ostream& os, const WeightedDataset& wd);
WeightedDataset read_weighted_csv(std::istream& is);

}  // namespace ddrisk
