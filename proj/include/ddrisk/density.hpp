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

// Density estimators on the unit square used to build rebalancing weights.
//
// Three kinds are supported: a smoothed bin histogram, an isotropic Gaussian
// KDE, and an isotropic Gaussian mixture fitted by EM. Gaussian kernels and
// components are renormalized by their mass inside the square, so every model
// is a proper density on [0,1]^2.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ddrisk/core.hpp"

namespace ddrisk {

inline constexpr double kDensityFloor = 1e-12;

enum class DensityKind { kHistogram, kKde, kGmm };

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

struct HistogramDensity {
  BinGrid grid{1};
  std::vector<double> bin_density;  // per unit area
};

struct KdeDensity {
  double bandwidth = 0.0;
  std::vector<Point2> centers;
  std::vector<double> inv_square_mass;  // 1 / mass of each kernel on the square
};

struct GmmDensity {
  std::vector<Point2> means;
  std::vector<double> variances;  // per-axis variance of each component
  std::vector<double> mix_weights;
  std::vector<double> inv_square_mass;
};

class DensityModel {
 public:
  using Params = std::variant<HistogramDensity, KdeDensity, GmmDensity>;

  explicit DensityModel(Params params) : params_(std::move(params)) {}

  DensityKind kind() const;
  const Params& params() const { return params_; }

  // Density before flooring.
  double density(const Point2& p) const;
  // log(max(density, kDensityFloor)).
  double log_density(const Point2& p) const;

  nlohmann::json to_json() const;
  static DensityModel from_json(const nlohmann::json& j);

 private:
  Params params_;
};

DensityModel fit_histogram(std::span<const Point2> points, const BinGrid& grid,
                           double pseudocount = 1.0);
DensityModel fit_histogram(const Dataset& data, const BinGrid& grid,
                           double pseudocount = 1.0);

DensityModel fit_kde(std::span<const Point2> points, double bandwidth);
DensityModel fit_kde(const Dataset& data, double bandwidth);

// Scott's rule for a 2-D isotropic kernel: n^(-1/6) times the pooled std.
double scott_bandwidth(std::span<const Point2> points);

struct GmmConfig {
  int components = 8;
  int max_iters = 500;
  double tol = 1e-6;  // on the mean per-point log-likelihood
  std::uint64_t seed = 0;
  double variance_floor = 1e-6;
};

struct GmmFit {
  DensityModel model;
  // Mean per-point log-likelihood of the untruncated mixture, one entry per
  // E-step; entry 0 is the initialization.
  std::vector<double> log_likelihood;
  std::vector<int> reseeded_at;  // iterations where a starved component was reseeded
  int iterations = 0;
  bool converged = false;
};

GmmFit fit_gmm(std::span<const Point2> points, const GmmConfig& cfg);
GmmFit fit_gmm(const Dataset& data, const GmmConfig& cfg);

}  // namespace ddrisk
