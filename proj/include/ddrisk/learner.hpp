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

// Small ReLU MLP classifier on the unit square trained with weighted
// cross-entropy, plus weight-distance-to-initialization (WDL2) bookkeeping.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ddrisk/core.hpp"
#include "ddrisk/rebalance.hpp"

namespace ddrisk {

enum class OptimizerKind { kSgd, kSgdMomentum };

struct TrainConfig {
  std::vector<int> hidden{64, 64};
  double learning_rate = 0.01;
  double momentum = 0.9;  // ignored by plain SGD
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  // Clamp on the total number of minibatch steps; 0 disables either side.
  int min_steps = 0;
  int max_steps = 0;
  bool zero_init_readout = false;

  void validate() const;
};

// Weights are stored flat, layer by layer: W (out x in, column major), then b.
class MlpModel {
 public:
  MlpModel(std::vector<int> layer_sizes, std::uint64_t seed, bool zero_init_readout = false);
  // Restores a model from explicit parameters and init snapshot.
  MlpModel(std::vector<int> layer_sizes, Eigen::VectorXd params, Eigen::VectorXd init);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& mutable_params() { return params_; }
  const Eigen::VectorXd& init_params() const { return init_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  // Logits, one column per point.
  Eigen::MatrixXd logits(std::span<const Point2> points) const;

  // Mean of w_i * cross_entropy_i over the batch, and its gradient.
  double loss(std::span<const Point2> points, std::span<const Label> labels,
              std::span<const double> weights) const;
  double loss_and_gradient(std::span<const Point2> points, std::span<const Label> labels,
                           std::span<const double> weights, Eigen::VectorXd& grad) const;

  // Sign pattern of every hidden pre-activation; used to detect kinks.
  std::vector<bool> activation_pattern(std::span<const Point2> points) const;

  nlohmann::json to_json() const;
  static MlpModel from_json(const nlohmann::json& j);

 private:
  struct Forward;
  Forward forward(std::span<const Point2> points) const;

  std::vector<int> sizes_;
  Eigen::VectorXd params_;
  Eigen::VectorXd init_;
  std::vector<Eigen::Index> offsets_;  // start of W for each layer
};

// argmax of the logits; ties go to label 0.
Label predict(const MlpModel& model, const Point2& p);
std::vector<Label> predict_batch(const MlpModel& model, std::span<const Point2> points);

double wdl2(const MlpModel& model);

struct TrainTrace {
  std::vector<double> epoch_loss;  // weighted cross-entropy on the full training set
  std::vector<double> epoch_wdl2;
  int steps = 0;
  double final_loss() const { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

struct TrainResult {
  MlpModel model;
  TrainTrace trace;
};

MlpModel make_model(const TrainConfig& cfg);
TrainResult train(const WeightedDataset& wd, const TrainConfig& cfg);
// Continues training an existing model; the init snapshot is left untouched.
TrainTrace train_in_place(MlpModel& model, const WeightedDataset& wd, const TrainConfig& cfg);

struct GradientCheck {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped_kinks = 0;  // coordinates whose finite difference crossed a ReLU kink
};

// Central differences with step h on `coordinates` random parameters.
GradientCheck gradient_check(const MlpModel& model, std::span<const Point2> points,
                             std::span<const Label> labels, std::span<const double> weights,
                             std::uint64_t seed, int coordinates = 100, double h = 1e-5);

struct Candidate {
  const MlpModel* model = nullptr;
  TrainTrace trace;
};

struct Selection {
  std::size_t index = 0;
  bool fell_back = false;  // no candidate met the loss ceiling
};

// Minimum WDL2 among candidates whose final loss is <= ceiling (default: 1.1
// times the best final loss); otherwise the minimum-loss candidate.
Selection select_by_wdl2(std::span<const Candidate> candidates,
                         std::optional<double> loss_ceiling = std::nullopt);

}  // namespace ddrisk
