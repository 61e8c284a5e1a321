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

#include "ddrisk/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ddrisk {

namespace {

Eigen::Index count_params(const std::vector<int>& sizes) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<Eigen::Index>(sizes[l + 1]) * (sizes[l] + 1);
  return n;
}

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2 || sizes.front() != 2 || sizes.back() != 2)
    throw Error("MLP must map 2 inputs to 2 logits");
  for (int s : sizes)
    if (s < 1) throw Error("MLP layer sizes must be positive");
}

// Inputs are centered to [-1, 1] before the first layer.
Eigen::MatrixXd input_matrix(std::span<const Point2> points) {
  Eigen::MatrixXd x(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    x(0, static_cast<Eigen::Index>(i)) = 2.0 * points[i].x - 1.0;
    x(1, static_cast<Eigen::Index>(i)) = 2.0 * points[i].y - 1.0;
  }
  return x;
}

}  // namespace

void TrainConfig::validate() const {
  for (int h : hidden)
    if (h < 1) throw Error("hidden sizes must be positive");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must lie in [0, 1)");
  if (epochs < 1) throw Error("epochs must be positive");
  if (batch_size < 1) throw Error("batch size must be positive");
  if (min_steps < 0 || max_steps < 0) throw Error("step limits must be non-negative");
}

struct MlpModel::Forward {
  std::vector<Eigen::MatrixXd> activations;  // input, hidden..., logits
  std::vector<Eigen::MatrixXd> preacts;      // one per layer
};

MlpModel::MlpModel(std::vector<int> layer_sizes, std::uint64_t seed, bool zero_init_readout)
    : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  params_ = Eigen::VectorXd::Zero(count_params(sizes_));
  Rng rng = Rng(seed).derive("mlp-init");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const bool readout = l + 2 == sizes_.size();
    const double scale = std::sqrt(2.0 / in);  // He initialization
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(in) * out; ++i)
      params_[off + i] = (readout && zero_init_readout) ? 0.0 : scale * rng.normal();
    off += static_cast<Eigen::Index>(in) * out + out;  // biases start at zero
  }
  init_ = params_;
}

MlpModel::MlpModel(std::vector<int> layer_sizes, Eigen::VectorXd params, Eigen::VectorXd init)
    : sizes_(std::move(layer_sizes)), params_(std::move(params)), init_(std::move(init)) {
  check_sizes(sizes_);
  const Eigen::Index n = count_params(sizes_);
  if (params_.size() != n || init_.size() != n)
    throw Error("parameter vector does not match the architecture");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
}

MlpModel::Forward MlpModel::forward(std::span<const Point2> points) const {
  Forward f;
  f.activations.push_back(input_matrix(points));
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + offsets_[l] + out * in, out);
    Eigen::MatrixXd z = w * f.activations.back();
    z.colwise() += b;
    const bool readout = l + 2 == sizes_.size();
    f.activations.push_back(readout ? z : Eigen::MatrixXd(z.cwiseMax(0.0)));
    f.preacts.push_back(std::move(z));
  }
  return f;
}

Eigen::MatrixXd MlpModel::logits(std::span<const Point2> points) const {
  return forward(points).activations.back();
}

std::vector<bool> MlpModel::activation_pattern(std::span<const Point2> points) const {
  const Forward f = forward(points);
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < f.preacts.size(); ++l)
    for (Eigen::Index i = 0; i < f.preacts[l].size(); ++i)
      pattern.push_back(f.preacts[l].data()[i] > 0.0);
  return pattern;
}

double MlpModel::loss(std::span<const Point2> points, std::span<const Label> labels,
                      std::span<const double> weights) const {
  Eigen::VectorXd unused;
  return loss_and_gradient(points, labels, weights, unused);
}

double MlpModel::loss_and_gradient(std::span<const Point2> points, std::span<const Label> labels,
                                   std::span<const double> weights,
                                   Eigen::VectorXd& grad) const {
  if (points.size() != labels.size() || points.size() != weights.size())
    throw Error("points, labels and weights differ in length");
  if (points.empty()) throw Error("loss of an empty batch");
  const Forward f = forward(points);
  const Eigen::MatrixXd& z = f.activations.back();
  const auto batch = z.cols();
  const double inv_b = 1.0 / static_cast<double>(batch);

  // Softmax cross-entropy per column, via log-sum-exp.
  Eigen::MatrixXd delta(2, batch);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double m = std::max(z(0, i), z(1, i));
    const double lse = m + std::log(std::exp(z(0, i) - m) + std::exp(z(1, i) - m));
    const int y = to_int(labels[static_cast<std::size_t>(i)]);
    const double w = weights[static_cast<std::size_t>(i)];
    total += w * (lse - z(y, i));
    for (int c = 0; c < 2; ++c) delta(c, i) = w * inv_b * (std::exp(z(c, i) - lse) - (c == y));
  }
  const double loss = total * inv_b;

  grad = Eigen::VectorXd::Zero(params_.size());
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + out * in, out);
    gw.noalias() = delta * f.activations[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
      Eigen::MatrixXd back = w.transpose() * delta;
      delta = back.cwiseProduct((f.preacts[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json j;
  j["architecture"] = sizes_;
  j["params"] = std::vector<double>(params_.data(), params_.data() + params_.size());
  j["init"] = std::vector<double>(init_.data(), init_.data() + init_.size());
  return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  auto sizes = j.at("architecture").get<std::vector<int>>();
  const auto p = j.at("params").get<std::vector<double>>();
  const auto i = j.at("init").get<std::vector<double>>();
  Eigen::VectorXd params = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  Eigen::VectorXd init = Eigen::Map<const Eigen::VectorXd>(i.data(), static_cast<Eigen::Index>(i.size()));
  return MlpModel(std::move(sizes), std::move(params), std::move(init));
}

Label predict(const MlpModel& model, const Point2& p) {
  const Point2 one[1] = {p};
  const Eigen::MatrixXd z = model.logits(one);
  return z(1, 0) > z(0, 0) ? Label::kPositive : Label::kNegative;
}

std::vector<Label> predict_batch(const MlpModel& model, std::span<const Point2> points) {
  std::vector<Label> out;
  out.reserve(points.size());
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const auto chunk = points.subspan(start, std::min(kChunk, points.size() - start));
    const Eigen::MatrixXd z = model.logits(chunk);
    for (Eigen::Index i = 0; i < z.cols(); ++i)
      out.push_back(z(1, i) > z(0, i) ? Label::kPositive : Label::kNegative);
  }
  return out;
}

double wdl2(const MlpModel& model) { return (model.params() - model.init_params()).norm(); }

MlpModel make_model(const TrainConfig& cfg) {
  cfg.validate();
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2);
  return MlpModel(std::move(sizes), cfg.seed, cfg.zero_init_readout);
}

TrainTrace train_in_place(MlpModel& model, const WeightedDataset& wd, const TrainConfig& cfg) {
  cfg.validate();
  wd.validate();
  if (wd.size() == 0) throw Error("cannot train on an empty dataset");

  const std::size_t n = wd.size();
  const auto points = wd.base.points();
  const auto labels = wd.base.labels();
  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  const long steps_per_epoch = static_cast<long>((n + bs - 1) / bs);
  long total_steps = steps_per_epoch * cfg.epochs;
  if (cfg.min_steps > 0) total_steps = std::max<long>(total_steps, cfg.min_steps);
  if (cfg.max_steps > 0) total_steps = std::min<long>(total_steps, cfg.max_steps);

  Rng rng = Rng(cfg.seed).derive("minibatch-order");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Point2> bp;
  std::vector<Label> bl;
  std::vector<double> bw;
  Eigen::VectorXd grad;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(model.params().size());
  const double mu = cfg.optimizer == OptimizerKind::kSgdMomentum ? cfg.momentum : 0.0;

  TrainTrace trace;
  long step = 0;
  while (step < total_steps) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t start = 0; start < n && step < total_steps; start += bs, ++step) {
      const std::size_t end = std::min(n, start + bs);
      bp.clear();
      bl.clear();
      bw.clear();
      for (std::size_t k = start; k < end; ++k) {
        bp.push_back(points[order[k]]);
        bl.push_back(labels[order[k]]);
        bw.push_back(wd.weights[order[k]]);
      }
      const double l = model.loss_and_gradient(bp, bl, bw, grad);
      if (!std::isfinite(l) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "training diverged at step " << step << " (batch loss " << l << ")";
        throw Error(msg.str());
      }
      velocity = mu * velocity + grad;
      model.mutable_params() -= cfg.learning_rate * velocity;
    }
    const double epoch_loss = model.loss(points, labels, wd.weights);
    if (!std::isfinite(epoch_loss))
      throw Error("training loss became non-finite after step " + std::to_string(step));
    trace.epoch_loss.push_back(epoch_loss);
    trace.epoch_wdl2.push_back(wdl2(model));
  }
  trace.steps = static_cast<int>(step);
  return trace;
}

TrainResult train(const WeightedDataset& wd, const TrainConfig& cfg) {
  MlpModel model = make_model(cfg);
  TrainTrace trace = train_in_place(model, wd, cfg);
  return {std::move(model), std::move(trace)};
}

GradientCheck gradient_check(const MlpModel& model, std::span<const Point2> points,
                             std::span<const Label> labels, std::span<const double> weights,
                             std::uint64_t seed, int coordinates, double h) {
  Eigen::VectorXd analytic;
  model.loss_and_gradient(points, labels, weights, analytic);

  MlpModel probe = model;
  Rng rng = Rng(seed).derive("gradient-check");
  const auto np = static_cast<std::uint64_t>(model.num_params());
  const int wanted = std::min<int>(coordinates, static_cast<int>(np));
  GradientCheck out;
  // Kinked coordinates are replaced by fresh draws, up to a bounded budget.
  for (int attempt = 0; out.checked < wanted && attempt < 10 * wanted; ++attempt) {
    const auto k = static_cast<Eigen::Index>(rng.below(np));
    const double orig = probe.params()[k];
    probe.mutable_params()[k] = orig + h;
    const double lp = probe.loss(points, labels, weights);
    const auto pattern_p = probe.activation_pattern(points);
    probe.mutable_params()[k] = orig - h;
    const double lm = probe.loss(points, labels, weights);
    const auto pattern_m = probe.activation_pattern(points);
    probe.mutable_params()[k] = orig;
    if (pattern_p != pattern_m) {
      ++out.skipped_kinks;
      continue;
    }
    const double numeric = (lp - lm) / (2.0 * h);
    const double a = analytic[k];
    const double denom = std::max(1e-8, std::abs(a) + std::abs(numeric));
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / denom);
    ++out.checked;
  }
  return out;
}

Selection select_by_wdl2(std::span<const Candidate> candidates,
                         std::optional<double> loss_ceiling) {
  if (candidates.empty()) throw Error("select_by_wdl2 needs at least one candidate");
  std::size_t best_loss = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].trace.final_loss() < candidates[best_loss].trace.final_loss()) best_loss = i;
  const double ceiling = loss_ceiling.value_or(1.1 * candidates[best_loss].trace.final_loss());

  std::optional<std::size_t> pick;
  double pick_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].trace.final_loss() > ceiling) continue;
    if (candidates[i].model == nullptr) throw Error("candidate without a model");
    const double d = wdl2(*candidates[i].model);
    if (d < pick_dist) {
      pick_dist = d;
      pick = i;
    }
  }
  if (pick) return {*pick, false};
  return {best_loss, true};
}

}  // namespace ddrisk
