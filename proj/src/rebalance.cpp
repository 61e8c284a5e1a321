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

#include "ddrisk/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ddrisk {

namespace {

// Caps and normalizes raw weights in place.
void finish_weights(WeightedDataset& wd, std::vector<double> raw, const WeightConfig& cfg) {
  wd.beta = sample_quantile(raw, cfg.beta_quantile);
  wd.clipped = 0;
  for (double& w : raw) {
    if (w > wd.beta) {
      w = wd.beta;
      ++wd.clipped;
    }
  }
  if (cfg.normalize) {
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / raw.size();
    if (!(mean > 0.0) || !std::isfinite(mean)) throw Error("rebalance: degenerate weights");
    for (double& w : raw) w /= mean;
    wd.beta /= mean;
  }
  wd.weights = std::move(raw);
}

std::vector<double> raw_weights(std::span<const Point2> pts, const LogDensityFn& log_density,
                                double tau) {
  std::vector<double> raw(pts.size());
  const double floor_log = std::log(kDensityFloor);
  bool any_above_floor = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double ld = log_density(pts[i]);
    if (!std::isfinite(ld)) throw Error("rebalance: non-finite log-density");
    if (ld > floor_log) any_above_floor = true;
    raw[i] = std::exp(-tau * std::max(ld, floor_log));
  }
  if (!any_above_floor) throw Error("rebalance: every density is at the floor; density fit failed");
  return raw;
}

}  // namespace

void WeightConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error("tau must lie in (0, 1]");
  if (!(beta_quantile > 0.0 && beta_quantile < 1.0))
    throw Error("beta_quantile must lie strictly inside (0, 1)");
}

void WeightedDataset::validate() const {
  if (weights.size() != base.size()) throw Error("weights and samples differ in length");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weights must be finite and >= 0");
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

WeightedDataset rebalance_weights(const Dataset& data, const LogDensityFn& log_density,
                                  const WeightConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error("rebalance of an empty dataset");
  const auto pts = data.points();
  WeightedDataset wd;
  wd.base = data;
  finish_weights(wd, raw_weights(pts, log_density, cfg.tau), cfg);
  return wd;
}

WeightedDataset rebalance_weights(const Dataset& data, const DensityModel& model,
                                  const WeightConfig& cfg) {
  return rebalance_weights(
      data, [&model](const Point2& p) { return model.log_density(p); }, cfg);
}

WeightedDataset rebalance_cross_fit(const Dataset& data, const DensityFitter& fitter,
                                    const WeightConfig& cfg, std::uint64_t seed,
                                    bool same_set) {
  cfg.validate();
  if (data.empty()) throw Error("rebalance of an empty dataset");
  const auto pts = data.points();
  WeightedDataset wd;
  wd.base = data;

  if (same_set || pts.size() < 2) {
    const DensityModel model = fitter(pts);
    finish_weights(wd, raw_weights(pts, [&](const Point2& p) { return model.log_density(p); },
                                   cfg.tau),
                   cfg);
    return wd;
  }

  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng(seed).derive("cross-fit");
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  const std::size_t half = perm.size() / 2;
  std::vector<Point2> fold[2];
  for (std::size_t i = 0; i < perm.size(); ++i) fold[i < half ? 0 : 1].push_back(pts[perm[i]]);

  std::vector<double> raw(pts.size());
  for (int f = 0; f < 2; ++f) {
    const DensityModel model = fitter(fold[1 - f]);
    const auto w = raw_weights(fold[f], [&](const Point2& p) { return model.log_density(p); },
                               cfg.tau);
    const std::size_t offset = f == 0 ? 0 : half;
    for (std::size_t i = 0; i < w.size(); ++i) raw[perm[offset + i]] = w[i];
  }
  finish_weights(wd, std::move(raw), cfg);
  return wd;
}

WeightedDataset unit_weights(const Dataset& data) {
  WeightedDataset wd;
  wd.base = data;
  wd.weights.assign(data.size(), 1.0);
  wd.beta = 1.0;
  return wd;
}

double weighted_empirical_risk(std::span<const double> weights, std::span<const double> losses) {
  if (weights.size() != losses.size()) throw Error("weights and losses differ in length");
  if (weights.empty()) throw Error("weighted risk of an empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * losses[i];
  return s / static_cast<double>(weights.size());
}

double weighted_empirical_risk(const WeightedDataset& wd, std::span<const Label> predictions) {
  if (predictions.size() != wd.size()) throw Error("predictions and samples differ in length");
  std::vector<double> losses(wd.size());
  for (std::size_t i = 0; i < wd.size(); ++i)
    losses[i] = zero_one_loss(predictions[i], wd.base.samples[i].label);
  return weighted_empirical_risk(wd.weights, losses);
}

double is_uniform_risk(std::span<const Point2> points, std::span<const double> losses,
                       const std::function<double(const Point2&)>& density_at) {
  if (points.size() != losses.size()) throw Error("points and losses differ in length");
  if (points.empty()) throw Error("importance sampling estimate of an empty set");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double p = density_at(points[i]);
    if (!(p > 0.0) || !std::isfinite(p))
      throw Error("importance sampling needs a positive density at every sample");
    num += losses[i] / p;
    den += 1.0 / p;
  }
  return num / den;
}

double is_uniform_risk(const Dataset& data, std::span<const Label> predictions,
                       const std::function<double(const Point2&)>& density_at) {
  if (predictions.size() != data.size()) throw Error("predictions and samples differ in length");
  std::vector<double> losses(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    losses[i] = zero_one_loss(predictions[i], data.samples[i].label);
  const auto pts = data.points();
  return is_uniform_risk(pts, losses, density_at);
}

void write_weighted_csv(std::ostream& os, const WeightedDataset& wd) {
  wd.validate();
  os << "x,y,label,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < wd.size(); ++i) {
    const auto& s = wd.base.samples[i];
    os << s.point.x << ',' << s.point.y << ',' << to_int(s.label) << ',' << wd.weights[i] << '\n';
  }
}

WeightedDataset read_weighted_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,label,weight", 0) != 0)
    throw Error("weighted CSV must start with header x,y,label,weight");
  WeightedDataset wd;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x, y, w;
    int label;
    char c1, c2, c3;
    if (!(row >> x >> c1 >> y >> c2 >> label >> c3 >> w) || c1 != ',' || c2 != ',' || c3 != ',')
      throw Error("malformed weighted CSV row: " + line);
    wd.base.samples.push_back({{x, y}, label_from_int(label)});
    wd.weights.push_back(w);
  }
  wd.validate();
  wd.beta = wd.weights.empty() ? 0.0 : *std::max_element(wd.weights.begin(), wd.weights.end());
  return wd;
}

}  // namespace ddrisk
