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

#include "ddrisk/adversarial.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <ostream>
#include <set>

#include "ddrisk/entropy.hpp"

namespace ddrisk {

double AdversarialPool::uniform_risk() const {
  if (points.empty()) throw Error("empty adversarial pool");
  return static_cast<double>(mislabeled.size()) / static_cast<double>(points.size());
}

AdversarialPool make_pool(std::vector<Point2> points, std::vector<Label> truth,
                          std::vector<Label> predicted) {
  if (points.size() != truth.size() || points.size() != predicted.size())
    throw Error("pool points, truth and predictions differ in length");
  AdversarialPool pool;
  pool.points = std::move(points);
  pool.truth = std::move(truth);
  pool.predicted = std::move(predicted);
  for (std::size_t i = 0; i < pool.points.size(); ++i)
    (pool.truth[i] == pool.predicted[i] ? pool.correct : pool.mislabeled).push_back(i);
  return pool;
}

namespace {

std::vector<Point2> uniform_points(std::size_t m, std::uint64_t seed) {
  if (m == 0) throw Error("pool size must be at least 1");
  Rng rng(seed);
  std::vector<Point2> pts(m);
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return pts;
}

std::vector<Label> truth_of(const GaussianMixtureTask& task, std::span<const Point2> pts) {
  std::vector<Label> t;
  t.reserve(pts.size());
  for (const auto& p : pts) t.push_back(true_label(task, p));
  return t;
}

}  // namespace

AdversarialPool build_pool(const Classifier& classifier, const GaussianMixtureTask& task,
                           std::size_t m, std::uint64_t seed) {
  auto pts = uniform_points(m, seed);
  auto truth = truth_of(task, pts);
  std::vector<Label> pred;
  pred.reserve(m);
  for (const auto& p : pts) pred.push_back(classifier(p));
  return make_pool(std::move(pts), std::move(truth), std::move(pred));
}

AdversarialPool build_pool(const MlpModel& model, const GaussianMixtureTask& task,
                           std::size_t m, std::uint64_t seed) {
  auto pts = uniform_points(m, seed);
  auto truth = truth_of(task, pts);
  auto pred = predict_batch(model, pts);
  return make_pool(std::move(pts), std::move(truth), std::move(pred));
}

AdversarialResult greedy_adversarial(const AdversarialPool& pool, double gamma,
                                     const BinGrid& grid) {
  if (!(gamma >= 0.0)) throw Error("gamma must be >= 0");
  if (pool.size() == 0) throw Error("empty adversarial pool");

  AdversarialResult res;
  res.gamma = gamma;
  res.num_mislabeled = pool.mislabeled.size();
  if (pool.mislabeled.empty()) {
    // Nothing to select; the entropy check does not apply.
    res.risk = 0.0;
    res.achieved_gap = 0.0;
    return res;
  }

  EntropyAccumulator acc(grid);
  res.selected = pool.mislabeled;
  for (std::size_t i : pool.mislabeled) acc.add(bin_index(pool.points[i], grid));

  // Remaining candidates per bin, in pool order.
  std::vector<std::deque<std::size_t>> candidates(static_cast<std::size_t>(grid.total_bins()));
  for (std::size_t i : pool.correct)
    candidates[static_cast<std::size_t>(bin_index(pool.points[i], grid))].push_back(i);
  // (selected count, bin) for every bin that still has candidates.
  std::set<std::pair<std::int64_t, int>> frontier;
  for (int b = 0; b < grid.total_bins(); ++b)
    if (!candidates[static_cast<std::size_t>(b)].empty()) frontier.emplace(acc.count(b), b);

  while (acc.gap() > gamma && !frontier.empty()) {
    const auto [count, bin] = *frontier.begin();
    frontier.erase(frontier.begin());
    auto& queue = candidates[static_cast<std::size_t>(bin)];
    res.selected.push_back(queue.front());
    queue.pop_front();
    acc.add(bin);
    if (!queue.empty()) frontier.emplace(count + 1, bin);
  }

  res.achieved_gap = acc.gap();
  res.exhausted = res.achieved_gap > gamma;
  res.risk = static_cast<double>(res.num_mislabeled) / static_cast<double>(res.selected.size());
  return res;
}

std::map<double, AdversarialResult> dd_curve(const AdversarialPool& pool,
                                             std::span<const double> gammas, const BinGrid& grid) {
  std::map<double, AdversarialResult> out;
  for (double g : gammas) out.emplace(g, greedy_adversarial(pool, g, grid));
  // Larger gamma stops no later on the same greedy path.
  double prev = -1.0;
  for (const auto& [g, r] : out) {
    if (r.risk < prev) throw Error("DD curve is not monotone in gamma");
    prev = r.risk;
  }
  return out;
}

std::map<double, AdversarialResult> dd_curve(const MlpModel& model, const GaussianMixtureTask& task,
                                             std::span<const double> gammas, std::size_t m,
                                             std::uint64_t seed, const BinGrid& grid) {
  return dd_curve(build_pool(model, task, m, seed), gammas, grid);
}

void write_adversarial_csv(std::ostream& os, std::span<const AdversarialResult> results) {
  os << "gamma,achieved_gap,risk,selection_size\n" << std::setprecision(17);
  for (const auto& r : results)
    os << r.gamma << ',' << r.achieved_gap << ',' << r.risk << ',' << r.size() << '\n';
}

}  // namespace ddrisk
