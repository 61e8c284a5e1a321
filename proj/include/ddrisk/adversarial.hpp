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

// Greedy construction of an entropy-constrained adversarial test set.
//
// A pool of uniform points is split into the points a classifier gets wrong
// and the ones it gets right. The adversarial selection starts from every
// mislabeled point and keeps adding correctly labeled points, each time the one
// that raises the selection's binned entropy the most, until the entropy gap
// to uniform is within gamma. The mislabeled fraction of the selection is the
// approximate DD risk.
//
// Adding a point to a bin holding c selected points changes the plug-in
// entropy by an amount that depends only on c and decreases in c, so the best
// addition is any candidate from the least-filled bin that still has
// candidates. Ties go to the lowest bin index, then to pool order.

#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "ddrisk/core.hpp"
#include "ddrisk/learner.hpp"
#include "ddrisk/tasks.hpp"

namespace ddrisk {

inline constexpr std::size_t kDefaultPoolSize = 10'000;

struct AdversarialPool {
  std::vector<Point2> points;
  std::vector<Label> truth;
  std::vector<Label> predicted;
  std::vector<std::size_t> mislabeled;  // ascending pool indices
  std::vector<std::size_t> correct;     // ascending pool indices

  std::size_t size() const { return points.size(); }
  double uniform_risk() const;
};

using Classifier = std::function<Label(const Point2&)>;

AdversarialPool build_pool(const Classifier& classifier, const GaussianMixtureTask& task,
                           std::size_t m, std::uint64_t seed);
AdversarialPool build_pool(const MlpModel& model, const GaussianMixtureTask& task,
                           std::size_t m, std::uint64_t seed);
// Pool over given points and labelings.
AdversarialPool make_pool(std::vector<Point2> points, std::vector<Label> truth,
                          std::vector<Label> predicted);

struct AdversarialResult {
  double gamma = 0.0;
  std::vector<std::size_t> selected;  // mislabeled points first, then additions in order
  std::size_t num_mislabeled = 0;
  double achieved_gap = 0.0;
  double risk = 0.0;
  bool exhausted = false;  // ran out of candidates with the gap still above gamma

  std::size_t size() const { return selected.size(); }
};

AdversarialResult greedy_adversarial(const AdversarialPool& pool, double gamma,
                                     const BinGrid& grid);

// One greedy construction per gamma on a shared pool.
std::map<double, AdversarialResult> dd_curve(const AdversarialPool& pool,
                                             std::span<const double> gammas, const BinGrid& grid);
std::map<double, AdversarialResult> dd_curve(const MlpModel& model, const GaussianMixtureTask& task,
                                             std::span<const double> gammas, std::size_t m,
                                             std::uint64_t seed, const BinGrid& grid);

// CSV with header gamma,achieved_gap,risk,selection_size.
void write_adversarial_csv(std::ostream& os, std::span<const AdversarialResult> results);

}  // namespace ddrisk
