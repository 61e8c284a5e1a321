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

#include "ddrisk/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ddrisk {

namespace {

double clogc(std::int64_t c) {
  return c > 0 ? static_cast<double>(c) * std::log(static_cast<double>(c)) : 0.0;
}

}  // namespace

BinnedHistogram::BinnedHistogram(BinGrid grid, std::vector<std::int64_t> counts)
    : grid_(grid), counts_(std::move(counts)) {
  if (counts_.size() != static_cast<std::size_t>(grid_.total_bins()))
    throw Error("histogram size does not match grid");
  if (std::any_of(counts_.begin(), counts_.end(), [](auto c) { return c < 0; }))
    throw Error("histogram counts must be non-negative");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
  if (total_ < 1) throw Error("histogram must hold at least one point");
}

int BinnedHistogram::occupied_bins() const {
  return static_cast<int>(
      std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
}

BinnedHistogram histogram(std::span<const Point2> points, const BinGrid& grid) {
  if (points.empty()) throw Error("histogram of an empty point set");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(grid.total_bins()), 0);
  for (const auto& p : points) ++counts[static_cast<std::size_t>(bin_index(p, grid))];
  return BinnedHistogram(grid, std::move(counts));
}

double binned_entropy(std::span<const std::int64_t> counts) {
  std::int64_t m = 0;
  double s = 0.0;
  for (auto c : counts) {
    m += c;
    s += clogc(c);
  }
  if (m <= 0) throw Error("entropy of an empty histogram");
  const double md = static_cast<double>(m);
  const double hmax = std::log(static_cast<double>(counts.size()));
  return std::clamp(std::log(md) - s / md, 0.0, hmax);
}

double binned_entropy(const BinnedHistogram& h) { return binned_entropy(h.counts()); }

double miller_madow_entropy(const BinnedHistogram& h) {
  return binned_entropy(h) +
         (h.occupied_bins() - 1) / (2.0 * static_cast<double>(h.total()));
}

double entropy_gap(const BinnedHistogram& h, const BinGrid& grid) {
  const double hmax = std::log(static_cast<double>(grid.total_bins()));
  return std::max(0.0, hmax - binned_entropy(h));
}

double entropy_gap(const BinnedHistogram& h) { return entropy_gap(h, h.grid()); }

EntropyAccumulator::EntropyAccumulator(const BinGrid& grid)
    : grid_(grid), counts_(static_cast<std::size_t>(grid.total_bins()), 0) {}

void EntropyAccumulator::add(int bin) {
  auto& c = counts_.at(static_cast<std::size_t>(bin));
  sum_clogc_ += clogc(c + 1) - clogc(c);
  ++c;
  ++total_;
}

double EntropyAccumulator::entropy_if_added(int bin) const {
  const auto c = counts_.at(static_cast<std::size_t>(bin));
  const double m = static_cast<double>(total_ + 1);
  return std::log(m) - (sum_clogc_ + clogc(c + 1) - clogc(c)) / m;
}

double EntropyAccumulator::entropy() const {
  if (total_ == 0) return 0.0;
  const double m = static_cast<double>(total_);
  return std::max(0.0, std::log(m) - sum_clogc_ / m);
}

double EntropyAccumulator::gap() const {
  return std::max(0.0, std::log(static_cast<double>(grid_.total_bins())) - entropy());
}

}  // namespace ddrisk
