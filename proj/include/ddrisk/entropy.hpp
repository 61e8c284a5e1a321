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

// Plug-in entropy of binned samples. Everything that measures how far a test
// distribution is from uniform goes through these functions.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ddrisk/core.hpp"

namespace ddrisk {

class BinnedHistogram {
 public:
  BinnedHistogram(BinGrid grid, std::vector<std::int64_t> counts);

  const BinGrid& grid() const { return grid_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  int occupied_bins() const;

 private:
  BinGrid grid_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_;
};

BinnedHistogram histogram(std::span<const Point2> points, const BinGrid& grid);

// sum over occupied bins of (c/m) log(m/c).
double binned_entropy(const BinnedHistogram& h);
double binned_entropy(std::span<const std::int64_t> counts);

// Plug-in entropy plus (occupied - 1) / (2m). Diagnostics only.
double miller_madow_entropy(const BinnedHistogram& h);

// log(k^2) - binned_entropy, clamped at zero.
double entropy_gap(const BinnedHistogram& h);
double entropy_gap(const BinnedHistogram& h, const BinGrid& grid);

// Running plug-in entropy of a multiset of bins with O(1) insertion.
// Tracks S = sum c log c so that H = log m - S / m.
class EntropyAccumulator {
 public:
  explicit EntropyAccumulator(const BinGrid& grid);

  void add(int bin);
  // Entropy the accumulator would have after add(bin).
  double entropy_if_added(int bin) const;

  double entropy() const;
  double gap() const;
  std::int64_t total() const { return total_; }
  std::int64_t count(int bin) const { return counts_[static_cast<std::size_t>(bin)]; }
  const BinGrid& grid() const { return grid_; }

 private:
  BinGrid grid_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  double sum_clogc_ = 0.0;
};

}  // namespace ddrisk
