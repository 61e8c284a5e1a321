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

// Shared domain types and numeric conventions.
//
// All logarithms are natural (entropies in nats) and all arithmetic is done in
// double precision. Randomness flows through `Rng`, a counter-based generator
// whose child streams are derived from (parent seed, stream id), so every
// stochastic operation is reproducible from a single 64-bit seed.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ddrisk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool in_unit_square() const {
    return x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0;
  }
  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }
Label label_from_int(int v);

struct LabeledSample {
  Point2 point;
  Label label = Label::kNegative;
  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<Point2> points() const;
  std::vector<Label> labels() const;
};

// Uniform k x k partition of the unit square.
class BinGrid {
 public:
  explicit BinGrid(int cells_per_axis = 100);

  int cells_per_axis() const { return k_; }
  int total_bins() const { return k_ * k_; }
  double cell_area() const { return 1.0 / (static_cast<double>(k_) * k_); }

 private:
  int k_;
};

// floor(x*k) + k*floor(y*k); a coordinate equal to 1.0 lands in the last cell.
int bin_index(const Point2& p, const BinGrid& grid);

double zero_one_loss(Label pred, Label truth);

struct RiskReport {
  double uniform_risk = 0.0;
  std::map<double, double> dd_risk_by_gamma;
  std::map<double, double> bound_by_gamma;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double sigma = std::numeric_limits<double>::quiet_NaN();

  // Every stored risk in [0, 1], every bound non-negative.
  bool valid() const;
};

// SplitMix64 counter mode: draw i is mix(seed + (i + 1) * golden).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // Child stream; independent of how many draws the parent has made.
  Rng derive(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }
  Rng derive(std::string_view stream) const {
    return Rng(derive_seed(seed_, stream));
  }

  static std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);
  static std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace ddrisk
