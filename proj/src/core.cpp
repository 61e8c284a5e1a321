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

#include "ddrisk/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddrisk {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

Label label_from_int(int v) {
  if (v == 0) return Label::kNegative;
  if (v == 1) return Label::kPositive;
  throw Error("label must be 0 or 1, got " + std::to_string(v));
}

std::vector<Point2> Dataset::points() const {
  std::vector<Point2> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.point);
  return out;
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

BinGrid::BinGrid(int cells_per_axis) : k_(cells_per_axis) {
  if (k_ < 1) throw Error("BinGrid needs at least one cell per axis");
}

int bin_index(const Point2& p, const BinGrid& grid) {
  const int k = grid.cells_per_axis();
  auto cell = [k](double v) {
    const int c = static_cast<int>(std::floor(v * k));
    return std::clamp(c, 0, k - 1);
  };
  return cell(p.x) + k * cell(p.y);
}

double zero_one_loss(Label pred, Label truth) { return pred == truth ? 0.0 : 1.0; }

bool RiskReport::valid() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(uniform_risk)) return false;
  for (const auto& [g, r] : dd_risk_by_gamma)
    if (!in01(r)) return false;
  for (const auto& [g, b] : bound_by_gamma)
    if (!(b >= 0.0)) return false;
  return true;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::result_type Rng::operator()() {
  ++counter_;
  return mix64(seed_ + counter_ * kGolden);
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error("Rng::below(0)");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  // Box-Muller, one variate per call so the stream has no hidden state.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix64(mix64(parent) ^ mix64(stream + kGolden));
}

std::uint64_t Rng::derive_seed(std::uint64_t parent, std::string_view stream) {
  // FNV-1a of the stream name.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(parent, h);
}

}  // namespace ddrisk
