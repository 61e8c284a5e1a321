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

// Closed-form DD risk under the zero-one loss.
//
// For a classifier with uniform risk r the worst test distribution with an
// entropy deficit of at most gamma puts mass eps uniformly on the error set
// and 1 - eps uniformly on its complement. Its deficit from the uniform
// entropy is KL(Bern(eps) || Bern(r)), so the DD risk is the largest eps in
// [r, 1] with KL(Bern(eps) || Bern(r)) <= gamma. This header provides that
// exact value, two upper bounds on it, and the l1 distance of a weighted
// sample to uniform.

#pragma once

#include <span>

#include "ddrisk/core.hpp"

namespace ddrisk {

// Entropy deficit of the worst-case distribution: KL(Bern(eps) || Bern(r)).
// Both arguments must lie strictly inside (0, 1).
double q_star_entropy_gap(double epsilon, double error_fraction);

// Same quantity with the 0 log 0 = 0 convention at eps in {0, 1}.
double bernoulli_kl(double epsilon, double r);

// Entropy of the piecewise-uniform density with mass eps on a set of volume
// error_volume inside a domain of volume domain_volume.
double q_star_entropy(double epsilon, double error_volume, double domain_volume = 1.0);

// Largest eps with KL(Bern(eps) || Bern(r)) <= gamma; 1 when r >= exp(-gamma).
// r = 0 yields 0.
double dd_risk_exact(double r, double gamma);

// Tangent-line branch for a given alpha in (r, 1).
double alpha_branch(double r, double gamma, double alpha);

struct DdBound {
  double value = 0.0;
  double additive = 0.0;      // r + sqrt(gamma / 2)
  double alpha_branch = 0.0;  // best tangent-line value found
  double alpha = 0.0;         // where it was found
  bool vacuous() const { return value > 1.0; }
};

inline constexpr int kAlphaGridPoints = 1024;

// Minimum of the additive and tangent-line branches, alpha optimized over a
// log-spaced grid on (r, 1) followed by golden-section refinement.
DdBound dd_risk_bound_detail(double r, double gamma);
double dd_risk_bound(double r, double gamma);

// Both branches evaluated at alpha = 1/2 with the (1 - eps) term dropped:
// min{(gamma + log 2) / -log r, r + sqrt(gamma / 2)}.
double dd_risk_bound_simplified(double r, double gamma);

// sum_b |1/k^2 - w_b| where w_b is the normalized weight mass in bin b.
double l1_to_uniform(std::span<const Point2> points, std::span<const double> weights,
                     const BinGrid& grid);
double l1_to_uniform(const Dataset& data, std::span<const double> weights,
                     const BinGrid& grid);

}  // namespace ddrisk
