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

#include "ddrisk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace ddrisk {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error("gamma must be finite and >= 0");
}

void check_risk(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw Error("uniform risk must lie in [0, 1]");
}

// Infeasible or non-finite alphas are treated as +inf.
double alpha_objective(double r, double gamma, double alpha) {
  const double v = alpha_branch(r, gamma, alpha);
  return (std::isfinite(v) && v >= 0.0) ? v : kInf;
}

}  // namespace

double bernoulli_kl(double eps, double r) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error("epsilon must lie in [0, 1]");
  if (!(r > 0.0 && r < 1.0)) throw Error("error fraction must lie in (0, 1)");
  double kl = 0.0;
  if (eps > 0.0) kl += eps * std::log(eps / r);
  if (eps < 1.0) kl += (1.0 - eps) * std::log((1.0 - eps) / (1.0 - r));
  return std::max(0.0, kl);
}

double q_star_entropy_gap(double epsilon, double error_fraction) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(error_fraction > 0.0 && error_fraction < 1.0))
    throw Error("q_star_entropy_gap needs both arguments in (0, 1)");
  return bernoulli_kl(epsilon, error_fraction);
}

double q_star_entropy(double epsilon, double error_volume, double domain_volume) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must lie in (0, 1)");
  if (!(error_volume > 0.0 && error_volume < domain_volume))
    throw Error("error volume must lie strictly inside the domain volume");
  const double rest = domain_volume - error_volume;
  return epsilon * (std::log(error_volume) - std::log(epsilon)) +
         (1.0 - epsilon) * (std::log(rest) - std::log1p(-epsilon));
}

double dd_risk_exact(double r, double gamma) {
  check_risk(r);
  check_gamma(gamma);
  if (r == 0.0) return 0.0;
  if (-std::log(r) <= gamma || r >= std::exp(-gamma)) return 1.0;
  if (gamma == 0.0) return r;
  // KL(Bern(eps) || Bern(r)) increases strictly on [r, 1] from 0 to -log r > gamma.
  double lo = r;
  double hi = 1.0;
  while (hi - lo > kBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (bernoulli_kl(mid, r) <= gamma)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha_branch(double r, double gamma, double alpha) {
  const double num = gamma - std::log((1.0 - alpha) / (1.0 - r));
  const double den = std::log(alpha / (1.0 - alpha)) + std::log(1.0 / r - 1.0);
  return num / den;
}

DdBound dd_risk_bound_detail(double r, double gamma) {
  check_risk(r);
  check_gamma(gamma);
  DdBound out;
  out.additive = r + std::sqrt(gamma / 2.0);
  if (r == 0.0) {
    // Limit r -> 0 of the tangent branch.
    out.alpha_branch = 0.0;
    out.value = 0.0;
    return out;
  }
  if (gamma == 0.0) {
    out.alpha_branch = r;
    out.alpha = r;
    out.value = r;
    return out;
  }
  if (r == 1.0) {
    out.alpha_branch = kInf;
    out.value = out.additive;
    return out;
  }

  const int n = kAlphaGridPoints;
  const double log_r = std::log(r);
  std::vector<double> alphas(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    alphas[static_cast<std::size_t>(i)] = std::exp(log_r * (1.0 - (i + 1.0) / (n + 1.0)));

  int best = 0;
  double best_val = kInf;
  for (int i = 0; i < n; ++i) {
    const double v = alpha_objective(r, gamma, alphas[static_cast<std::size_t>(i)]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double best_alpha = alphas[static_cast<std::size_t>(best)];

  // The branch is unimodal in alpha; refine inside the neighbouring grid cells.
  double a = best > 0 ? alphas[static_cast<std::size_t>(best - 1)] : r;
  double b = best + 1 < n ? alphas[static_cast<std::size_t>(best + 1)] : 1.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = alpha_objective(r, gamma, c);
  double fd = alpha_objective(r, gamma, d);
  for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = alpha_objective(r, gamma, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = alpha_objective(r, gamma, d);
    }
  }
  if (fc < best_val) {
    best_val = fc;
    best_alpha = c;
  }
  if (fd < best_val) {
    best_val = fd;
    best_alpha = d;
  }

  out.alpha_branch = best_val;
  out.alpha = best_alpha;
  out.value = std::min(out.additive, out.alpha_branch);
  return out;
}

double dd_risk_bound(double r, double gamma) { return dd_risk_bound_detail(r, gamma).value; }

double dd_risk_bound_simplified(double r, double gamma) {
  check_risk(r);
  check_gamma(gamma);
  const double additive = r + std::sqrt(gamma / 2.0);
  if (r == 0.0) return 0.0;
  if (r == 1.0) return additive;
  return std::min((gamma + std::numbers::ln2) / -std::log(r), additive);
}

double l1_to_uniform(std::span<const Point2> points, std::span<const double> weights,
                     const BinGrid& grid) {
  if (points.size() != weights.size()) throw Error("points and weights differ in length");
  std::vector<double> mass(static_cast<std::size_t>(grid.total_bins()), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw Error("weights must be finite and non-negative");
    mass[static_cast<std::size_t>(bin_index(points[i], grid))] += weights[i];
    total += weights[i];
  }
  if (!(total > 0.0)) throw Error("l1_to_uniform: all weights are zero");
  const double u = 1.0 / grid.total_bins();
  double l1 = 0.0;
  for (double m : mass) l1 += std::abs(u - m / total);
  return l1;
}

double l1_to_uniform(const Dataset& data, std::span<const double> weights,
                     const BinGrid& grid) {
  const auto pts = data.points();
  return l1_to_uniform(pts, weights, grid);
}

}  // namespace ddrisk
