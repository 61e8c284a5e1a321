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

#include "ddrisk/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ddrisk/tasks.hpp"

namespace ddrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double square_mass(const Point2& mu, double sd) {
  return unit_interval_mass(mu.x, sd) * unit_interval_mass(mu.y, sd);
}

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// log N(p; mu, var I_2)
double log_gauss2(const Point2& p, const Point2& mu, double var) {
  return -std::log(2.0 * std::numbers::pi * var) - sq_dist(p, mu) / (2.0 * var);
}

double logsumexp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_points(std::span<const Point2> points) {
  if (points.empty()) throw Error("density fit needs at least one point");
  for (const auto& p : points)
    if (!p.in_unit_square()) throw Error("density fit point outside unit square");
}

}  // namespace

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::kHistogram:
      return "histogram";
    case DensityKind::kKde:
      return "kde";
    case DensityKind::kGmm:
      return "gmm";
  }
  return "unknown";
}

DensityKind density_kind_from_string(const std::string& name) {
  if (name == "histogram") return DensityKind::kHistogram;
  if (name == "kde") return DensityKind::kKde;
  if (name == "gmm") return DensityKind::kGmm;
  throw Error("unknown density kind '" + name + "'");
}

DensityKind DensityModel::kind() const {
  return std::visit(overloaded{[](const HistogramDensity&) { return DensityKind::kHistogram; },
                               [](const KdeDensity&) { return DensityKind::kKde; },
                               [](const GmmDensity&) { return DensityKind::kGmm; }},
                    params_);
}

double DensityModel::density(const Point2& p) const {
  return std::visit(
      overloaded{
          [&](const HistogramDensity& h) {
            return h.bin_density[static_cast<std::size_t>(bin_index(p, h.grid))];
          },
          [&](const KdeDensity& k) {
            const double var = k.bandwidth * k.bandwidth;
            const double norm = 1.0 / (2.0 * std::numbers::pi * var);
            double s = 0.0;
            for (std::size_t i = 0; i < k.centers.size(); ++i)
              s += std::exp(-sq_dist(p, k.centers[i]) / (2.0 * var)) * k.inv_square_mass[i];
            return norm * s / static_cast<double>(k.centers.size());
          },
          [&](const GmmDensity& g) {
            double s = 0.0;
            for (std::size_t c = 0; c < g.means.size(); ++c)
              s += g.mix_weights[c] * std::exp(log_gauss2(p, g.means[c], g.variances[c])) *
                   g.inv_square_mass[c];
            return s;
          }},
      params_);
}

double DensityModel::log_density(const Point2& p) const {
  return std::log(std::max(density(p), kDensityFloor));
}

nlohmann::json DensityModel::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind());
  std::visit(overloaded{[&](const HistogramDensity& h) {
                          j["cells_per_axis"] = h.grid.cells_per_axis();
                          j["bin_density"] = h.bin_density;
                        },
                        [&](const KdeDensity& k) {
                          j["bandwidth"] = k.bandwidth;
                          auto& c = j["centers"] = nlohmann::json::array();
                          for (const auto& p : k.centers) c.push_back({p.x, p.y});
                        },
                        [&](const GmmDensity& g) {
                          auto& comps = j["components"] = nlohmann::json::array();
                          for (std::size_t c = 0; c < g.means.size(); ++c)
                            comps.push_back({{"mean", {g.means[c].x, g.means[c].y}},
                                             {"variance", g.variances[c]},
                                             {"weight", g.mix_weights[c]}});
                        }},
             params_);
  return j;
}

DensityModel DensityModel::from_json(const nlohmann::json& j) {
  switch (density_kind_from_string(j.at("kind").get<std::string>())) {
    case DensityKind::kHistogram: {
      HistogramDensity h;
      h.grid = BinGrid(j.at("cells_per_axis").get<int>());
      h.bin_density = j.at("bin_density").get<std::vector<double>>();
      if (h.bin_density.size() != static_cast<std::size_t>(h.grid.total_bins()))
        throw Error("histogram density has wrong number of bins");
      return DensityModel(std::move(h));
    }
    case DensityKind::kKde: {
      std::vector<Point2> centers;
      for (const auto& c : j.at("centers")) centers.push_back({c.at(0), c.at(1)});
      return fit_kde(centers, j.at("bandwidth").get<double>());
    }
    case DensityKind::kGmm: {
      GmmDensity g;
      for (const auto& c : j.at("components")) {
        const Point2 mu{c.at("mean").at(0), c.at("mean").at(1)};
        const double var = c.at("variance").get<double>();
        g.means.push_back(mu);
        g.variances.push_back(var);
        g.mix_weights.push_back(c.at("weight").get<double>());
        g.inv_square_mass.push_back(1.0 / square_mass(mu, std::sqrt(var)));
      }
      if (g.means.empty()) throw Error("GMM JSON has no components");
      return DensityModel(std::move(g));
    }
  }
  throw Error("unreachable density kind");
}

DensityModel fit_histogram(std::span<const Point2> points, const BinGrid& grid,
                           double pseudocount) {
  check_points(points);
  if (!(pseudocount >= 0.0)) throw Error("pseudocount must be non-negative");
  HistogramDensity h;
  h.grid = grid;
  h.bin_density.assign(static_cast<std::size_t>(grid.total_bins()), 0.0);
  for (const auto& p : points) h.bin_density[static_cast<std::size_t>(bin_index(p, grid))] += 1.0;
  const double denom = (static_cast<double>(points.size()) + grid.total_bins() * pseudocount) *
                       grid.cell_area();
  for (auto& d : h.bin_density) d = (d + pseudocount) / denom;
  return DensityModel(std::move(h));
}

DensityModel fit_histogram(const Dataset& data, const BinGrid& grid, double pseudocount) {
  const auto pts = data.points();
  return fit_histogram(pts, grid, pseudocount);
}

DensityModel fit_kde(std::span<const Point2> points, double bandwidth) {
  check_points(points);
  if (!(bandwidth > 0.0)) throw Error("KDE bandwidth must be positive");
  KdeDensity k;
  k.bandwidth = bandwidth;
  k.centers.assign(points.begin(), points.end());
  k.inv_square_mass.reserve(points.size());
  for (const auto& p : points) k.inv_square_mass.push_back(1.0 / square_mass(p, bandwidth));
  return DensityModel(std::move(k));
}

DensityModel fit_kde(const Dataset& data, double bandwidth) {
  const auto pts = data.points();
  return fit_kde(pts, bandwidth);
}

double scott_bandwidth(std::span<const Point2> points) {
  check_points(points);
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double v = 0.0;
  for (const auto& p : points) v += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
  const double sd = std::sqrt(v / (2.0 * n));
  return std::max(1e-3, sd * std::pow(n, -1.0 / 6.0));
}

GmmFit fit_gmm(std::span<const Point2> points, const GmmConfig& cfg) {
  check_points(points);
  const int K = cfg.components;
  if (K < 1) throw Error("GMM needs at least one component");
  if (points.size() < static_cast<std::size_t>(K))
    throw Error("GMM needs at least as many points as components");
  if (cfg.max_iters < 1) throw Error("GMM max_iters must be positive");

  const std::size_t n = points.size();
  const double nd = static_cast<double>(n);
  const auto Ku = static_cast<std::size_t>(K);
  Rng rng = Rng(cfg.seed).derive("gmm-init");

  // k-means++ seeding.
  std::vector<Point2> means;
  means.reserve(Ku);
  means.push_back(points[rng.below(n)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (means.size() < Ku) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], means.back()));
      total += d2[i];
    }
    std::size_t pick = rng.below(n);
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    means.push_back(points[pick]);
  }

  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= nd;
  my /= nd;
  double pooled = 0.0;
  for (const auto& p : points) pooled += sq_dist(p, {mx, my});
  pooled = std::max(cfg.variance_floor, pooled / (2.0 * nd));

  std::vector<double> vars(Ku, pooled);
  std::vector<double> pis(Ku, 1.0 / K);
  std::vector<double> resp(n * Ku);
  std::vector<double> logp(Ku);

  GmmFit fit{DensityModel(GmmDensity{}), {}, {}, 0, false};

  auto e_step = [&]() {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < Ku; ++c)
        logp[c] = std::log(pis[c]) + log_gauss2(points[i], means[c], vars[c]);
      const double lse = logsumexp(logp);
      ll += lse;
      for (std::size_t c = 0; c < Ku; ++c) resp[i * Ku + c] = std::exp(logp[c] - lse);
    }
    return ll / nd;
  };

  fit.log_likelihood.push_back(e_step());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    bool reseeded = false;
    for (std::size_t c = 0; c < Ku; ++c) {
      double nk = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * Ku + c];
        nk += r;
        sx += r * points[i].x;
        sy += r * points[i].y;
      }
      if (nk < 1e-8 * nd) {
        means[c] = points[rng.below(n)];
        vars[c] = pooled;
        pis[c] = 1.0 / nd;
        reseeded = true;
        continue;
      }
      means[c] = {sx / nk, sy / nk};
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += resp[i * Ku + c] * sq_dist(points[i], means[c]);
      vars[c] = std::max(cfg.variance_floor, ss / (2.0 * nk));
      pis[c] = nk / nd;
    }
    if (reseeded) {
      double s = 0.0;
      for (double p : pis) s += p;
      for (double& p : pis) p /= s;
      fit.reseeded_at.push_back(it);
    }
    const double ll = e_step();
    if (!std::isfinite(ll)) throw Error("GMM log-likelihood became non-finite");
    fit.log_likelihood.push_back(ll);
    fit.iterations = it;
    if (!reseeded && ll - fit.log_likelihood[fit.log_likelihood.size() - 2] < cfg.tol) {
      fit.converged = true;
      break;
    }
  }

  GmmDensity g;
  g.means = means;
  g.variances = vars;
  g.mix_weights = pis;
  for (std::size_t c = 0; c < Ku; ++c)
    g.inv_square_mass.push_back(1.0 / square_mass(means[c], std::sqrt(vars[c])));
  fit.model = DensityModel(std::move(g));
  return fit;
}

GmmFit fit_gmm(const Dataset& data, const GmmConfig& cfg) {
  const auto pts = data.points();
  return fit_gmm(pts, cfg);
}

}  // namespace ddrisk
