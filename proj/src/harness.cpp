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

#include "ddrisk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "toml.hpp"

#include "ddrisk/adversarial.hpp"
#include "ddrisk/bounds.hpp"
#include "ddrisk/tasks.hpp"

#ifndef DDRISK_GIT_HASH
#define DDRISK_GIT_HASH "unknown"
#endif

namespace ddrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v, char sep = ';') {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << sep;
    if constexpr (std::is_floating_point_v<T>)
      os << fmt_double(v[i]);
    else
      os << v[i];
  }
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw Error("unsupported TOML value type in config");
}

std::uint64_t task_seed(const ExperimentConfig& cfg, int i) {
  return cfg.base_seed + static_cast<std::uint64_t>(i);
}

std::string optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::kSgd ? "sgd" : "sgd_momentum";
}

OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  throw Error("unknown optimizer '" + s + "'");
}

DensityModel fit_density(const ExperimentConfig& cfg, std::span<const Point2> pts,
                         std::uint64_t seed) {
  switch (cfg.density) {
    case DensityKind::kHistogram:
      return fit_histogram(pts, BinGrid(cfg.histogram_k), cfg.histogram_pseudocount);
    case DensityKind::kKde:
      return fit_kde(pts, cfg.kde_bandwidth > 0.0 ? cfg.kde_bandwidth : scott_bandwidth(pts));
    case DensityKind::kGmm: {
      GmmConfig g = cfg.gmm;
      g.seed = seed;
      g.components = std::min<int>(g.components, static_cast<int>(pts.size()));
      return fit_gmm(pts, g).model;
    }
  }
  throw Error("unreachable density kind");
}

std::string learner_echo(const TrainConfig& t) {
  std::ostringstream os;
  os << join(t.hidden, ';') << ',' << fmt_double(t.learning_rate) << ','
     << fmt_double(t.momentum) << ',' << optimizer_name(t.optimizer) << ',' << t.epochs << ','
     << t.batch_size << ',' << t.min_steps << ',' << t.max_steps;
  return os.str();
}

constexpr const char* kLearnerEchoHeader =
    "hidden,learning_rate,momentum,optimizer,epochs,batch_size,min_steps,max_steps";

}  // namespace

TrainConfig ExperimentConfig::default_learner() {
  TrainConfig t;
  t.hidden = {64, 64};
  t.learning_rate = 0.01;
  t.momentum = 0.9;
  t.epochs = 100;
  t.batch_size = 32;
  t.min_steps = 1000;
  t.max_steps = 8000;
  return t;
}

void ExperimentConfig::validate() const {
  if (experiment != "fig1" && experiment != "fig3" && experiment != "single")
    throw Error("experiment must be fig1, fig3 or single");
  if (seeds < 1) throw Error("seeds must be >= 1");
  if (n_values.empty() || gamma_values.empty() || sigma_values.empty() ||
      fig3_n_values.empty() || fig3_gamma_values.empty())
    throw Error("experiment grids must be non-empty");
  for (int n : n_values)
    if (n < 1) throw Error("n values must be >= 1");
  for (int n : fig3_n_values)
    if (n < 1) throw Error("n values must be >= 1");
  for (double s : sigma_values)
    if (!(s > 0.0)) throw Error("sigma values must be positive");
  for (double g : gamma_values)
    if (!(g >= 0.0)) throw Error("gamma values must be >= 0");
  for (double g : fig3_gamma_values)
    if (!(g >= 0.0)) throw Error("gamma values must be >= 0");
  if (grid_k < 1 || l1_grid_k < 1 || histogram_k < 1) throw Error("grid sizes must be >= 1");
  if (pool_m < 1) throw Error("pool_m must be >= 1");
  if (!(component_std > 0.0)) throw Error("component_std must be positive");
  weighting.validate();
  learner.validate();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"seeds", c.seeds},
          {"base_seed", c.base_seed},
          {"n_values", c.n_values},
          {"sigma_values", c.sigma_values},
          {"gamma_values", c.gamma_values},
          {"fig3_n_values", c.fig3_n_values},
          {"fig3_gamma_values", c.fig3_gamma_values},
          {"grid_k", c.grid_k},
          {"pool_m", c.pool_m},
          {"l1_grid_k", c.l1_grid_k},
          {"component_std", c.component_std},
          {"density",
           {{"kind", to_string(c.density)},
            {"gmm_components", c.gmm.components},
            {"gmm_max_iters", c.gmm.max_iters},
            {"gmm_tol", c.gmm.tol},
            {"kde_bandwidth", c.kde_bandwidth},
            {"histogram_pseudocount", c.histogram_pseudocount},
            {"histogram_k", c.histogram_k},
            {"same_set", c.same_set_density}}},
          {"weighting",
           {{"tau", c.weighting.tau},
            {"beta_quantile", c.weighting.beta_quantile},
            {"normalize", c.weighting.normalize}}},
          {"learner",
           {{"hidden", c.learner.hidden},
            {"learning_rate", c.learner.learning_rate},
            {"momentum", c.learner.momentum},
            {"optimizer", optimizer_name(c.learner.optimizer)},
            {"epochs", c.learner.epochs},
            {"batch_size", c.learner.batch_size},
            {"min_steps", c.learner.min_steps},
            {"max_steps", c.learner.max_steps}}},
          {"workers", c.workers},
          {"output", c.output}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a table/object");
  ExperimentConfig c;
  try {
    c.experiment = j.value("experiment", c.experiment);
    c.seeds = j.value("seeds", c.seeds);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.n_values = j.value("n_values", c.n_values);
    c.sigma_values = j.value("sigma_values", c.sigma_values);
    c.gamma_values = j.value("gamma_values", c.gamma_values);
    c.fig3_n_values = j.value("fig3_n_values", c.fig3_n_values);
    c.fig3_gamma_values = j.value("fig3_gamma_values", c.fig3_gamma_values);
    c.grid_k = j.value("grid_k", c.grid_k);
    c.pool_m = j.value("pool_m", c.pool_m);
    c.l1_grid_k = j.value("l1_grid_k", c.l1_grid_k);
    c.component_std = j.value("component_std", c.component_std);
    if (j.contains("density")) {
      const auto& d = j.at("density");
      c.density = density_kind_from_string(d.value("kind", to_string(c.density)));
      c.gmm.components = d.value("gmm_components", c.gmm.components);
      c.gmm.max_iters = d.value("gmm_max_iters", c.gmm.max_iters);
      c.gmm.tol = d.value("gmm_tol", c.gmm.tol);
      c.kde_bandwidth = d.value("kde_bandwidth", c.kde_bandwidth);
      c.histogram_pseudocount = d.value("histogram_pseudocount", c.histogram_pseudocount);
      c.histogram_k = d.value("histogram_k", c.histogram_k);
      c.same_set_density = d.value("same_set", c.same_set_density);
    }
    if (j.contains("weighting")) {
      const auto& w = j.at("weighting");
      c.weighting.tau = w.value("tau", c.weighting.tau);
      c.weighting.beta_quantile = w.value("beta_quantile", c.weighting.beta_quantile);
      c.weighting.normalize = w.value("normalize", c.weighting.normalize);
    }
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      c.learner.hidden = l.value("hidden", c.learner.hidden);
      c.learner.learning_rate = l.value("learning_rate", c.learner.learning_rate);
      c.learner.momentum = l.value("momentum", c.learner.momentum);
      c.learner.optimizer =
          optimizer_from_name(l.value("optimizer", optimizer_name(c.learner.optimizer)));
      c.learner.epochs = l.value("epochs", c.learner.epochs);
      c.learner.batch_size = l.value("batch_size", c.learner.batch_size);
      c.learner.min_steps = l.value("min_steps", c.learner.min_steps);
      c.learner.max_steps = l.value("max_steps", c.learner.max_steps);
    }
    c.workers = j.value("workers", c.workers);
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".toml") {
    try {
      return toml_to_json(toml::parse(in, path.string()));
    } catch (const toml::parse_error& e) {
      throw Error(std::string("malformed TOML config: ") + std::string(e.description()));
    }
  }
  if (ext == ".json") {
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed JSON config: ") + e.what());
    }
  }
  throw Error("config must end in .toml or .json: " + path.string());
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(load_config_document(path));
}

double percentile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(1, std::min<int>(w, static_cast<int>(count)));
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Fig1Row> run_fig1(const ExperimentConfig& cfg) {
  cfg.validate();
  const BinGrid grid(cfg.grid_k);
  const std::size_t per_seed = cfg.n_values.size();
  const std::size_t jobs = static_cast<std::size_t>(cfg.seeds) * per_seed;
  std::vector<std::vector<Fig1Row>> results(jobs);

  parallel_for(jobs, cfg.workers, [&](std::size_t job) {
    const std::uint64_t seed = task_seed(cfg, static_cast<int>(job / per_seed));
    const int n = cfg.n_values[job % per_seed];
    auto& out = results[job];
    try {
      const GaussianMixtureTask task = sample_task(seed, cfg.component_std);
      const Dataset data =
          sample_uniform(task, static_cast<std::size_t>(n),
                         Rng::derive_seed(seed, "fig1/train/" + std::to_string(n)));
      TrainConfig tc = cfg.learner;
      tc.seed = Rng::derive_seed(seed, "fig1/model/" + std::to_string(n));
      const TrainResult trained = train(unit_weights(data), tc);
      const AdversarialPool pool = build_pool(trained.model, task,
                                              static_cast<std::size_t>(cfg.pool_m),
                                              Rng::derive_seed(seed, "pool"));
      const double r = pool.uniform_risk();
      for (double g : cfg.gamma_values) {
        const AdversarialResult adv = greedy_adversarial(pool, g, grid);
        Fig1Row row;
        row.seed = seed;
        row.n = n;
        row.gamma = g;
        row.uniform_risk = r;
        row.dd_risk_greedy = adv.risk;
        row.dd_bound = dd_risk_bound(r, g);
        row.achieved_gap = adv.achieved_gap;
        row.exhausted = adv.exhausted;
        out.push_back(row);
      }
    } catch (const std::exception& e) {
      out.clear();
      for (double g : cfg.gamma_values)
        out.push_back({seed, n, g, kNaN, kNaN, kNaN, kNaN, false,
                       std::string("error: ") + e.what()});
    }
  });

  std::vector<Fig1Row> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::vector<Fig3Row> run_fig3(const ExperimentConfig& cfg) {
  cfg.validate();
  const BinGrid grid(cfg.grid_k);
  const BinGrid l1_grid(cfg.l1_grid_k);
  const std::size_t per_seed = cfg.sigma_values.size() * cfg.fig3_n_values.size();
  const std::size_t jobs = static_cast<std::size_t>(cfg.seeds) * per_seed * 2;
  std::vector<std::vector<Fig3Row>> results(jobs);

  parallel_for(jobs, cfg.workers, [&](std::size_t job) {
    const bool rebalanced = job % 2 == 1;
    const std::size_t cell = job / 2;
    const std::uint64_t seed = task_seed(cfg, static_cast<int>(cell / per_seed));
    const std::size_t within = cell % per_seed;
    const double sigma = cfg.sigma_values[within / cfg.fig3_n_values.size()];
    const int n = cfg.fig3_n_values[within % cfg.fig3_n_values.size()];
    const std::string tag = "fig3/" + fmt_double(sigma) + "/" + std::to_string(n);
    auto& out = results[job];
    try {
      const GaussianMixtureTask task = sample_task(seed, cfg.component_std);
      const Dataset data = sample_truncated_gaussian(task, static_cast<std::size_t>(n), sigma,
                                                     Rng::derive_seed(seed, tag + "/train"));
      WeightedDataset wd = unit_weights(data);
      if (rebalanced) {
        const std::uint64_t dseed = Rng::derive_seed(seed, tag + "/density");
        wd = rebalance_cross_fit(
            data, [&](std::span<const Point2> pts) { return fit_density(cfg, pts, dseed); },
            cfg.weighting, dseed, cfg.same_set_density);
      }
      TrainConfig tc = cfg.learner;
      // Same initialization and batch order with and without rebalancing.
      tc.seed = Rng::derive_seed(seed, tag + "/model");
      const TrainResult trained = train(wd, tc);
      const AdversarialPool pool = build_pool(trained.model, task,
                                              static_cast<std::size_t>(cfg.pool_m),
                                              Rng::derive_seed(seed, "pool"));
      const double l1 = l1_to_uniform(data, wd.weights, l1_grid);
      for (double g : cfg.fig3_gamma_values) {
        Fig3Row row;
        row.seed = seed;
        row.sigma = sigma;
        row.n = n;
        row.rebalanced = rebalanced;
        row.gamma = g;
        row.uniform_risk = pool.uniform_risk();
        row.dd_risk = greedy_adversarial(pool, g, grid).risk;
        row.l1_to_uniform_weighted = l1;
        out.push_back(row);
      }
    } catch (const std::exception& e) {
      out.clear();
      for (double g : cfg.fig3_gamma_values)
        out.push_back({seed, sigma, n, rebalanced, g, kNaN, kNaN, kNaN,
                       std::string("error: ") + e.what()});
    }
  });

  std::vector<Fig3Row> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

RiskReport run_single(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.base_seed;
  const int n = cfg.n_values.front();
  const GaussianMixtureTask task = sample_task(seed, cfg.component_std);
  const Dataset data = sample_uniform(task, static_cast<std::size_t>(n),
                                      Rng::derive_seed(seed, "fig1/train/" + std::to_string(n)));
  TrainConfig tc = cfg.learner;
  tc.seed = Rng::derive_seed(seed, "fig1/model/" + std::to_string(n));
  const TrainResult trained = train(unit_weights(data), tc);
  const AdversarialPool pool = build_pool(trained.model, task, static_cast<std::size_t>(cfg.pool_m),
                                          Rng::derive_seed(seed, "pool"));
  RiskReport rep;
  rep.seed = seed;
  rep.n = static_cast<std::size_t>(n);
  rep.uniform_risk = pool.uniform_risk();
  const BinGrid grid(cfg.grid_k);
  for (double g : cfg.gamma_values) {
    rep.dd_risk_by_gamma[g] = greedy_adversarial(pool, g, grid).risk;
    rep.bound_by_gamma[g] = dd_risk_bound(rep.uniform_risk, g);
  }
  return rep;
}

nlohmann::json to_json(const RiskReport& r) {
  nlohmann::json dd = nlohmann::json::array();
  for (const auto& [g, v] : r.dd_risk_by_gamma)
    dd.push_back({{"gamma", g}, {"dd_risk_greedy", v}, {"dd_bound", r.bound_by_gamma.at(g)}});
  nlohmann::json j = {{"seed", r.seed}, {"n", r.n}, {"uniform_risk", r.uniform_risk},
                      {"dd", dd}, {"valid", r.valid()}};
  j["sigma"] = std::isnan(r.sigma) ? nlohmann::json(nullptr) : nlohmann::json(r.sigma);
  return j;
}

void write_fig1_csv(std::ostream& os, const ExperimentConfig& cfg,
                    const std::vector<Fig1Row>& rows) {
  os << "row_type,seed,n,gamma,uniform_risk,dd_risk_greedy,dd_bound,achieved_gap,exhausted,"
        "status,experiment,grid_k,pool_m,component_std,"
     << kLearnerEchoHeader << '\n';
  std::ostringstream echo;
  echo << "fig1," << cfg.grid_k << ',' << cfg.pool_m << ',' << fmt_double(cfg.component_std)
       << ',' << learner_echo(cfg.learner);
  const std::string tail = echo.str();

  for (const auto& r : rows) {
    os << "data," << r.seed << ',' << r.n << ',' << fmt_double(r.gamma) << ','
       << fmt_double(r.uniform_risk) << ',' << fmt_double(r.dd_risk_greedy) << ','
       << fmt_double(r.dd_bound) << ',' << fmt_double(r.achieved_gap) << ','
       << (r.exhausted ? 1 : 0) << ',' << csv_escape(r.status) << ',' << tail << '\n';
  }

  std::map<std::pair<int, double>, std::array<std::vector<double>, 4>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.n, r.gamma}];
    g[0].push_back(r.uniform_risk);
    g[1].push_back(r.dd_risk_greedy);
    g[2].push_back(r.dd_bound);
    g[3].push_back(r.achieved_gap);
  }
  for (const auto& [key, g] : groups) {
    for (double q : {5.0, 50.0, 95.0}) {
      os << 'p' << (q < 10 ? "0" : "") << static_cast<int>(q) << ",," << key.first << ','
         << fmt_double(key.second) << ',' << fmt_double(percentile(g[0], q)) << ','
         << fmt_double(percentile(g[1], q)) << ',' << fmt_double(percentile(g[2], q)) << ','
         << fmt_double(percentile(g[3], q)) << ",,summary," << tail << '\n';
    }
  }
}

void write_fig3_csv(std::ostream& os, const ExperimentConfig& cfg,
                    const std::vector<Fig3Row>& rows) {
  os << "row_type,seed,sigma,n,rebalanced,gamma,uniform_risk,dd_risk,l1_to_uniform_weighted,"
        "status,experiment,grid_k,pool_m,l1_grid_k,component_std,density,tau,beta_quantile,"
        "normalize,same_set,"
     << kLearnerEchoHeader << '\n';
  std::ostringstream echo;
  echo << "fig3," << cfg.grid_k << ',' << cfg.pool_m << ',' << cfg.l1_grid_k << ','
       << fmt_double(cfg.component_std) << ',' << to_string(cfg.density) << ','
       << fmt_double(cfg.weighting.tau) << ',' << fmt_double(cfg.weighting.beta_quantile) << ','
       << (cfg.weighting.normalize ? 1 : 0) << ',' << (cfg.same_set_density ? 1 : 0) << ','
       << learner_echo(cfg.learner);
  const std::string tail = echo.str();

  for (const auto& r : rows) {
    os << "data," << r.seed << ',' << fmt_double(r.sigma) << ',' << r.n << ','
       << (r.rebalanced ? 1 : 0) << ',' << fmt_double(r.gamma) << ','
       << fmt_double(r.uniform_risk) << ',' << fmt_double(r.dd_risk) << ','
       << fmt_double(r.l1_to_uniform_weighted) << ',' << csv_escape(r.status) << ',' << tail
       << '\n';
  }

  std::map<std::tuple<double, int, bool, double>, std::array<std::vector<double>, 3>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.sigma, r.n, r.rebalanced, r.gamma}];
    g[0].push_back(r.uniform_risk);
    g[1].push_back(r.dd_risk);
    g[2].push_back(r.l1_to_uniform_weighted);
  }
  for (const auto& [key, g] : groups) {
    const auto& [sigma, n, reb, gamma] = key;
    for (double q : {5.0, 50.0, 95.0}) {
      os << 'p' << (q < 10 ? "0" : "") << static_cast<int>(q) << ",," << fmt_double(sigma) << ','
         << n << ',' << (reb ? 1 : 0) << ',' << fmt_double(gamma) << ','
         << fmt_double(percentile(g[0], q)) << ',' << fmt_double(percentile(g[1], q)) << ','
         << fmt_double(percentile(g[2], q)) << ",summary," << tail << '\n';
    }
  }
}

nlohmann::json run_manifest(const ExperimentConfig& cfg, double wall_seconds) {
  return {{"git_hash", DDRISK_GIT_HASH},
          {"config", to_json(cfg)},
          {"timings", {{"wall_seconds", wall_seconds}}}};
}

}  // namespace ddrisk
