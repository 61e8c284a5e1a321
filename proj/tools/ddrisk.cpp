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

// Command-line front end: task generation, training, evaluation, bounds,
// adversarial curves, density fits and the experiment sweeps.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddrisk/adversarial.hpp"
#include "ddrisk/bounds.hpp"
#include "ddrisk/density.hpp"
#include "ddrisk/harness.hpp"
#include "ddrisk/learner.hpp"
#include "ddrisk/rebalance.hpp"
#include "ddrisk/tasks.hpp"

namespace {

using nlohmann::json;
using namespace ddrisk;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed (overrides base_seed from the config)");
  cmd->add_option("--config", c.config, "Experiment config (.toml or .json)");
  cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
}

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (c.seed) cfg.base_seed = *c.seed;
  cfg.validate();
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path + ": " + e.what());
  }
}

GaussianMixtureTask load_task(const std::string& path) {
  try {
    return read_json(path).get<GaussianMixtureTask>();
  } catch (const json::exception& e) {
    throw Error("malformed task file " + path + ": " + e.what());
  }
}

DensityModel fit_by_kind(const ExperimentConfig& cfg, std::span<const Point2> pts,
                         std::uint64_t seed) {
  switch (cfg.density) {
    case DensityKind::kHistogram:
      return fit_histogram(pts, BinGrid(cfg.histogram_k), cfg.histogram_pseudocount);
    case DensityKind::kKde:
      return fit_kde(pts, cfg.kde_bandwidth > 0.0 ? cfg.kde_bandwidth : scott_bandwidth(pts));
    case DensityKind::kGmm: {
      GmmConfig g = cfg.gmm;
      g.seed = seed;
      return fit_gmm(pts, g).model;
    }
  }
  throw Error("unknown density kind");
}

// Training inputs recorded next to a model so that evaluate can replay them.
struct TrainSpec {
  GaussianMixtureTask task;
  int n = 0;
  std::optional<double> sigma;  // none = uniform
  bool rebalanced = false;
  std::uint64_t data_seed = 0;
  std::uint64_t model_seed = 0;
  std::uint64_t density_seed = 0;
};

WeightedDataset training_set(const TrainSpec& s, const ExperimentConfig& cfg) {
  const Dataset data =
      s.sigma ? sample_truncated_gaussian(s.task, static_cast<std::size_t>(s.n), *s.sigma,
                                          s.data_seed)
              : sample_uniform(s.task, static_cast<std::size_t>(s.n), s.data_seed);
  if (!s.rebalanced) return unit_weights(data);
  return rebalance_cross_fit(
      data, [&](std::span<const Point2> pts) { return fit_by_kind(cfg, pts, s.density_seed); },
      cfg.weighting, s.density_seed, cfg.same_set_density);
}

json spec_to_json(const TrainSpec& s) {
  json j = {{"task", s.task},
            {"n", s.n},
            {"rebalanced", s.rebalanced},
            {"data_seed", s.data_seed},
            {"model_seed", s.model_seed},
            {"density_seed", s.density_seed}};
  j["sigma"] = s.sigma ? json(*s.sigma) : json(nullptr);
  return j;
}

TrainSpec spec_from_json(const json& j) {
  TrainSpec s;
  s.task = j.at("task").get<GaussianMixtureTask>();
  s.n = j.at("n").get<int>();
  if (!j.at("sigma").is_null()) s.sigma = j.at("sigma").get<double>();
  s.rebalanced = j.at("rebalanced").get<bool>();
  s.data_seed = j.at("data_seed").get<std::uint64_t>();
  s.model_seed = j.at("model_seed").get<std::uint64_t>();
  s.density_seed = j.at("density_seed").get<std::uint64_t>();
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally diverse risk toolkit"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, bound_c, adv_c, dens_c, run_c;

  auto* gen = app.add_subcommand("gen-task", "Sample a mixture-of-Gaussians task as JSON");
  add_common(gen, gen_c);

  auto* tr = app.add_subcommand("train", "Train an MLP and save it with its training inputs");
  add_common(tr, train_c);
  std::string tr_task;
  int tr_n = 1000;
  std::optional<double> tr_sigma;
  bool tr_rebalance = false;
  tr->add_option("--task", tr_task, "Task JSON (sampled from --seed when omitted)");
  tr->add_option("--n", tr_n, "Training set size")->check(CLI::PositiveNumber);
  tr->add_option("--sigma", tr_sigma, "Truncated Gaussian std (uniform when omitted)");
  tr->add_flag("--rebalance", tr_rebalance, "Importance-weight the training set");

  auto* ev = app.add_subcommand("evaluate", "Replay training loss and measure risks");
  add_common(ev, eval_c);
  std::string ev_model;
  ev->add_option("--model", ev_model, "Model JSON written by train")->required();

  auto* bd = app.add_subcommand("bound", "Exact DD risk and its closed-form bounds");
  add_common(bd, bound_c);
  double bd_r = 0.0, bd_gamma = 0.0;
  bd->add_option("--r", bd_r, "Uniform risk")->required()->check(CLI::Range(0.0, 1.0));
  bd->add_option("--gamma", bd_gamma, "Entropy gap")->required()->check(CLI::NonNegativeNumber);

  auto* adv = app.add_subcommand("adversarial", "Greedy DD risk curve for a saved model");
  add_common(adv, adv_c);
  std::string adv_model;
  adv->add_option("--model", adv_model, "Model JSON written by train")->required();

  auto* dens = app.add_subcommand("density-fit", "Fit a density model on a training sample");
  add_common(dens, dens_c);
  std::string dens_task;
  int dens_n = 500;
  double dens_sigma = 0.3;
  dens->add_option("--task", dens_task, "Task JSON (sampled from --seed when omitted)");
  dens->add_option("--n", dens_n, "Sample size")->check(CLI::PositiveNumber);
  dens->add_option("--sigma", dens_sigma, "Truncated Gaussian std")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run the experiment named in the config");
  add_common(run, run_c);
  std::string run_experiment;
  run->add_option("--experiment", run_experiment, "Override the experiment id (fig1|fig3|single)");
  auto* fig1 = app.add_subcommand("fig1", "Sample-size sweep on uniform data");
  Common fig1_c;
  add_common(fig1, fig1_c);
  auto* fig3 = app.add_subcommand("fig3", "Uniformity sweep with and without rebalancing");
  Common fig3_c;
  add_common(fig3, fig3_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ExperimentConfig cfg = resolve_config(gen_c);
      emit(gen_c.out, json(sample_task(cfg.base_seed, cfg.component_std)).dump(2) + "\n");
    } else if (*tr) {
      const ExperimentConfig cfg = resolve_config(train_c);
      TrainSpec s;
      s.task = tr_task.empty() ? sample_task(cfg.base_seed, cfg.component_std) : load_task(tr_task);
      s.n = tr_n;
      s.sigma = tr_sigma;
      s.rebalanced = tr_rebalance;
      s.data_seed = Rng::derive_seed(cfg.base_seed, "cli/train/data");
      s.model_seed = Rng::derive_seed(cfg.base_seed, "cli/train/model");
      s.density_seed = Rng::derive_seed(cfg.base_seed, "cli/train/density");
      TrainConfig tc = cfg.learner;
      tc.seed = s.model_seed;
      const TrainResult res = train(training_set(s, cfg), tc);
      json out = {{"model", res.model.to_json()},
                  {"train", spec_to_json(s)},
                  {"config", to_json(cfg)},
                  {"trace",
                   {{"final_loss", res.trace.final_loss()},
                    {"steps", res.trace.steps},
                    {"epoch_loss", res.trace.epoch_loss},
                    {"epoch_wdl2", res.trace.epoch_wdl2}}}};
      emit(train_c.out, out.dump(2) + "\n");
    } else if (*ev || *adv) {
      const Common& c = *ev ? eval_c : adv_c;
      const json doc = read_json(*ev ? ev_model : adv_model);
      ExperimentConfig cfg = experiment_config_from_json(doc.at("config"));
      if (!c.config.empty()) cfg = load_experiment_config(c.config);
      const MlpModel model = MlpModel::from_json(doc.at("model"));
      const TrainSpec s = spec_from_json(doc.at("train"));
      const std::uint64_t pool_seed =
          Rng::derive_seed(c.seed.value_or(cfg.base_seed), "cli/pool");
      const AdversarialPool pool =
          build_pool(model, s.task, static_cast<std::size_t>(cfg.pool_m), pool_seed);
      const BinGrid grid(cfg.grid_k);
      if (*ev) {
        const ExperimentConfig train_cfg = experiment_config_from_json(doc.at("config"));
        const WeightedDataset wd = training_set(s, train_cfg);
        const auto pts = wd.base.points();
        const auto labels = wd.base.labels();
        const double replayed = model.loss(pts, labels, wd.weights);
        const auto preds = predict_batch(model, pts);
        json out = {{"train_loss_replayed", replayed},
                    {"train_loss_recorded", doc.at("trace").at("final_loss")},
                    {"train_weighted_risk", weighted_empirical_risk(wd, preds)},
                    {"uniform_risk", pool.uniform_risk()},
                    {"wdl2", wdl2(model)}};
        json dd = json::array();
        for (double g : cfg.gamma_values)
          dd.push_back({{"gamma", g},
                        {"dd_risk_greedy", greedy_adversarial(pool, g, grid).risk},
                        {"dd_bound", dd_risk_bound(pool.uniform_risk(), g)}});
        out["dd"] = dd;
        emit(c.out, out.dump(2) + "\n");
      } else {
        std::vector<AdversarialResult> results;
        for (const auto& [g, r] : dd_curve(pool, cfg.gamma_values, grid)) results.push_back(r);
        std::ostringstream os;
        write_adversarial_csv(os, results);
        emit(c.out, os.str());
      }
    } else if (*bd) {
      if (!bound_c.config.empty()) resolve_config(bound_c);
      const DdBound b = dd_risk_bound_detail(bd_r, bd_gamma);
      std::ostringstream os;
      os << "r=" << fmt(bd_r) << " gamma=" << fmt(bd_gamma) << '\n'
         << "dd_risk_exact=" << fmt(dd_risk_exact(bd_r, bd_gamma)) << '\n'
         << "dd_risk_bound=" << fmt(b.value) << " (additive=" << fmt(b.additive)
         << " alpha_branch=" << fmt(b.alpha_branch) << " alpha=" << fmt(b.alpha) << ")\n";
      if (bd_r > 0.0 && bd_r < 1.0)
        os << "dd_risk_bound_simplified=" << fmt(dd_risk_bound_simplified(bd_r, bd_gamma)) << '\n';
      emit(bound_c.out, os.str());
    } else if (*dens) {
      const ExperimentConfig cfg = resolve_config(dens_c);
      const GaussianMixtureTask task =
          dens_task.empty() ? sample_task(cfg.base_seed, cfg.component_std) : load_task(dens_task);
      const Dataset data =
          sample_truncated_gaussian(task, static_cast<std::size_t>(dens_n), dens_sigma,
                                    Rng::derive_seed(cfg.base_seed, "cli/density/data"));
      const auto pts = data.points();
      const DensityModel model =
          fit_by_kind(cfg, pts, Rng::derive_seed(cfg.base_seed, "cli/density/fit"));
      double mean_log = 0.0;
      for (const auto& p : pts) mean_log += model.log_density(p);
      mean_log /= static_cast<double>(pts.size());
      json out = {{"model", model.to_json()}, {"mean_log_density", mean_log}};
      emit(dens_c.out, out.dump(2) + "\n");
    } else {
      const Common& c = *run ? run_c : (*fig1 ? fig1_c : fig3_c);
      ExperimentConfig cfg = resolve_config(c);
      if (*fig1) cfg.experiment = "fig1";
      if (*fig3) cfg.experiment = "fig3";
      if (*run && !run_experiment.empty()) cfg.experiment = run_experiment;
      cfg.validate();
      std::string out_path = c.out.empty() ? cfg.output : c.out;
      const auto t0 = std::chrono::steady_clock::now();
      std::ostringstream os;
      bool failed = false;
      if (cfg.experiment == "fig1") {
        const auto rows = run_fig1(cfg);
        for (const auto& r : rows) failed |= r.status != "ok";
        write_fig1_csv(os, cfg, rows);
      } else if (cfg.experiment == "fig3") {
        const auto rows = run_fig3(cfg);
        for (const auto& r : rows) failed |= r.status != "ok";
        write_fig3_csv(os, cfg, rows);
      } else {
        os << to_json(run_single(cfg)).dump(2) << '\n';
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit(out_path, os.str());
      if (!out_path.empty()) {
        std::ofstream m(out_path + ".manifest.json");
        m << run_manifest(cfg, secs).dump(2) << '\n';
      }
      if (failed) {
        std::cerr << "error: some runs failed; see the status column\n";
        return 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
