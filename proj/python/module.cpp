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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "ddrisk/adversarial.hpp"
#include "ddrisk/bounds.hpp"
#include "ddrisk/entropy.hpp"
#include "ddrisk/harness.hpp"
#include "ddrisk/learner.hpp"
#include "ddrisk/rebalance.hpp"
#include "ddrisk/tasks.hpp"

namespace py = pybind11;
using namespace ddrisk;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<Point2> to_points(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw Error("points must have shape (n, 2)");
  auto r = a.unchecked<2>();
  std::vector<Point2> pts(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1)};
  return pts;
}

std::vector<Label> to_labels(const IntArray& a) {
  std::vector<Label> out;
  auto r = a.unchecked<1>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.push_back(label_from_int(r(i)));
  return out;
}

std::vector<double> to_vector(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array from_points(const std::vector<Point2>& pts) {
  Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w(static_cast<py::ssize_t>(i), 0) = pts[i].x;
    w(static_cast<py::ssize_t>(i), 1) = pts[i].y;
  }
  return out;
}

IntArray from_labels(const std::vector<Label>& labels) {
  IntArray out(static_cast<py::ssize_t>(labels.size()));
  auto w = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < labels.size(); ++i) w(static_cast<py::ssize_t>(i)) = to_int(labels[i]);
  return out;
}

GaussianMixtureTask task_from(const std::string& s) {
  return nlohmann::json::parse(s).get<GaussianMixtureTask>();
}

py::tuple dataset_tuple(const Dataset& d) {
  return py::make_tuple(from_points(d.points()), from_labels(d.labels()));
}

Dataset make_dataset(const Array& points, const IntArray& labels) {
  const auto pts = to_points(points);
  const auto lab = to_labels(labels);
  if (pts.size() != lab.size()) throw Error("points and labels differ in length");
  Dataset d;
  for (std::size_t i = 0; i < pts.size(); ++i) d.samples.push_back({pts[i], lab[i]});
  return d;
}

}  // namespace

PYBIND11_MODULE(_ddrisk, m) {
  m.doc() = "Distributionally diverse risk: bounds, greedy adversary, rebalancing";
  py::register_exception<Error>(m, "DdriskError", PyExc_ValueError);

  m.def("bernoulli_kl", &bernoulli_kl, py::arg("epsilon"), py::arg("r"));
  m.def("dd_risk_exact", &dd_risk_exact, py::arg("r"), py::arg("gamma"));
  m.def("dd_risk_bound", &dd_risk_bound, py::arg("r"), py::arg("gamma"));
  m.def("dd_risk_bound_simplified", &dd_risk_bound_simplified, py::arg("r"), py::arg("gamma"));

  m.def("binned_entropy",
        [](const std::vector<std::int64_t>& counts) { return binned_entropy(counts); },
        py::arg("counts"));
  m.def("entropy_gap",
        [](const Array& points, int k) {
          const auto pts = to_points(points);
          return entropy_gap(histogram(pts, BinGrid(k)));
        },
        py::arg("points"), py::arg("k") = 100);

  m.def("_sample_task",
        [](std::uint64_t seed, double std) { return nlohmann::json(sample_task(seed, std)).dump(); },
        py::arg("seed"), py::arg("component_std") = kDefaultComponentStd);
  m.def("_true_labels",
        [](const std::string& task, const Array& points) {
          const auto t = task_from(task);
          std::vector<Label> out;
          for (const auto& p : to_points(points)) out.push_back(true_label(t, p));
          return from_labels(out);
        });
  m.def("_sample_uniform", [](const std::string& task, std::size_t n, std::uint64_t seed) {
    return dataset_tuple(sample_uniform(task_from(task), n, seed));
  });
  m.def("_sample_truncated_gaussian",
        [](const std::string& task, std::size_t n, double sigma, std::uint64_t seed) {
          return dataset_tuple(sample_truncated_gaussian(task_from(task), n, sigma, seed));
        });
  m.def("true_density_truncated_gaussian",
        [](const Array& points, double sigma) {
          std::vector<double> out;
          for (const auto& p : to_points(points)) out.push_back(true_density_truncated_gaussian(p, sigma));
          return out;
        },
        py::arg("points"), py::arg("sigma"));

  m.def("rebalance_weights",
        [](const Array& points, const IntArray& labels, const std::string& kind, double tau,
           double beta_quantile, std::uint64_t seed, bool same_set) {
          const Dataset d = make_dataset(points, labels);
          WeightConfig cfg{tau, beta_quantile, true};
          const DensityKind dk = density_kind_from_string(kind);
          auto fitter = [&](std::span<const Point2> pts) {
            if (dk == DensityKind::kHistogram) return fit_histogram(pts, BinGrid(10), 1.0);
            if (dk == DensityKind::kKde) return fit_kde(pts, scott_bandwidth(pts));
            GmmConfig g;
            g.seed = seed;
            return fit_gmm(pts, g).model;
          };
          return rebalance_cross_fit(d, fitter, cfg, seed, same_set).weights;
        },
        py::arg("points"), py::arg("labels"), py::arg("density") = "gmm", py::arg("tau") = 1.0,
        py::arg("beta_quantile") = 0.99, py::arg("seed") = 0, py::arg("same_set") = false);
  m.def("is_uniform_risk",
        [](const Array& points, const Array& losses, const Array& densities) {
          const auto pts = to_points(points);
          const auto dens = to_vector(densities);
          if (dens.size() != pts.size()) throw Error("densities and points differ in length");
          std::size_t i = 0;
          return is_uniform_risk(pts, to_vector(losses), [&](const Point2&) { return dens[i++]; });
        },
        py::arg("points"), py::arg("losses"), py::arg("densities"));

  py::class_<MlpModel>(m, "Model")
      .def("predict",
           [](const MlpModel& mdl, const Array& points) {
             const auto pts = to_points(points);
             return from_labels(predict_batch(mdl, pts));
           })
      .def_property_readonly("wdl2", [](const MlpModel& mdl) { return wdl2(mdl); })
      .def_property_readonly("num_params", &MlpModel::num_params)
      .def("to_json", [](const MlpModel& mdl) { return mdl.to_json().dump(); });

  m.def("train",
        [](const Array& points, const IntArray& labels, std::optional<Array> weights,
           std::vector<int> hidden, double learning_rate, int epochs, int batch_size,
           std::uint64_t seed) {
          WeightedDataset wd = unit_weights(make_dataset(points, labels));
          if (weights) wd.weights = to_vector(*weights);
          TrainConfig cfg;
          cfg.hidden = std::move(hidden);
          cfg.learning_rate = learning_rate;
          cfg.epochs = epochs;
          cfg.batch_size = batch_size;
          cfg.seed = seed;
          std::optional<TrainResult> res;
          {
            py::gil_scoped_release release;
            res.emplace(train(wd, cfg));
          }
          return py::make_tuple(std::move(res->model), res->trace.epoch_loss);
        },
        py::arg("points"), py::arg("labels"), py::arg("weights") = py::none(),
        py::arg("hidden") = std::vector<int>{64, 64}, py::arg("learning_rate") = 0.01,
        py::arg("epochs") = 100, py::arg("batch_size") = 32, py::arg("seed") = 0);

  m.def("greedy_adversarial",
        [](const Array& points, const IntArray& truth, const IntArray& predicted, double gamma,
           int k) {
          const auto pool = make_pool(to_points(points), to_labels(truth), to_labels(predicted));
          const auto res = greedy_adversarial(pool, gamma, BinGrid(k));
          py::dict out;
          out["risk"] = res.risk;
          out["achieved_gap"] = res.achieved_gap;
          out["exhausted"] = res.exhausted;
          out["selected"] = res.selected;
          return out;
        },
        py::arg("points"), py::arg("truth"), py::arg("predicted"), py::arg("gamma"),
        py::arg("k") = 100);

  m.def("_run_experiment", [](const std::string& config) {
    const auto cfg = experiment_config_from_json(nlohmann::json::parse(config));
    std::ostringstream os;
    py::gil_scoped_release release;
    if (cfg.experiment == "fig1")
      write_fig1_csv(os, cfg, run_fig1(cfg));
    else if (cfg.experiment == "fig3")
      write_fig3_csv(os, cfg, run_fig3(cfg));
    else
      os << to_json(run_single(cfg)).dump();
    return os.str();
  });
}
