#include <array>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odex/bundled.hpp"
#include "odex/criteria.hpp"
#include "odex/error.hpp"
#include "odex/estimation.hpp"
#include "odex/io.hpp"
#include "odex/optimizer.hpp"

namespace py = pybind11;
using namespace odex;

namespace {

using Rows = std::vector<std::array<double, kNumFactors>>;

Design initial_block() {
  Design d;
  d.runs = bundled::ccd30().runs;
  return d;
}

Design to_design(const Rows& rows) {
  Design d;
  for (const auto& r : rows) d.runs.push_back(Run{r, 1});
  return d;
}

Rows to_rows(const Design& d) {
  Rows rows;
  for (const auto& r : d.runs) rows.push_back(r.coords);
  return rows;
}

Dataset load_dataset(const std::string& source) {
  if (source == "ccd30") return bundled::ccd30();
  if (source == "reference") return bundled::reference_runs();
  if (source == "bayes") return bundled::bayes_runs();
  if (source == "validation14") return bundled::validation14();
  return read_dataset_csv_file(source);
}

ScenarioEnsemble make_ensemble(const std::optional<std::vector<std::string>>& models,
                               const std::string& gammas, int m) {
  ScenarioEnsemble ens = bundled::ensemble(models ? *models : bundled::all_model_names(),
                                           bundled::parse_gamma_spread(gammas), m);
  return ens;
}

Flavor parse_flavor(const std::string& name) {
  if (name == "D") return Flavor::D;
  if (name == "D1") return Flavor::D1;
  throw Error(ErrorKind::InvalidArgument, "flavor must be D or D1, got '" + name + "'");
}

std::string fit_json(const std::string& response, const std::optional<std::string>& link,
                     const std::vector<std::string>& data, bool day_effect) {
  ModelSpec spec = bundled::model(response);
  if (link) spec.link = parse_link(*link);
  Dataset d = load_dataset(data.at(0));
  for (std::size_t i = 1; i < data.size(); ++i) d = d.concat(load_dataset(data[i]));
  return to_json(fit(spec, d, response, day_effect)).dump();
}

std::vector<double> predict_runs(const std::string& model_json, const Rows& rows, int day) {
  const FittedModel m = fitted_model_from_json(json::parse(model_json));
  std::vector<Run> runs;
  for (const auto& r : rows) runs.push_back(Run{r, day});
  return predict(m, runs);
}

double error_of(const std::string& model_json, const std::string& data,
                const std::string& metric) {
  const FittedModel m = fitted_model_from_json(json::parse(model_json));
  return prediction_error(m, load_dataset(data), m.response, parse_metric(metric));
}

std::vector<std::pair<std::string, double>> efficiencies(
    const Rows& design, const std::optional<std::vector<std::string>>& models,
    const std::string& flavor, const std::string& gammas, const std::optional<Rows>& relative_to) {
  const Design d = to_design(design);
  ScenarioEnsemble ens = make_ensemble(models, gammas, static_cast<int>(d.size()));
  const Flavor f = parse_flavor(flavor);
  std::vector<std::pair<std::string, double>> out;
  if (relative_to) {
    const Design b = to_design(*relative_to);
    if (b.size() != d.size())
      throw Error(ErrorKind::Dimension, "designs have " + std::to_string(d.size()) + " and " +
                                            std::to_string(b.size()) + " new runs");
    for (std::size_t i = 0; i < ens.size(); ++i)
      out.emplace_back(ens.scenario(i).label, relative_efficiency(ens, i, d, b, f));
    return out;
  }
  bundled::use_published_optima(ens);
  for (std::size_t i = 0; i < ens.size(); ++i)
    out.emplace_back(ens.scenario(i).label, efficiency(ens, i, d, f));
  return out;
}

py::dict optimize(const std::string& criterion, const std::optional<std::vector<std::string>>& models,
                  const std::string& gammas, int m, double alpha, std::uint64_t seed, int swarm,
                  int iterations, int restarts, int threads) {
  PsoConfig config;
  config.seed = seed;
  config.swarm_size = swarm;
  config.iterations = iterations;
  config.restarts = restarts;
  config.threads = threads;
  ScenarioEnsemble ens = make_ensemble(models, gammas, m);
  bundled::use_published_optima(ens);
  const auto seeds = bundled::published_design_seeds();
  const SearchResult res = [&] {
    py::gil_scoped_release release;
    if (criterion == "bayesD") return solve_bayes(ens, Flavor::D, config, seeds);
    if (criterion == "bayesD1") return solve_bayes(ens, Flavor::D1, config, seeds);
    if (criterion == "compromise") return solve_compromise(ens, alpha, config, seeds);
    throw Error(ErrorKind::InvalidArgument,
                "criterion must be bayesD, bayesD1 or compromise, got '" + criterion + "'");
  }();
  py::dict out;
  out["design"] = to_rows(res.best_design);
  out["value"] = res.best_value;
  out["evaluations"] = res.evaluations;
  return out;
}

double criterion_value(const std::string& criterion, const Rows& design,
                       const std::optional<std::vector<std::string>>& models,
                       const std::string& gammas, double alpha) {
  const Design d = to_design(design);
  ScenarioEnsemble ens = make_ensemble(models, gammas, static_cast<int>(d.size()));
  bundled::use_published_optima(ens);
  if (criterion == "bayesD") return phi_bayes(ens, d, Flavor::D);
  if (criterion == "bayesD1") return phi_bayes(ens, d, Flavor::D1);
  if (criterion == "compromise") return phi_compromise(ens, d, alpha);
  throw Error(ErrorKind::InvalidArgument,
              "criterion must be bayesD, bayesD1 or compromise, got '" + criterion + "'");
}

}  // namespace

PYBIND11_MODULE(_odex, m) {
  m.doc() = "Optimal augmentation designs for Gamma GLMs with a day effect";

  static py::exception<Error> error(m, "OdexError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("model_names", &bundled::all_model_names);
  m.def("published_keys", &bundled::published_keys);
  m.def("published_design", [](const std::string& key) { return to_rows(bundled::published(key)); });
  m.def("reference_design", [] { return to_rows(bundled::reference_design()); });
  m.def("initial_design", [] { return to_rows(initial_block()); });

  m.def("fit", &fit_json, py::arg("response"), py::arg("link") = py::none(),
        py::arg("data") = std::vector<std::string>{"ccd30"}, py::arg("day_effect") = false,
        "Fit a bundled response model; returns the fitted model as JSON text.");
  m.def("predict", &predict_runs, py::arg("model"), py::arg("runs"), py::arg("day") = 1);
  m.def("prediction_error", &error_of, py::arg("model"), py::arg("data"),
        py::arg("metric") = "mse");
  m.def("efficiency", &efficiencies, py::arg("design"), py::arg("models") = py::none(),
        py::arg("flavor") = "D", py::arg("gammas") = "fixed", py::arg("relative_to") = py::none());
  m.def("criterion_value", &criterion_value, py::arg("criterion"), py::arg("design"),
        py::arg("models") = py::none(), py::arg("gammas") = "fixed", py::arg("alpha") = 0.5);
  m.def("optimize", &optimize, py::arg("criterion") = "bayesD", py::arg("models") = py::none(),
        py::arg("gammas") = "fixed", py::arg("m") = 4, py::arg("alpha") = 0.5,
        py::arg("seed") = 1, py::arg("swarm") = 100, py::arg("iterations") = 1000,
        py::arg("restarts") = 5, py::arg("threads") = 0);
}
