// odex: fit Gamma GLMs, compute augmentation designs, evaluate efficiencies and
// score predictions. Tables go to stdout, artifacts to --out paths.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "odex/bundled.hpp"
#include "odex/criteria.hpp"
#include "odex/error.hpp"
#include "odex/estimation.hpp"
#include "odex/io.hpp"
#include "odex/optimizer.hpp"

namespace {

using namespace odex;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitFit = 3;
constexpr int kExitCache = 4;
constexpr int kExitDimension = 5;
constexpr int kExitDomain = 6;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::Divergence:
    case ErrorKind::RankDeficient: return kExitFit;
    case ErrorKind::MissingCache: return kExitCache;
    case ErrorKind::Dimension: return kExitDimension;
    case ErrorKind::PredictorOutOfDomain:
    case ErrorKind::InvalidPredictor: return kExitDomain;
    case ErrorKind::MissingGamma:
    case ErrorKind::InvalidArgument: return kExitUsage;
  }
  return kExitUsage;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string pct(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * x << '%';
  return os.str();
}

Design initial_block() {
  Design d;
  d.label = "ccd30";
  d.runs = bundled::ccd30().runs;
  return d;
}

// "bundled:<key>" names a bundled design (reference or a published key);
// anything else is a design CSV path. Rows with day 0 must reproduce the
// bundled initial block and are dropped.
Design load_design(const std::string& source) {
  Design d;
  if (source.rfind("bundled:", 0) == 0) {
    const std::string key = source.substr(8);
    d = key == "reference" ? bundled::reference_design() : bundled::published(key);
  } else {
    d = read_design_csv_file(source);
  }
  const Design init = d.initial_part();
  if (!init.empty()) {
    if (init.runs.size() != 30 || init.runs != initial_block().runs)
      throw Error(ErrorKind::Dimension,
                  source + ": day-0 rows differ from the bundled 30-run initial block");
    Design fresh = d.new_part();
    fresh.label = d.label;
    d = std::move(fresh);
  }
  for (Run& r : d.runs) r.day = 1;
  return d;
}

Dataset load_dataset(const std::string& source) {
  if (source == "bundled:ccd30") return bundled::ccd30();
  if (source == "bundled:reference") return bundled::reference_runs();
  if (source == "bundled:bayes") return bundled::bayes_runs();
  if (source == "bundled:validation14") return bundled::validation14();
  return read_dataset_csv_file(source);
}

PsoConfig load_config(const std::string& path) {
  return path.empty() ? PsoConfig{} : pso_config_from_json(read_json_file(path));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

// fit --------------------------------------------------------------------------

struct FitArgs {
  std::string bundled, data, model, response, link, augment, out;
  bool day_effect = false;
};

int run_fit(const FitArgs& a) {
  ModelSpec spec;
  Dataset data;
  std::string response = a.response;
  if (!a.bundled.empty()) {
    spec = bundled::model(a.bundled);
    data = bundled::ccd30();
    if (response.empty()) response = a.bundled;
  } else {
    if (a.data.empty() || a.model.empty())
      throw Error(ErrorKind::InvalidArgument, "fit needs --bundled or both --data and --model");
    data = load_dataset(a.data);
    const json j = read_json_file(a.model);
    spec = j.contains("spec") ? model_spec_from_json(j.at("spec")) : model_spec_from_json(j);
    if (response.empty()) response = spec.name;
  }
  if (!a.data.empty() && !a.bundled.empty()) data = load_dataset(a.data);
  if (!a.link.empty()) spec.link = parse_link(a.link);

  bool day = a.day_effect;
  if (a.augment == "reference") {
    data = data.concat(bundled::reference_runs());
    day = true;
  } else if (a.augment == "optimal") {
    data = data.concat(bundled::bayes_runs());
    day = true;
  }

  const FittedModel m = fit(spec, data, response, day);

  std::cout << "model " << spec.name << " (" << link_name(spec.link) << " link), response "
            << response << ", n = " << m.n << "\n";
  std::cout << std::left << std::setw(12) << "term" << std::right << std::setw(16) << "estimate"
            << std::setw(14) << "std.err" << "\n";
  std::cout << std::fixed << std::setprecision(6);
  for (int i = 0; i < spec.num_params(); ++i)
    std::cout << std::left << std::setw(12) << spec.terms[static_cast<std::size_t>(i)].label()
              << std::right << std::setw(16) << m.beta_hat(i) << std::setw(14)
              << m.std_errors(i) << "\n";
  if (m.gamma_hat)
    std::cout << std::left << std::setw(12) << "day" << std::right << std::setw(16)
              << *m.gamma_hat << std::setw(14) << m.std_errors(spec.num_params()) << "\n";
  std::cout << std::setprecision(4) << "shape nu = " << m.nu_hat
            << ", dispersion = " << std::defaultfloat << std::setprecision(6) << m.dispersion
            << std::fixed << std::setprecision(4) << ", loglik = " << m.log_likelihood
            << ", BIC = " << m.bic << " (k = " << m.num_bic_params() << "), iterations = "
            << m.iterations << "\n";
  if (!a.out.empty()) write_json_file(a.out, to_json(m));
  return kExitOk;
}

// design -----------------------------------------------------------------------

struct DesignArgs {
  std::string criterion = "bayesD", models, gammas = "fixed", config, ensemble, out, report;
  std::string optima;
  double alpha = 0.5;
  int m = 4;
  std::uint64_t seed = 1;
  int swarm = 0, iters = 0, restarts = 0, threads = 0;
};

json efficiency_rows(const ScenarioEnsemble& ens, const Design& d) {
  json rows = json::array();
  for (std::size_t i = 0; i < ens.size(); ++i) {
    json r;
    r["scenario"] = ens.scenario(i).label;
    r["weight"] = ens.scenario(i).weight;
    r["eff_D"] = ens.cache(i).phi_D ? json(eff_D(ens, i, d)) : json(nullptr);
    r["eff_D1"] = ens.cache(i).phi_D1 ? json(eff_D1(ens, i, d)) : json(nullptr);
    rows.push_back(r);
  }
  return rows;
}

void print_efficiencies(const json& rows) {
  std::cout << std::left << std::setw(24) << "scenario" << std::right << std::setw(10) << "eff_D"
            << std::setw(10) << "eff_D1" << "\n";
  for (const auto& r : rows) {
    auto cell = [](const json& v) { return v.is_null() ? std::string("-") : pct(v.get<double>()); };
    std::cout << std::left << std::setw(24) << r["scenario"].get<std::string>() << std::right
              << std::setw(10) << cell(r["eff_D"]) << std::setw(10) << cell(r["eff_D1"]) << "\n";
  }
}

int run_design(const DesignArgs& a) {
  PsoConfig config = load_config(a.config);
  config.seed = a.seed;
  if (a.swarm > 0) config.swarm_size = a.swarm;
  if (a.iters > 0) config.iterations = a.iters;
  if (a.restarts > 0) config.restarts = a.restarts;
  if (a.threads > 0) config.threads = a.threads;
  config.validate();
  if (a.m < 0) throw Error(ErrorKind::InvalidArgument, "--m must be >= 0");
  if (!(a.alpha >= 0.0 && a.alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "--alpha must lie in [0, 1]");

  const bool local = a.criterion == "D" || a.criterion == "D1";
  const bool from_file = !a.ensemble.empty();
  std::vector<std::string> names =
      a.models.empty() ? (local ? std::vector<std::string>{"temperature"} : bundled::all_model_names())
                       : split_list(a.models);
  if (names.size() == 1 && names[0] == "all") names = bundled::all_model_names();
  if (local && !from_file && names.size() != 1)
    throw Error(ErrorKind::InvalidArgument, "local criteria take exactly one model");

  const auto spread = bundled::parse_gamma_spread(local ? "fixed" : a.gammas);
  ScenarioEnsemble ens = from_file
                             ? ensemble_from_json(read_json_file(a.ensemble), initial_block())
                             : bundled::ensemble(names, spread, a.m);
  const std::string optima = a.optima.empty() ? (from_file ? "search" : "published") : a.optima;

  json report;
  report["criterion"] = a.criterion;
  report["m"] = a.m;
  report["pso"] = to_json(config);

  if (a.m == 0) {
    std::cerr << "warning: m = 0, returning the empty design with value 0\n";
    Design empty;
    report["best_value"] = 0.0;
    report["evaluations"] = 0;
    report["efficiencies"] = json::array();
    std::cout << "criterion " << a.criterion << ": empty design, value 0\n";
    if (!a.out.empty()) {
      std::ofstream out(a.out);
      write_design_csv(out, empty);
    }
    if (!a.report.empty()) write_json_file(a.report, report);
    return kExitOk;
  }

  if (optima == "published") {
    bundled::use_published_optima(ens);
  } else if (optima == "search") {
    build_cache(ens, config, from_file ? SeedProvider{} : bundled::published_local_seeds(ens));
  } else {
    throw Error(ErrorKind::InvalidArgument, "--optima must be published or search");
  }
  const std::vector<Design> seeds = from_file ? std::vector<Design>{}
                                              : bundled::published_design_seeds();

  SearchResult r;
  if (local) {
    const Flavor f = a.criterion == "D" ? Flavor::D : Flavor::D1;
    std::vector<Design> local_seeds{bundled::reference_design()};
    if (!from_file) local_seeds.push_back(ens.cache(0).d_optimal);
    r = solve_local(ens.scenario(0), ens.initial(), a.m, f, config, local_seeds);
  } else if (a.criterion == "bayesD") {
    r = solve_bayes(ens, Flavor::D, config, seeds);
  } else if (a.criterion == "bayesD1") {
    r = solve_bayes(ens, Flavor::D1, config, seeds);
  } else if (a.criterion == "compromise") {
    r = solve_compromise(ens, a.alpha, config, seeds);
    report["alpha"] = a.alpha;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown criterion '" + a.criterion + "'");
  }

  const json rows = efficiency_rows(ens, r.best_design);
  report["optima"] = optima;
  report["best_value"] = r.best_value;
  report["evaluations"] = r.evaluations;
  report["efficiencies"] = rows;

  std::cout << "criterion " << a.criterion << " over " << ens.size() << " scenario(s), m = "
            << a.m << ", seed " << config.seed << "\n";
  std::ostringstream csv;
  write_design_csv(csv, r.best_design);
  std::cout << csv.str();
  std::cout << std::setprecision(10) << "best value " << r.best_value << " after "
            << r.evaluations << " evaluations\n";
  print_efficiencies(rows);
  if (!a.out.empty()) write_text(a.out, csv.str());
  if (!a.report.empty()) write_json_file(a.report, report);
  return kExitOk;
}

// efficiency -------------------------------------------------------------------

struct EfficiencyArgs {
  std::string design, model = "all", relative_to, flavor = "D", gammas = "fixed", optima;
  std::string config;
  std::uint64_t seed = 1;
};

ScenarioEnsemble model_ensemble(const std::string& model, const std::string& gammas, int m) {
  if (model.size() > 5 && model.substr(model.size() - 5) == ".json") {
    json j = read_json_file(model);
    if (!j.contains("scenarios")) j = json{{"scenarios", json::array({j})}};
    j["m"] = m;
    return ensemble_from_json(j, initial_block());
  }
  auto names = model == "all" ? bundled::all_model_names() : split_list(model);
  return bundled::ensemble(names, bundled::parse_gamma_spread(gammas), m);
}

int run_efficiency(const EfficiencyArgs& a) {
  const Flavor flavor = a.flavor == "D"    ? Flavor::D
                        : a.flavor == "D1" ? Flavor::D1
                                           : throw Error(ErrorKind::InvalidArgument,
                                                         "--flavor must be D or D1");
  const Design d = load_design(a.design);
  ScenarioEnsemble ens = model_ensemble(a.model, a.gammas, static_cast<int>(d.size()));

  const auto header = [&] {
    std::cout << std::left << std::setw(24) << "scenario" << std::right << std::setw(12)
              << ("eff_" + a.flavor) << "\n";
  };
  if (!a.relative_to.empty()) {
    const Design b = load_design(a.relative_to);
    if (b.size() != d.size())
      throw Error(ErrorKind::Dimension, "designs have " + std::to_string(d.size()) + " and " +
                                            std::to_string(b.size()) + " new runs");
    header();
    for (std::size_t i = 0; i < ens.size(); ++i)
      std::cout << std::left << std::setw(24) << ens.scenario(i).label << std::right
                << std::setw(12) << pct(relative_efficiency(ens, i, d, b, flavor)) << "\n";
    return kExitOk;
  }

  const bool bundled_models = a.model.find(".json") == std::string::npos;
  const std::string optima = a.optima.empty() ? (bundled_models ? "published" : "search")
                                              : a.optima;
  if (optima == "published") {
    if (d.size() != 4)
      throw Error(ErrorKind::Dimension, "published optima have 4 runs, design has " +
                                            std::to_string(d.size()));
    bundled::use_published_optima(ens);
  } else if (optima == "search") {
    PsoConfig config = load_config(a.config);
    config.seed = a.seed;
    build_cache(ens, config, bundled_models ? bundled::published_local_seeds(ens) : SeedProvider{});
  } else {
    throw Error(ErrorKind::InvalidArgument, "--optima must be published or search");
  }
  header();
  for (std::size_t i = 0; i < ens.size(); ++i)
    std::cout << std::left << std::setw(24) << ens.scenario(i).label << std::right
              << std::setw(12) << pct(efficiency(ens, i, d, flavor)) << "\n";
  return kExitOk;
}

// predict ----------------------------------------------------------------------

struct PredictArgs {
  std::string model, data, metric = "mse", response, out;
};

int run_predict(const PredictArgs& a) {
  const FittedModel m = fitted_model_from_json(read_json_file(a.model));
  const Dataset data = load_dataset(a.data);
  const std::string response = a.response.empty() ? m.response : a.response;
  const auto& observed = data.response(response);
  const auto predicted = predict(m, data.runs);

  std::ostringstream csv;
  csv << "run,observed,predicted,residual\n";
  std::cout << std::left << std::setw(6) << "run" << std::right << std::setw(14) << "observed"
            << std::setw(14) << "predicted" << std::setw(14) << "residual" << "\n";
  std::cout << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double res = predicted[i] - observed[i];
    csv << i + 1 << ',' << format_number(observed[i]) << ',' << format_number(predicted[i]) << ','
        << format_number(res) << '\n';
    std::cout << std::left << std::setw(6) << i + 1 << std::right << std::setw(14) << observed[i]
              << std::setw(14) << predicted[i] << std::setw(14) << res << "\n";
  }
  const ErrorMetric metric = parse_metric(a.metric);
  std::cout << metric_name(metric) << " = " << error_metric(predicted, observed, metric) << "  (";
  const char* sep = "";
  for (ErrorMetric other : {ErrorMetric::MSE, ErrorMetric::RMSE, ErrorMetric::MAE}) {
    std::cout << sep << metric_name(other) << " " << error_metric(predicted, observed, other);
    sep = ", ";
  }
  std::cout << ")\n";
  if (!a.out.empty()) write_text(a.out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal augmentation designs for Gamma GLMs with a day effect"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Gamma GLM and print estimates");
  fit_cmd->add_option("--bundled", fa.bundled, "Bundled response on the 30-run CCD")
      ->check(CLI::IsMember(bundled::all_model_names()));
  fit_cmd->add_option("--data", fa.data, "Dataset CSV (or bundled:ccd30|reference|bayes|validation14)");
  fit_cmd->add_option("--model", fa.model, "Model spec JSON");
  fit_cmd->add_option("--response", fa.response, "Response column (default: model name)");
  fit_cmd->add_option("--link", fa.link, "Override the link")
      ->check(CLI::IsMember({"identity", "inverse", "log"}));
  fit_cmd->add_flag("--day-effect", fa.day_effect, "Estimate a day effect");
  fit_cmd->add_option("--augment", fa.augment, "Append the bundled day-1 runs")
      ->check(CLI::IsMember({"reference", "optimal"}));
  fit_cmd->add_option("--out", fa.out, "Write the fitted model JSON");

  DesignArgs da;
  auto* design_cmd = app.add_subcommand("design", "Compute an optimal augmentation design");
  design_cmd->add_option("--criterion", da.criterion)
      ->check(CLI::IsMember({"D", "D1", "bayesD", "bayesD1", "compromise"}));
  design_cmd->add_option("--alpha", da.alpha, "Compromise weight on the D part");
  design_cmd->add_option("--models", da.models, "Comma-separated bundled models, or 'all'");
  design_cmd->add_option("--gammas", da.gammas)
      ->check(CLI::IsMember({"fixed", "pm10", "pm10pm20"}));
  design_cmd->add_option("--m", da.m, "Number of new runs");
  design_cmd->add_option("--seed", da.seed);
  design_cmd->add_option("--swarm", da.swarm);
  design_cmd->add_option("--iters", da.iters);
  design_cmd->add_option("--restarts", da.restarts);
  design_cmd->add_option("--threads", da.threads);
  design_cmd->add_option("--config", da.config, "PSO config JSON");
  design_cmd->add_option("--ensemble", da.ensemble, "Scenario ensemble JSON");
  design_cmd->add_option("--optima", da.optima, "Efficiency denominators")
      ->check(CLI::IsMember({"published", "search"}));
  design_cmd->add_option("--out", da.out, "Write the design CSV");
  design_cmd->add_option("--report", da.report, "Write the JSON report");

  EfficiencyArgs ea;
  auto* eff_cmd = app.add_subcommand("efficiency", "Evaluate design efficiencies");
  eff_cmd->add_option("--design", ea.design, "Design CSV or bundled:<key>")->required();
  eff_cmd->add_option("--model", ea.model, "Bundled model names, 'all', or a scenario JSON");
  eff_cmd->add_option("--relative-to", ea.relative_to, "Second design for a pairwise ratio");
  eff_cmd->add_option("--flavor", ea.flavor)->check(CLI::IsMember({"D", "D1"}));
  eff_cmd->add_option("--gammas", ea.gammas)->check(CLI::IsMember({"fixed", "pm10", "pm10pm20"}));
  eff_cmd->add_option("--optima", ea.optima)->check(CLI::IsMember({"published", "search"}));
  eff_cmd->add_option("--config", ea.config, "PSO config JSON for --optima search");
  eff_cmd->add_option("--seed", ea.seed);

  PredictArgs pa;
  auto* pred_cmd = app.add_subcommand("predict", "Predict with a fitted model and score it");
  pred_cmd->add_option("--model", pa.model, "Fitted model JSON")->required();
  pred_cmd->add_option("--data", pa.data, "Dataset CSV or bundled:<name>")->required();
  pred_cmd->add_option("--metric", pa.metric)->check(CLI::IsMember({"mse", "rmse", "mae"}));
  pred_cmd->add_option("--response", pa.response);
  pred_cmd->add_option("--out", pa.out, "Write run,observed,predicted,residual CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fa);
    if (*design_cmd) return run_design(da);
    if (*eff_cmd) return run_efficiency(ea);
    if (*pred_cmd) return run_predict(pa);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
