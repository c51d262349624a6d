#include "odex/criteria.hpp"

#include <cmath>

#include "odex/error.hpp"

namespace odex {

std::string_view flavor_name(Flavor f) { return f == Flavor::D ? "D" : "D1"; }

ScenarioEvaluator::ScenarioEvaluator(const Scenario& scenario, const Design& initial)
    : scenario_(&scenario) {
  const int dim = scenario.spec.num_params() + 1;
  if (scenario.params.beta.size() != scenario.spec.num_params())
    throw Error(ErrorKind::Dimension,
                "beta length does not match the terms of '" + scenario.spec.name + "'");
  base_ = InfoMatrix::Zero(dim, dim);
  for (Run r : initial.runs) {
    r.day = 0;
    accumulate_run(scenario.spec, scenario.params, r, true, base_);
  }
}

InfoMatrix ScenarioEvaluator::information(std::span<const Run> new_runs) const {
  InfoMatrix info = base_;
  for (Run r : new_runs) {
    r.day = 1;
    accumulate_run(scenario_->spec, scenario_->params, r, true, info);
  }
  info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
  return info;
}

double ScenarioEvaluator::phi_D(std::span<const Run> new_runs) const {
  if (new_runs.empty()) return 0.0;  // gamma column identically zero
  try {
    const double ld = log_det(information(new_runs));
    if (!std::isfinite(ld)) return 0.0;
    return std::exp(ld / dim());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidPredictor) return 0.0;
    throw;
  }
}

double ScenarioEvaluator::phi_D1(std::span<const Run> new_runs) const {
  if (new_runs.empty()) return 0.0;
  try {
    return inv_quadratic_form(information(new_runs), dim() - 1);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidPredictor) return 0.0;
    throw;
  }
}

double ScenarioEvaluator::phi(Flavor flavor, std::span<const Run> new_runs) const {
  return flavor == Flavor::D ? phi_D(new_runs) : phi_D1(new_runs);
}

ScenarioEnsemble::ScenarioEnsemble(std::vector<Scenario> scenarios, Design initial, int m)
    : scenarios_(std::move(scenarios)), initial_(std::move(initial)), m_(m) {
  if (scenarios_.empty()) throw Error(ErrorKind::InvalidArgument, "ensemble has no scenarios");
  if (m_ < 0) throw Error(ErrorKind::InvalidArgument, "number of new runs must be >= 0");
  double total = 0.0;
  for (Scenario& s : scenarios_) {
    s.spec.validate();
    if (!(s.weight > 0.0) || !std::isfinite(s.weight))
      throw Error(ErrorKind::InvalidArgument, "scenario weights must be positive");
    if (!s.params.gamma)
      throw Error(ErrorKind::MissingGamma, "scenario '" + s.spec.name + "' has no day effect");
    if (s.label.empty()) s.label = s.spec.name;
    total += s.weight;
  }
  for (Scenario& s : scenarios_) s.weight /= total;
  for (Run& r : initial_.runs) r.day = 0;
  rebuild_evaluators();
  cache_.resize(scenarios_.size());
}

ScenarioEnsemble::ScenarioEnsemble(const ScenarioEnsemble& other)
    : scenarios_(other.scenarios_),
      initial_(other.initial_),
      m_(other.m_),
      cache_(other.cache_) {
  rebuild_evaluators();
}

ScenarioEnsemble& ScenarioEnsemble::operator=(const ScenarioEnsemble& other) {
  if (this != &other) {
    scenarios_ = other.scenarios_;
    initial_ = other.initial_;
    m_ = other.m_;
    cache_ = other.cache_;
    rebuild_evaluators();
  }
  return *this;
}

void ScenarioEnsemble::rebuild_evaluators() {
  evaluators_.clear();
  evaluators_.reserve(scenarios_.size());
  for (const Scenario& s : scenarios_) evaluators_.emplace_back(s, initial_);
}

void ScenarioEnsemble::set_cache(std::size_t i, OptimumCache entry) {
  for (const auto& v : {entry.phi_D, entry.phi_D1, entry.phi_D1_at_D})
    if (v && !(*v > 0.0))
      throw Error(ErrorKind::InvalidArgument,
                  "cached optimum for '" + scenarios_.at(i).label + "' is not positive");
  cache_.at(i) = std::move(entry);
}

bool ScenarioEnsemble::cache_complete(Flavor flavor) const {
  for (const OptimumCache& c : cache_)
    if (!(flavor == Flavor::D ? c.phi_D : c.phi_D1)) return false;
  return true;
}

std::vector<Factor> ScenarioEnsemble::active_factors() const {
  std::vector<Factor> out;
  for (int j = 0; j < kNumFactors; ++j) {
    const auto f = static_cast<Factor>(j);
    for (const Scenario& s : scenarios_) {
      if (s.spec.uses(f)) {
        out.push_back(f);
        break;
      }
    }
  }
  return out;
}

double phi_D(const Scenario& scenario, const Design& initial, const Design& new_runs) {
  return ScenarioEvaluator(scenario, initial).phi_D(new_runs.runs);
}

double phi_D1(const Scenario& scenario, const Design& initial, const Design& new_runs) {
  return ScenarioEvaluator(scenario, initial).phi_D1(new_runs.runs);
}

namespace {

double require(const std::optional<double>& v, const ScenarioEnsemble& ens, std::size_t i,
               const char* what) {
  if (!v)
    throw Error(ErrorKind::MissingCache, std::string("no cached ") + what + " optimum for '" +
                                             ens.scenario(i).label + "'");
  return *v;
}

}  // namespace

double eff_D(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs) {
  const double denom = require(ens.cache(i).phi_D, ens, i, "D");
  return ens.evaluator(i).phi_D(new_runs.runs) / denom;
}

double eff_D1(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs) {
  const double denom = require(ens.cache(i).phi_D1, ens, i, "D1");
  return ens.evaluator(i).phi_D1(new_runs.runs) / denom;
}

double eff_D1_vs_D_optimum(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs) {
  const double denom = require(ens.cache(i).phi_D1_at_D, ens, i, "D1-at-D");
  return ens.evaluator(i).phi_D1(new_runs.runs) / denom;
}

double efficiency(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs,
                  Flavor flavor) {
  return flavor == Flavor::D ? eff_D(ens, i, new_runs) : eff_D1(ens, i, new_runs);
}

double relative_efficiency(const ScenarioEnsemble& ens, std::size_t i, const Design& a,
                           const Design& b, Flavor flavor) {
  const double denom = ens.evaluator(i).phi(flavor, b.runs);
  if (!(denom > 0.0)) return 0.0;
  return ens.evaluator(i).phi(flavor, a.runs) / denom;
}

double phi_bayes(const ScenarioEnsemble& ens, const Design& new_runs, Flavor flavor) {
  double total = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i)
    total += ens.scenario(i).weight * efficiency(ens, i, new_runs, flavor);
  return total;
}

double phi_compromise(const ScenarioEnsemble& ens, const Design& new_runs, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  return alpha * phi_bayes(ens, new_runs, Flavor::D) +
         (1.0 - alpha) * phi_bayes(ens, new_runs, Flavor::D1);
}

}  // namespace odex
