#pragma once

// Design criteria for augmenting a fixed initial block with m day-1 runs:
// local D and D1 criteria, their efficiencies, the prior-averaged (Bayesian)
// versions and the alpha-compromise between them.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odex/information.hpp"

namespace odex {

enum class Flavor { D, D1 };

std::string_view flavor_name(Flavor f);

/// One atom s = (link, terms, beta, gamma) of a discrete prior.
struct Scenario {
  ModelSpec spec;
  ParamPoint params;  // gamma required
  double weight = 1.0;
  std::string label;  // defaults to spec.name
};

/// Scores new runs in one scenario. The information of the initial block is
/// accumulated once; each evaluation adds the rank-one terms of the new runs.
class ScenarioEvaluator {
 public:
  ScenarioEvaluator(const Scenario& scenario, const Design& initial);

  /// Augmented (p+1)-dimensional information of initial + new runs. Day flags
  /// of `new_runs` are ignored and treated as 1.
  InfoMatrix information(std::span<const Run> new_runs) const;

  /// |I|^{1/(p+1)}; 0 for singular or infeasible designs.
  double phi_D(std::span<const Run> new_runs) const;
  /// (e^T I^{-1} e)^{-1} for the day-effect coordinate; 0 for singular or
  /// infeasible designs.
  double phi_D1(std::span<const Run> new_runs) const;
  double phi(Flavor flavor, std::span<const Run> new_runs) const;

  int dim() const { return static_cast<int>(base_.rows()); }

 private:
  const Scenario* scenario_;
  InfoMatrix base_;  // lower triangle only
};

/// Criterion values at the local optima of one scenario. Ratios against a
/// D-optimal design's D1 value (phi_D1_at_D) and against the D1-optimal
/// design (phi_D1) are both needed, so both are kept.
struct OptimumCache {
  std::optional<double> phi_D;        // Phi_D at the locally D-optimal design
  std::optional<double> phi_D1;       // Phi_D1 at the locally D1-optimal design
  std::optional<double> phi_D1_at_D;  // Phi_D1 at the locally D-optimal design
  Design d_optimal;
  Design d1_optimal;
};

class ScenarioEnsemble {
 public:
  /// Weights are normalized to sum to 1; every weight must be positive and
  /// every scenario must carry gamma. `initial` is treated as all day 0.
  ScenarioEnsemble(std::vector<Scenario> scenarios, Design initial, int m);

  ScenarioEnsemble(const ScenarioEnsemble& other);
  ScenarioEnsemble& operator=(const ScenarioEnsemble& other);
  ScenarioEnsemble(ScenarioEnsemble&&) noexcept = default;
  ScenarioEnsemble& operator=(ScenarioEnsemble&&) noexcept = default;

  std::size_t size() const { return scenarios_.size(); }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const Scenario& scenario(std::size_t i) const { return scenarios_.at(i); }
  const Design& initial() const { return initial_; }
  int m() const { return m_; }

  const ScenarioEvaluator& evaluator(std::size_t i) const { return evaluators_.at(i); }

  const OptimumCache& cache(std::size_t i) const { return cache_.at(i); }
  /// Throws InvalidArgument if a stored value is not strictly positive.
  void set_cache(std::size_t i, OptimumCache entry);
  bool cache_complete(Flavor flavor) const;

  /// Union of the factors used by any scenario, in canonical order.
  std::vector<Factor> active_factors() const;

 private:
  void rebuild_evaluators();

  std::vector<Scenario> scenarios_;
  Design initial_;
  int m_ = 0;
  std::vector<ScenarioEvaluator> evaluators_;
  std::vector<OptimumCache> cache_;
};

// Free-standing local criteria (information rebuilt from scratch).
double phi_D(const Scenario& scenario, const Design& initial, const Design& new_runs);
double phi_D1(const Scenario& scenario, const Design& initial, const Design& new_runs);

// Ensemble-backed criteria. All throw MissingCache when the needed
// denominator is absent.
double eff_D(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs);
double eff_D1(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs);
/// Phi_D1(new_runs) / Phi_D1(locally D-optimal design).
double eff_D1_vs_D_optimum(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs);
double efficiency(const ScenarioEnsemble& ens, std::size_t i, const Design& new_runs,
                  Flavor flavor);

/// Pairwise ratio Phi(a) / Phi(b) in scenario i (0 when b scores 0).
double relative_efficiency(const ScenarioEnsemble& ens, std::size_t i, const Design& a,
                           const Design& b, Flavor flavor);

/// Weighted sum of per-scenario efficiencies.
double phi_bayes(const ScenarioEnsemble& ens, const Design& new_runs, Flavor flavor);

/// alpha * phi_bayes(D) + (1 - alpha) * phi_bayes(D1).
double phi_compromise(const ScenarioEnsemble& ens, const Design& new_runs, double alpha);

}  // namespace odex
