#pragma once

// Global-best particle swarm search over the design box, and the design
// problems built on it (local, Bayesian and compromise optima).

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "odex/criteria.hpp"

namespace odex {

struct PsoConfig {
  int swarm_size = 100;
  int iterations = 1000;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  int restarts = 5;
  std::uint64_t seed = 1;
  /// A restart stops once the best value improved by less than
  /// tolerance * (1 + |best|) over the last stall_iterations iterations.
  double tolerance = 1e-9;
  int stall_iterations = 100;
  /// Evaluation threads; 0 reads ODEX_THREADS, falling back to the hardware
  /// concurrency. Results do not depend on this value.
  int threads = 0;

  void validate() const;
};

/// Thread count after resolving 0 against ODEX_THREADS.
int resolve_threads(int requested);

struct SearchResult {
  Eigen::MatrixXd best_position;  // m x dims
  Design best_design;             // m day-1 runs (filled by the design solvers)
  double best_value = 0.0;
  std::vector<std::vector<double>> history;  // gbest per iteration, one list per restart
  long evaluations = 0;
};

/// Maps an m x dims position onto runs, placing column j on factors[j];
/// unlisted factors are set to 0 and the day flag to 1.
Design position_to_design(const Eigen::MatrixXd& position, std::span<const Factor> factors);
Eigen::MatrixXd design_to_position(const Design& design, std::span<const Factor> factors);

using Objective = std::function<double(const Eigen::MatrixXd&)>;

/// Maximizes `objective` over [-2, 2]^{m x dims}. `seeds` are injected as
/// particles of the first restart (clamped into the box). The objective must
/// be pure and total; it is called concurrently from several threads.
SearchResult pso_maximize(const Objective& objective, int m, int dims, const PsoConfig& config,
                          const std::vector<Eigen::MatrixXd>& seeds = {});

/// Locally D- or D1-optimal m-run augmentation for one scenario, searched
/// over the scenario's own factors. The center and a +-2 corner pattern are
/// always seeded, plus any `seeds`.
SearchResult solve_local(const Scenario& scenario, const Design& initial, int m, Flavor flavor,
                         const PsoConfig& config, const std::vector<Design>& seeds = {});

using SeedProvider = std::function<std::vector<Design>(std::size_t scenario, Flavor flavor)>;

/// Fills the optimum cache of every scenario: the D-optimum value, the
/// D1-optimum value and the D1 value of the D-optimal design. Each scenario
/// uses a seed derived from config.seed, so the cache is deterministic.
/// Throws MissingCache if some scenario has no design with positive value.
void build_cache(ScenarioEnsemble& ensemble, const PsoConfig& config,
                 const SeedProvider& seeds = {});

SearchResult solve_bayes(const ScenarioEnsemble& ensemble, Flavor flavor, const PsoConfig& config,
                         const std::vector<Design>& seeds = {});

SearchResult solve_compromise(const ScenarioEnsemble& ensemble, double alpha,
                              const PsoConfig& config, const std::vector<Design>& seeds = {});

}  // namespace odex
