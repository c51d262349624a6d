#include "odex/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "odex/error.hpp"

namespace odex {

void PsoConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (swarm_size < 2) fail("swarm size must be at least 2");
  if (iterations < 1) fail("iterations must be positive");
  if (!(inertia > 0.0 && inertia < 1.0)) fail("inertia must lie in (0, 1)");
  if (!(cognitive > 0.0) || !(social > 0.0)) fail("acceleration coefficients must be positive");
  if (restarts < 1) fail("restarts must be positive");
  if (stall_iterations < 1) fail("stall iterations must be positive");
  if (threads < 0) fail("threads must be >= 0");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ODEX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Design position_to_design(const Eigen::MatrixXd& position, std::span<const Factor> factors) {
  Design d;
  d.runs.resize(static_cast<std::size_t>(position.rows()));
  for (Eigen::Index i = 0; i < position.rows(); ++i) {
    Run& r = d.runs[static_cast<std::size_t>(i)];
    r.day = 1;
    for (std::size_t j = 0; j < factors.size(); ++j)
      r.coords[static_cast<int>(factors[j])] = position(i, static_cast<Eigen::Index>(j));
  }
  return d;
}

Eigen::MatrixXd design_to_position(const Design& design, std::span<const Factor> factors) {
  Eigen::MatrixXd pos(static_cast<Eigen::Index>(design.size()),
                      static_cast<Eigen::Index>(factors.size()));
  for (std::size_t i = 0; i < design.size(); ++i)
    for (std::size_t j = 0; j < factors.size(); ++j)
      pos(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          design.runs[i].coords[static_cast<int>(factors[j])];
  return pos;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index writes only
// its own output slot, so the result is independent of the split.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
}

struct Particle {
  Eigen::MatrixXd x, v, best_x;
  double value = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng;
};

double sanitize(double v) {
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

}  // namespace

SearchResult pso_maximize(const Objective& objective, int m, int dims, const PsoConfig& config,
                          const std::vector<Eigen::MatrixXd>& seeds) {
  config.validate();
  if (m < 1 || dims < 1) throw Error(ErrorKind::InvalidArgument, "search space is empty");
  const int threads = resolve_threads(config.threads);
  const int n = config.swarm_size;

  SearchResult result;
  result.best_value = -std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int restart = 0; restart < config.restarts; ++restart) {
    std::vector<Particle> swarm(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
      Particle& q = swarm[static_cast<std::size_t>(p)];
      q.rng.seed(derive_seed(config.seed, static_cast<std::uint64_t>(restart),
                             static_cast<std::uint64_t>(p) + 1));
      q.x.resize(m, dims);
      q.v.resize(m, dims);
      const bool seeded = restart == 0 && static_cast<std::size_t>(p) < seeds.size();
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < dims; ++j) {
          const double a = kBoxLower + (kBoxUpper - kBoxLower) * unit(q.rng);
          const double b = kBoxLower + (kBoxUpper - kBoxLower) * unit(q.rng);
          q.x(i, j) = seeded ? std::clamp(seeds[static_cast<std::size_t>(p)](i, j), kBoxLower,
                                          kBoxUpper)
                             : a;
          q.v(i, j) = 0.5 * (b - q.x(i, j));
        }
      }
    }

    Eigen::MatrixXd gbest_x = swarm[0].x;
    double gbest = -std::numeric_limits<double>::infinity();
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(config.iterations));

    for (int it = 0; it < config.iterations; ++it) {
      parallel_for(n, threads, [&](int p) {
        Particle& q = swarm[static_cast<std::size_t>(p)];
        q.value = sanitize(objective(q.x));
      });
      result.evaluations += n;

      for (Particle& q : swarm) {
        if (q.value > q.best_value) {
          q.best_value = q.value;
          q.best_x = q.x;
        }
        if (q.best_value > gbest) {
          gbest = q.best_value;
          gbest_x = q.best_x;
        }
      }
      history.push_back(gbest);

      const int window = config.stall_iterations;
      if (it >= window) {
        const double before = history[static_cast<std::size_t>(it - window)];
        if (gbest - before <= config.tolerance * (1.0 + std::abs(gbest))) break;
      }
      if (it + 1 == config.iterations) break;

      for (Particle& q : swarm) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < dims; ++j) {
            const double r1 = unit(q.rng);
            const double r2 = unit(q.rng);
            double v = config.inertia * q.v(i, j) +
                       config.cognitive * r1 * (q.best_x(i, j) - q.x(i, j)) +
                       config.social * r2 * (gbest_x(i, j) - q.x(i, j));
            double x = q.x(i, j) + v;
            if (x < kBoxLower) {
              x = kBoxLower;
              v = 0.0;
            } else if (x > kBoxUpper) {
              x = kBoxUpper;
              v = 0.0;
            }
            q.x(i, j) = x;
            q.v(i, j) = v;
          }
        }
      }
    }

    result.history.push_back(std::move(history));
    if (gbest > result.best_value) {
      result.best_value = gbest;
      result.best_position = gbest_x;
    }
  }

  result.best_value = sanitize(objective(result.best_position));
  ++result.evaluations;
  return result;
}

namespace {

// m runs taken from the 2^q factorial at +-2 with evenly spread indices.
Eigen::MatrixXd corner_pattern(int m, int dims) {
  Eigen::MatrixXd pos(m, dims);
  const long corners = 1L << dims;
  for (int i = 0; i < m; ++i) {
    const long idx = m == 1 ? 0 : (static_cast<long>(i) * (corners - 1)) / (m - 1) % corners;
    for (int j = 0; j < dims; ++j) pos(i, j) = ((idx >> j) & 1L) ? kBoxUpper : kBoxLower;
  }
  return pos;
}

SearchResult finish(SearchResult r, std::span<const Factor> factors, const std::string& label) {
  r.best_design = position_to_design(r.best_position, factors);
  r.best_design.label = label;
  return r;
}

SearchResult empty_result() {
  SearchResult r;
  r.best_value = 0.0;
  return r;
}

}  // namespace

SearchResult solve_local(const Scenario& scenario, const Design& initial, int m, Flavor flavor,
                         const PsoConfig& config, const std::vector<Design>& seeds) {
  if (m <= 0) return empty_result();
  const std::vector<Factor>& factors = scenario.spec.factors;
  const int dims = static_cast<int>(factors.size());
  const ScenarioEvaluator eval(scenario, initial);

  std::vector<Eigen::MatrixXd> starts;
  for (const Design& s : seeds)
    if (static_cast<int>(s.size()) == m) starts.push_back(design_to_position(s, factors));
  starts.push_back(corner_pattern(m, dims));
  starts.push_back(Eigen::MatrixXd::Zero(m, dims));

  auto objective = [&](const Eigen::MatrixXd& pos) {
    const Design d = position_to_design(pos, factors);
    return eval.phi(flavor, d.runs);
  };
  return finish(pso_maximize(objective, m, dims, config, starts), factors,
                std::string("local-") + std::string(flavor_name(flavor)) + "-" +
                    scenario.label);
}

void build_cache(ScenarioEnsemble& ensemble, const PsoConfig& config, const SeedProvider& seeds) {
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const Scenario& s = ensemble.scenario(i);
    PsoConfig cfg = config;

    cfg.seed = derive_seed(config.seed, i + 1, 1);
    const SearchResult d = solve_local(s, ensemble.initial(), ensemble.m(), Flavor::D, cfg,
                                       seeds ? seeds(i, Flavor::D) : std::vector<Design>{});
    cfg.seed = derive_seed(config.seed, i + 1, 2);
    const SearchResult d1 = solve_local(s, ensemble.initial(), ensemble.m(), Flavor::D1, cfg,
                                        seeds ? seeds(i, Flavor::D1) : std::vector<Design>{});

    const double d1_at_d = ensemble.evaluator(i).phi_D1(d.best_design.runs);
    if (!(d.best_value > 0.0) || !(d1.best_value > 0.0) || !(d1_at_d > 0.0))
      throw Error(ErrorKind::MissingCache,
                  "cache build failed for scenario '" + s.label + "': no design with positive value");

    OptimumCache entry;
    entry.phi_D = d.best_value;
    entry.phi_D1 = d1.best_value;
    entry.phi_D1_at_D = d1_at_d;
    entry.d_optimal = d.best_design;
    entry.d1_optimal = d1.best_design;
    ensemble.set_cache(i, std::move(entry));
  }
}

namespace {

std::vector<Eigen::MatrixXd> seed_positions(const std::vector<Design>& seeds, int m,
                                            std::span<const Factor> factors) {
  std::vector<Eigen::MatrixXd> starts;
  for (const Design& s : seeds)
    if (static_cast<int>(s.size()) == m) starts.push_back(design_to_position(s, factors));
  starts.push_back(corner_pattern(m, static_cast<int>(factors.size())));
  starts.push_back(Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(factors.size())));
  return starts;
}

}  // namespace

SearchResult solve_bayes(const ScenarioEnsemble& ensemble, Flavor flavor, const PsoConfig& config,
                         const std::vector<Design>& seeds) {
  if (!ensemble.cache_complete(flavor))
    throw Error(ErrorKind::MissingCache, "Bayesian search needs a complete optimum cache");
  const int m = ensemble.m();
  if (m <= 0) return empty_result();
  const std::vector<Factor> factors = ensemble.active_factors();
  auto objective = [&](const Eigen::MatrixXd& pos) {
    return phi_bayes(ensemble, position_to_design(pos, factors), flavor);
  };
  return finish(pso_maximize(objective, m, static_cast<int>(factors.size()), config,
                             seed_positions(seeds, m, factors)),
                factors, std::string("bayes-") + std::string(flavor_name(flavor)));
}

SearchResult solve_compromise(const ScenarioEnsemble& ensemble, double alpha,
                              const PsoConfig& config, const std::vector<Design>& seeds) {
  if (!ensemble.cache_complete(Flavor::D) || !ensemble.cache_complete(Flavor::D1))
    throw Error(ErrorKind::MissingCache, "compromise search needs both optimum caches");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  const int m = ensemble.m();
  if (m <= 0) return empty_result();
  const std::vector<Factor> factors = ensemble.active_factors();
  auto objective = [&](const Eigen::MatrixXd& pos) {
    return phi_compromise(ensemble, position_to_design(pos, factors), alpha);
  };
  return finish(pso_maximize(objective, m, static_cast<int>(factors.size()), config,
                             seed_positions(seeds, m, factors)),
                factors, "compromise");
}

}  // namespace odex
