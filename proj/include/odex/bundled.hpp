#pragma once

// Thermal-spraying data shipped with the toolkit: the 30-run central
// composite design of the initial day, the four selected response models and
// their estimates, the reference and Bayesian augmentation runs with their
// observed responses, the 14 validation runs and the published designs.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "odex/criteria.hpp"
#include "odex/estimation.hpp"
#include "odex/optimizer.hpp"

namespace odex {

inline constexpr std::array<std::string_view, 4> kResponseNames = {
    "temperature", "velocity", "flame_width", "flame_intensity"};

namespace bundled {

/// Initial-day central composite design with all four responses (day 0).
Dataset ccd30();

/// The selected model for each response: temperature (identity), velocity
/// (log), flame_width (inverse), flame_intensity (identity).
std::vector<ModelSpec> models();
ModelSpec model(const std::string& name);

/// Initial-day estimates with the default day effect attached.
ParamPoint estimates(const std::string& name);
/// Day effects assumed for design: -16, 0.01, 0.002, 0.09.
double default_gamma(const std::string& name);

/// Four reference runs (all +-1) with their responses, day 1.
Dataset reference_runs();
/// Four runs of the five-gamma Bayesian D-optimal design with responses, day 1.
Dataset bayes_runs();
/// Fourteen validation runs observed on the same later day, day 1.
Dataset validation14();

Design reference_design();

/// Published designs by key:
///   local-D/<model>, local-D1/<model>     (locally optimal, 4 runs)
///   bayes-D/fixed, bayes-D/pm10           (Bayesian D, gamma fixed / +-10%)
///   bayes-D1/fixed, bayes-D1/pm10         (Bayesian D1)
///   compromise/0.5                        (alpha = 0.5, gamma fixed)
///   bayes-D/pm10pm20                      (five gamma values)
/// Three-factor designs (temperature) have FDV = 0.
Design published(const std::string& key);
std::vector<std::string> published_keys();

enum class GammaSpread { Fixed, Pm10, Pm10Pm20 };
GammaSpread parse_gamma_spread(std::string_view name);
std::string_view gamma_spread_name(GammaSpread spread);
/// Multipliers applied to the default gamma: {1}, {0.9,1,1.1}, {0.8,...,1.2}.
std::vector<double> gamma_multipliers(GammaSpread spread);

/// Equal-weight atoms over `model_names` x gamma multipliers.
std::vector<Scenario> scenarios(const std::vector<std::string>& model_names, GammaSpread spread);
ScenarioEnsemble ensemble(const std::vector<std::string>& model_names, GammaSpread spread,
                          int m = 4);
std::vector<std::string> all_model_names();

/// Fills the cache of every atom with the values of the published locally D-
/// and D1-optimal designs of its model, evaluated in that atom.
void use_published_optima(ScenarioEnsemble& ensemble);

/// Seeds for local searches: the reference design and the published local
/// optimum of the atom's model.
SeedProvider published_local_seeds(const ScenarioEnsemble& ensemble);
/// Reference design plus every published 4-run four-factor design.
std::vector<Design> published_design_seeds();

/// 64-bit FNV-1a, used to lock the transcribed tables.
std::uint64_t fnv1a(std::string_view text);

}  // namespace bundled
}  // namespace odex
