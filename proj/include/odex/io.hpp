#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "odex/criteria.hpp"
#include "odex/estimation.hpp"
#include "odex/optimizer.hpp"

namespace odex {

/// Shortest decimal that reads back to the same double.
std::string format_number(double x);

// Design CSV: header `run,L,K,D,FDV,day`.
Design read_design_csv(std::istream& in, const std::string& source = "<design>");
Design read_design_csv_file(const std::string& path);
void write_design_csv(std::ostream& out, const Design& design);

// Dataset CSV: header `run,L,K,D,FDV[,day],<response columns...>`. The day
// column is optional (default 0). Responses must be positive.
Dataset read_dataset_csv(std::istream& in, const std::string& source = "<data>");
Dataset read_dataset_csv_file(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

using json = nlohmann::ordered_json;

json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);

json to_json(const FittedModel& model);
FittedModel fitted_model_from_json(const json& j);

json to_json(const PsoConfig& config);
/// Fields absent from `j` keep their defaults.
PsoConfig pso_config_from_json(const json& j, PsoConfig base = {});

/// {"scenarios": [{"model": <spec object or bundled name>, "beta": [...],
///  "gamma": x, "weight": w}, ...], "m": 4}. The initial block is supplied by
/// the caller.
json ensemble_to_json(const ScenarioEnsemble& ensemble);
ScenarioEnsemble ensemble_from_json(const json& j, const Design& initial);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace odex
