#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "odex/glm_model.hpp"

namespace odex {

struct Design {
  std::vector<Run> runs;
  std::string label;

  std::size_t size() const { return runs.size(); }
  bool empty() const { return runs.empty(); }

  /// Day-0 runs (the fixed initial block X1).
  Design initial_part() const;
  /// Day-1 runs (the new block X2).
  Design new_part() const;
};

/// Initial block followed by `new_runs`, with day flags stamped 0 and 1.
Design augment(const Design& initial, const Design& new_runs);

/// Throws InvalidArgument on a coordinate outside [-2, 2] or a day flag
/// other than 0/1.
void check_in_box(const Design& design);

using InfoMatrix = Eigen::MatrixXd;

/// Pivot threshold, relative to the largest diagonal entry, below which an
/// information matrix is treated as singular.
inline constexpr double kSingularTolerance = 1e-12;

/// Fisher information of `design` with the shape fixed to 1. With the day
/// effect the regressor is (z, t) and the weight is evaluated at
/// z^T beta + t gamma; without it day flags are ignored.
/// Throws InvalidPredictor when some run has a nonpositive identity/inverse
/// predictor.
InfoMatrix fisher_info(const ModelSpec& spec, const ParamPoint& params, const Design& design,
                       bool with_day_effect);

/// Adds w z z^T for one run into `info` (same conventions as fisher_info).
void accumulate_run(const ModelSpec& spec, const ParamPoint& params, const Run& run,
                    bool with_day_effect, InfoMatrix& info);

/// log|info| from a pivoted LDL^T factorization, or -infinity when a pivot
/// falls below `tolerance` times the largest diagonal entry.
double log_det(const InfoMatrix& info, double tolerance = kSingularTolerance);

/// (e_i^T info^{-1} e_i)^{-1} by one linear solve; 0 when info is singular.
double inv_quadratic_form(const InfoMatrix& info, int index,
                          double tolerance = kSingularTolerance);

}  // namespace odex
