#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "odex/glm_model.hpp"

namespace odex {

struct Dataset {
  std::vector<Run> runs;
  std::map<std::string, std::vector<double>> responses;

  std::size_t size() const { return runs.size(); }
  /// Throws Parse for a missing response or a nonpositive value.
  const std::vector<double>& response(const std::string& name) const;
  void validate() const;

  /// Rows of `this` followed by the rows of `other` (responses common to both).
  Dataset concat(const Dataset& other) const;
};

struct FittedModel {
  ModelSpec spec;
  std::string response;
  Eigen::VectorXd beta_hat;
  std::optional<double> gamma_hat;
  double nu_hat = 1.0;
  double dispersion = 1.0;      // Pearson chi^2 / (n - k)
  Eigen::MatrixXd covariance;   // over (beta, gamma)
  Eigen::VectorXd std_errors;
  double log_likelihood = 0.0;
  double bic = 0.0;
  int n = 0;
  int iterations = 0;

  /// Number of BIC parameters: regression terms, shape and day effect.
  int num_bic_params() const;
  ParamPoint params() const;
};

struct FitOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double tolerance = 1e-12;  // relative change of the deviance
};

/// Maximum-likelihood Gamma GLM by Fisher scoring. The shape is the profile
/// ML estimate given beta; standard errors use the expected information
/// scaled by the Pearson dispersion.
FittedModel fit(const ModelSpec& spec, const Dataset& data, const std::string& response,
                bool include_day_effect, const FitOptions& options = {});

/// Gamma log-likelihood of `response` at (beta, gamma, nu).
double log_likelihood(const ModelSpec& spec, const Dataset& data, const std::string& response,
                      const ParamPoint& params);

/// Score vector of the log-likelihood with respect to (beta[, gamma]) at
/// shape nu.
Eigen::VectorXd score(const ModelSpec& spec, const Dataset& data, const std::string& response,
                      const ParamPoint& params, bool include_day_effect);

/// mu-hat for each run; PredictorOutOfDomain names the offending run.
std::vector<double> predict(const FittedModel& model, const std::vector<Run>& runs);

enum class ErrorMetric { MSE, RMSE, MAE };

ErrorMetric parse_metric(std::string_view name);
std::string_view metric_name(ErrorMetric metric);

double prediction_error(const FittedModel& model, const Dataset& data, const std::string& response,
                        ErrorMetric metric);

/// Aggregate of plain residuals (predicted - observed).
double error_metric(const std::vector<double>& predicted, const std::vector<double>& observed,
                    ErrorMetric metric);

/// (det Cov_b / det Cov_a)^{1/dim}: D-efficiency of design a relative to
/// design b from the estimated covariance matrices.
double observed_efficiency(const FittedModel& fit_a, const FittedModel& fit_b);

}  // namespace odex
