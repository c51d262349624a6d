#pragma once

// Gamma GLM building blocks: links, quadratic response-surface terms,
// linear predictors and the information weight of each observation.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace odex {

/// The four process factors. Every Run carries all of them so that one joint
/// design can be scored in each response model.
enum class Factor : int { L = 0, K = 1, D = 2, FDV = 3 };

inline constexpr int kNumFactors = 4;
inline constexpr std::array<std::string_view, kNumFactors> kFactorNames = {"L", "K", "D", "FDV"};

/// Closed design box for every coordinate.
inline constexpr double kBoxLower = -2.0;
inline constexpr double kBoxUpper = 2.0;

std::string_view factor_name(Factor f);
Factor parse_factor(std::string_view name);

enum class Link { Identity, Inverse, Log };

std::string_view link_name(Link link);
Link parse_link(std::string_view name);

/// g(mu)
double link_apply(Link link, double mu);
/// g^{-1}(eta); throws InvalidPredictor when eta <= 0 for identity/inverse links.
double link_inverse(Link link, double eta);
/// d mu / d eta at eta.
double link_inverse_derivative(Link link, double eta);

/// Weight w(eta) multiplying z z^T in the Fisher information of a Gamma
/// observation (shape fixed to 1): 1/eta^2 for identity and inverse links,
/// 1 for the log link.
double info_weight(Link link, double eta);

struct Term {
  enum class Kind { Intercept, Main, Square, Interaction };

  Kind kind = Kind::Intercept;
  Factor a = Factor::L;
  Factor b = Factor::L;  // only meaningful for Interaction

  static Term intercept() { return {}; }
  static Term main(Factor f) { return {Kind::Main, f, f}; }
  static Term square(Factor f) { return {Kind::Square, f, f}; }
  /// Stored with a < b so that D*FDV and FDV*D compare equal.
  static Term interaction(Factor a, Factor b);

  double evaluate(const std::array<double, kNumFactors>& x) const;
  std::string label() const;

  friend bool operator==(const Term&, const Term&) = default;
};

struct ModelSpec {
  std::string name;
  Link link = Link::Identity;
  std::vector<Factor> factors;
  std::vector<Term> terms;

  /// Number of regression parameters p(s).
  int num_params() const { return static_cast<int>(terms.size()); }
  bool uses(Factor f) const;

  /// Throws InvalidArgument unless the first term is the intercept, terms are
  /// distinct, interactions pair different factors and every factor used by a
  /// term is listed in `factors`.
  void validate() const;
};

struct ParamPoint {
  Eigen::VectorXd beta;
  std::optional<double> gamma;  // day effect on the linked scale
  double nu = 1.0;              // Gamma shape
};

struct Run {
  std::array<double, kNumFactors> coords{};
  int day = 0;  // 0: initial day, 1: any later day

  friend bool operator==(const Run&, const Run&) = default;
};

Eigen::VectorXd regressor(const ModelSpec& spec, const Run& run);

/// z^T beta, plus gamma for day-1 runs. Throws MissingGamma when a day-1 run
/// meets a parameter point without gamma.
double linear_predictor(const ModelSpec& spec, const ParamPoint& params, const Run& run);

}  // namespace odex
