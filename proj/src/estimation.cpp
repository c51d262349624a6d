#include "odex/estimation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/log1p.hpp>
#include <boost/math/tools/roots.hpp>

#include "odex/error.hpp"
#include "odex/information.hpp"

namespace odex {

const std::vector<double>& Dataset::response(const std::string& name) const {
  auto it = responses.find(name);
  if (it == responses.end()) throw Error(ErrorKind::Parse, "dataset has no response '" + name + "'");
  return it->second;
}

void Dataset::validate() const {
  for (const auto& [name, values] : responses) {
    if (values.size() != runs.size())
      throw Error(ErrorKind::Parse, "response '" + name + "' has the wrong number of rows");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        std::ostringstream os;
        os << "row " << i + 1 << ": " << name << " = " << values[i]
           << " is not positive (Gamma responses must be > 0)";
        throw Error(ErrorKind::Parse, os.str());
      }
    }
  }
}

Dataset Dataset::concat(const Dataset& other) const {
  Dataset out;
  out.runs = runs;
  out.runs.insert(out.runs.end(), other.runs.begin(), other.runs.end());
  for (const auto& [name, values] : responses) {
    auto it = other.responses.find(name);
    if (it == other.responses.end()) continue;
    std::vector<double> v = values;
    v.insert(v.end(), it->second.begin(), it->second.end());
    out.responses.emplace(name, std::move(v));
  }
  return out;
}

int FittedModel::num_bic_params() const {
  return spec.num_params() + 1 + (gamma_hat ? 1 : 0);
}

ParamPoint FittedModel::params() const { return {beta_hat, gamma_hat, nu_hat}; }

namespace {

Eigen::MatrixXd model_matrix(const ModelSpec& spec, const std::vector<Run>& runs, bool day) {
  const int p = spec.num_params();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(runs.size()), p + (day ? 1 : 0));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X.row(r).head(p) = regressor(spec, runs[i]).transpose();
    if (day) X(r, p) = runs[i].day != 0 ? 1.0 : 0.0;
  }
  return X;
}

bool in_domain(Link link, const Eigen::VectorXd& eta) {
  return link == Link::Log || (eta.array() > 0.0).all();
}

Eigen::VectorXd mean_of(Link link, const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = link_inverse(link, eta[i]);
  return mu;
}

double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) d += -std::log(y[i] / mu[i]) + (y[i] - mu[i]) / mu[i];
  return 2.0 * d;
}

// nu log nu - nu - lgamma(nu). For large nu the three terms nearly cancel, so
// the Stirling form 0.5 log(nu / 2 pi) - R(nu) is used with the series for the
// remainder R(nu) = lgamma(nu) - (nu - 1/2) log nu + nu - log(2 pi) / 2.
double shape_constant(double nu) {
  if (nu < 15.0) return nu * std::log(nu) - nu - std::lgamma(nu);
  const double x = 1.0 / nu, x2 = x * x;
  const double r =
      x * (1.0 / 12 - x2 * (1.0 / 360 - x2 * (1.0 / 1260 - x2 * (1.0 / 1680 - x2 / 1188))));
  return 0.5 * std::log(nu / (2.0 * std::numbers::pi)) - r;
}

// Sum of nu log(nu y / mu) - nu y / mu - log y - lgamma(nu), regrouped as
// [nu log nu - nu - lgamma nu] + nu [log(y/mu) - (y/mu - 1)] - log y so that
// large-shape fits keep their precision.
double gamma_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double nu) {
  double ll = static_cast<double>(y.size()) * shape_constant(nu);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    ll += nu * boost::math::log1pmx(y[i] / mu[i] - 1.0) - std::log(y[i]);
  return ll;
}

// Profile ML shape: solves log(nu) - digamma(nu) = D / (2n) on (0, 1e6].
double ml_shape(double dev, int n) {
  constexpr double kMaxShape = 1e6;
  const double c = dev / (2.0 * n);
  auto f = [c](double nu) { return std::log(nu) - boost::math::digamma(nu) - c; };
  if (!(c > 0.0) || f(kMaxShape) > 0.0) return kMaxShape;
  const double guess = std::min(kMaxShape, 1.0 / (2.0 * c));  // log nu - psi(nu) ~ 1/(2 nu)
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::bracket_and_solve_root(
      f, guess, 2.0, false, boost::math::tools::eps_tolerance<double>(50), iters);
  return std::min(kMaxShape, 0.5 * (lo + hi));
}

}  // namespace

FittedModel fit(const ModelSpec& spec, const Dataset& data, const std::string& response,
                bool include_day_effect, const FitOptions& options) {
  spec.validate();
  data.validate();
  const std::vector<double>& yv = data.response(response);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  const Eigen::MatrixXd X = model_matrix(spec, data.runs, include_day_effect);
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  const Link link = spec.link;

  if (n < k + 1)
    throw Error(ErrorKind::RankDeficient, "need at least " + std::to_string(k + 1) +
                                              " observations to fit '" + spec.name + "'");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k)
    throw Error(ErrorKind::RankDeficient, "model matrix of '" + spec.name + "' is rank deficient");

  // Start from least squares on the linked responses.
  Eigen::VectorXd gy(n);
  for (int i = 0; i < n; ++i) gy[i] = link_apply(link, y[i]);
  Eigen::VectorXd beta = qr.solve(gy);
  Eigen::VectorXd eta = X * beta;
  if (!in_domain(link, eta))
    throw Error(ErrorKind::PredictorOutOfDomain,
                "starting values give a nonpositive predictor for '" + spec.name + "'");
  Eigen::VectorXd mu = mean_of(link, eta);
  double dev = deviance(y, mu);

  // Converged once the scoring step is negligible in the information metric
  // (its predicted deviance change is at rounding level), or after a few
  // polishing steps past the relative-deviance criterion.
  constexpr int kPolishSteps = 5;
  int iter = 0;
  int polish = 0;
  bool dev_converged = false;
  bool converged = false;
  for (; iter < options.max_iterations && !converged; ++iter) {
    // Scoring step: weighted least squares of the working residual
    // (y - mu) / (d mu/d eta), solved for the increment directly.
    Eigen::VectorXd w(n), r(n);
    for (int i = 0; i < n; ++i) {
      const double d = link_inverse_derivative(link, eta[i]);
      w[i] = d * d / (mu[i] * mu[i]);
      r[i] = (y[i] - mu[i]) / d;
    }
    const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
    const Eigen::MatrixXd XtWX = XtW * X;
    const Eigen::VectorXd step = XtWX.ldlt().solve(XtW * r);
    const double decrement = step.dot(XtWX * step);
    if (decrement <= 1e-24 * (dev + 1e-300) || (dev_converged && polish >= kPolishSteps)) {
      converged = true;
      break;
    }
    if (dev_converged) ++polish;

    double scale = 1.0;
    bool accepted = false;
    bool domain_trouble = false;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      const Eigen::VectorXd cand = beta + scale * step;
      const Eigen::VectorXd cand_eta = X * cand;
      if (!in_domain(link, cand_eta)) {
        domain_trouble = true;
        continue;
      }
      const Eigen::VectorXd cand_mu = mean_of(link, cand_eta);
      const double cand_dev = deviance(y, cand_mu);
      if (!std::isfinite(cand_dev)) continue;
      // While polishing, the deviance is flat to rounding and the full step
      // is taken as long as it stays in the domain.
      if (dev_converged || cand_dev <= dev * (1.0 + 1e-14) + 1e-300) {
        dev_converged = dev_converged ||
                        std::abs(dev - cand_dev) <= options.tolerance * (std::abs(cand_dev) + 0.1);
        beta = cand;
        eta = cand_eta;
        mu = cand_mu;
        dev = cand_dev;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (domain_trouble)
        throw Error(ErrorKind::PredictorOutOfDomain,
                    "scoring for '" + spec.name + "' left the positive predictor domain");
      throw Error(ErrorKind::Divergence,
                  "step halving exhausted while fitting '" + spec.name + "'");
    }
  }
  if (!converged && !dev_converged)
    throw Error(ErrorKind::Divergence, "Fisher scoring for '" + spec.name + "' did not converge");

  FittedModel out;
  out.spec = spec;
  out.response = response;
  out.n = n;
  out.iterations = iter;
  out.beta_hat = beta.head(spec.num_params());
  if (include_day_effect) out.gamma_hat = beta[spec.num_params()];
  out.nu_hat = ml_shape(dev, n);

  Eigen::VectorXd w(n);
  double pearson = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = link_inverse_derivative(link, eta[i]);
    w[i] = d * d / (mu[i] * mu[i]);
    const double r = (y[i] - mu[i]) / mu[i];
    pearson += r * r;
  }
  out.dispersion = pearson / (n - k);
  const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
  out.covariance = out.dispersion * info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  out.std_errors = out.covariance.diagonal().cwiseSqrt();
  out.log_likelihood = gamma_loglik(y, mu, out.nu_hat);
  out.bic = -2.0 * out.log_likelihood + out.num_bic_params() * std::log(static_cast<double>(n));
  return out;
}

double log_likelihood(const ModelSpec& spec, const Dataset& data, const std::string& response,
                      const ParamPoint& params) {
  const std::vector<double>& yv = data.response(response);
  Eigen::VectorXd y(static_cast<Eigen::Index>(yv.size())), mu(y.size());
  for (std::size_t i = 0; i < yv.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = yv[i];
    mu[static_cast<Eigen::Index>(i)] =
        link_inverse(spec.link, linear_predictor(spec, params, data.runs[i]));
  }
  return gamma_loglik(y, mu, params.nu);
}

Eigen::VectorXd score(const ModelSpec& spec, const Dataset& data, const std::string& response,
                      const ParamPoint& params, bool include_day_effect) {
  const std::vector<double>& y = data.response(response);
  const Eigen::MatrixXd X = model_matrix(spec, data.runs, include_day_effect);
  Eigen::VectorXd coef(X.cols());
  coef.head(spec.num_params()) = params.beta;
  if (include_day_effect) coef[spec.num_params()] = params.gamma.value_or(0.0);
  const Eigen::VectorXd eta = X * coef;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double mu = link_inverse(spec.link, eta[i]);
    const double d = link_inverse_derivative(spec.link, eta[i]);
    s += params.nu * (y[static_cast<std::size_t>(i)] - mu) / (mu * mu) * d * X.row(i).transpose();
  }
  return s;
}

std::vector<double> predict(const FittedModel& model, const std::vector<Run>& runs) {
  const ParamPoint params = model.params();
  std::vector<double> out;
  out.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    Run r = runs[i];
    if (!model.gamma_hat) r.day = 0;
    const double eta = linear_predictor(model.spec, params, r);
    if (model.spec.link != Link::Log && !(eta > 0.0)) {
      std::ostringstream os;
      os << "run " << i + 1 << ": predicted linear predictor " << eta << " is not positive under the "
         << link_name(model.spec.link) << " link";
      throw Error(ErrorKind::PredictorOutOfDomain, os.str());
    }
    out.push_back(link_inverse(model.spec.link, eta));
  }
  return out;
}

ErrorMetric parse_metric(std::string_view name) {
  if (name == "mse") return ErrorMetric::MSE;
  if (name == "rmse") return ErrorMetric::RMSE;
  if (name == "mae") return ErrorMetric::MAE;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(ErrorMetric metric) {
  switch (metric) {
    case ErrorMetric::MSE: return "mse";
    case ErrorMetric::RMSE: return "rmse";
    case ErrorMetric::MAE: return "mae";
  }
  return "?";
}

double error_metric(const std::vector<double>& predicted, const std::vector<double>& observed,
                    ErrorMetric metric) {
  if (predicted.size() != observed.size() || predicted.empty())
    throw Error(ErrorKind::Dimension, "prediction and observation counts differ");
  double sq = 0.0, abs = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = predicted[i] - observed[i];
    sq += r * r;
    abs += std::abs(r);
  }
  const double n = static_cast<double>(predicted.size());
  switch (metric) {
    case ErrorMetric::MSE: return sq / n;
    case ErrorMetric::RMSE: return std::sqrt(sq / n);
    case ErrorMetric::MAE: return abs / n;
  }
  return 0.0;
}

double prediction_error(const FittedModel& model, const Dataset& data, const std::string& response,
                        ErrorMetric metric) {
  return error_metric(predict(model, data.runs), data.response(response), metric);
}

double observed_efficiency(const FittedModel& fit_a, const FittedModel& fit_b) {
  if (fit_a.covariance.rows() != fit_b.covariance.rows() ||
      fit_a.spec.num_params() != fit_b.spec.num_params() ||
      fit_a.gamma_hat.has_value() != fit_b.gamma_hat.has_value())
    throw Error(ErrorKind::Dimension, "fits do not share the same parameterization");
  const double la = log_det(fit_a.covariance);
  const double lb = log_det(fit_b.covariance);
  if (!std::isfinite(la) || !std::isfinite(lb))
    throw Error(ErrorKind::RankDeficient, "covariance matrix is singular");
  return std::exp((lb - la) / static_cast<double>(fit_a.covariance.rows()));
}

}  // namespace odex
