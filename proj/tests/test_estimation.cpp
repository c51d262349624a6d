#include "doctest.h"

#include <cmath>
#include <random>
#include <thread>

#include "odex/bundled.hpp"
#include "odex/error.hpp"
#include "odex/estimation.hpp"

using namespace odex;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

// Five-point finite-difference gradient of the log-likelihood in
// (beta[, gamma]), with steps of one hundredth of a standard error.
Eigen::VectorXd numeric_gradient(const FittedModel& m, const Dataset& data) {
  const ParamPoint p = m.params();
  const int nb = static_cast<int>(p.beta.size());
  const int k = nb + (p.gamma ? 1 : 0);
  auto shifted = [&](int j, double delta) {
    ParamPoint q = p;
    if (j < nb) q.beta(j) += delta;
    else q.gamma = *p.gamma + delta;
    return log_likelihood(m.spec, data, m.response, q);
  };
  Eigen::VectorXd g(k);
  for (int j = 0; j < k; ++j) {
    const double h = 1e-2 * m.std_errors(j);
    g(j) = (-shifted(j, 2 * h) + 8 * shifted(j, h) - 8 * shifted(j, -h) + shifted(j, -2 * h)) /
           (12 * h);
  }
  return g;
}

FittedModel model_from_estimates(const std::string& name) {
  FittedModel m;
  m.spec = bundled::model(name);
  m.response = name;
  m.beta_hat = bundled::estimates(name).beta;
  return m;
}

}  // namespace

TEST_CASE("fits reproduce the published estimates") {
  const Dataset data = bundled::ccd30();
  for (const auto& name : bundled::all_model_names()) {
    const FittedModel m = fit(bundled::model(name), data, name, false);
    const double tol = (name == "velocity" || name == "flame_width") ? 1e-3 : 1e-2;
    const Eigen::VectorXd published = bundled::estimates(name).beta;
    for (Eigen::Index j = 0; j < published.size(); ++j) CHECK(std::abs(m.beta_hat(j) - published(j)) <= tol);
    CHECK(m.n == 30);
    CHECK(m.std_errors.minCoeff() > 0.0);
    CHECK(m.nu_hat > 0.0);
  }
}

TEST_CASE("standard errors match the published table to one unit in the last printed digit") {
  const Dataset data = bundled::ccd30();
  // As printed. The flame-intensity K^2 and FDV^2 entries appear in swapped
  // rows in the source table; they are compared against the swapped fit order.
  const std::vector<std::pair<std::string, std::vector<double>>> printed = {
      {"temperature", {2.6722, 2.3136, 2.2939, 2.3136, 2.0813}},
      {"velocity", {0.0016, 0.0014, 0.0014, 0.0014, 0.0014, 0.0012, 0.0017}},
      {"flame_width", {0.0018, 0.0015, 0.0016, 0.0015, 0.0015, 0.0015}},
      {"flame_intensity", {0.3364, 0.1901, 0.1863, 0.1970, 0.2042, 0.1760, 0.1699, 0.1925, 0.2378}},
  };
  for (const auto& [name, se] : printed) {
    const FittedModel m = fit(bundled::model(name), data, name, false);
    for (std::size_t j = 0; j < se.size(); ++j) {
      CHECK(std::abs(m.std_errors(static_cast<Eigen::Index>(j)) - se[j]) <= 1e-4);
    }
  }
}

TEST_CASE("BIC reproduces the model-selection table to one unit in the last printed digit") {
  const Dataset data = bundled::ccd30();
  const std::pair<const char*, double> table[] = {
      {"temperature", 245.744}, {"velocity", 196.979}, {"flame_width", 99.749},
      {"flame_intensity", 106.148}};
  for (const auto& [name, bic] : table) {
    const FittedModel m = fit(bundled::model(name), data, name, false);
    CHECK(m.num_bic_params() == m.spec.num_params() + 1);
    CHECK(std::abs(m.bic - bic) <= 1e-3);
  }
}

TEST_CASE("score vanishes at every fitted optimum") {
  const Dataset base = bundled::ccd30();
  const Dataset ref = base.concat(bundled::reference_runs());
  const Dataset opt = base.concat(bundled::bayes_runs());
  for (const auto& name : bundled::all_model_names()) {
    for (Link link : {Link::Identity, Link::Inverse, Link::Log}) {
      ModelSpec spec = bundled::model(name);
      spec.link = link;
      for (const auto* data : {&base, &ref, &opt}) {
        const bool day = data != &base;
        const FittedModel m = fit(spec, *data, name, day);
        CAPTURE(name);
        CAPTURE(link_name(link));
        CAPTURE(day);
        const Eigen::VectorXd fd = numeric_gradient(m, *data);
        CHECK(fd.cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + std::abs(m.log_likelihood)));
        const Eigen::VectorXd s = score(spec, *data, name, m.params(), day);
        CHECK(s.size() == fd.size());
        CHECK(s.cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + std::abs(m.log_likelihood)));
      }
    }
  }
}

TEST_CASE("analytic score matches finite differences away from the optimum") {
  const Dataset data = bundled::ccd30().concat(bundled::reference_runs());
  FittedModel m = fit(bundled::model("flame_intensity"), data, "flame_intensity", true);
  m.beta_hat(1) += 0.05;
  m.gamma_hat = *m.gamma_hat - 0.3;
  const Eigen::VectorXd fd = numeric_gradient(m, data);
  const Eigen::VectorXd s = score(m.spec, data, m.response, m.params(), true);
  for (Eigen::Index j = 0; j < s.size(); ++j)
    CHECK(s(j) == doctest::Approx(fd(j)).epsilon(1e-5));
}

TEST_CASE("refitting on fitted means reproduces the estimates") {
  const Dataset data = bundled::ccd30();
  for (const auto& name : bundled::all_model_names()) {
    const FittedModel m = fit(bundled::model(name), data, name, false);
    Dataset fitted = data;
    fitted.responses[name] = predict(m, data.runs);
    const FittedModel again = fit(m.spec, fitted, name, false);
    for (Eigen::Index j = 0; j < m.beta_hat.size(); ++j)
      CHECK(std::abs(again.beta_hat(j) - m.beta_hat(j)) <= 1e-8 * (1.0 + std::abs(m.beta_hat(j))));
  }
}

TEST_CASE("log-link fits shift only the intercept under response scaling") {
  const Dataset data = bundled::ccd30();
  for (const auto& name : bundled::all_model_names()) {
    ModelSpec spec = bundled::model(name);
    spec.link = Link::Log;
    const FittedModel m = fit(spec, data, name, false);
    for (double c : {0.01, 7.0, 1234.5}) {
      Dataset scaled = data;
      for (double& y : scaled.responses[name]) y *= c;
      const FittedModel s = fit(spec, scaled, name, false);
      CHECK(std::abs(s.beta_hat(0) - m.beta_hat(0) - std::log(c)) <= 1e-8);
      for (Eigen::Index j = 1; j < m.beta_hat.size(); ++j)
        CHECK(std::abs(s.beta_hat(j) - m.beta_hat(j)) <= 1e-8);
    }
  }
}

TEST_CASE("day effect is estimated on the augmented data") {
  const Dataset data = bundled::ccd30().concat(bundled::reference_runs());
  const FittedModel m = fit(bundled::model("temperature"), data, "temperature", true);
  REQUIRE(m.gamma_hat);
  CHECK(m.n == 34);
  CHECK(m.std_errors.size() == 6);
  CHECK(m.covariance.rows() == 6);
  CHECK(m.num_bic_params() == 7);
  CHECK(m.bic == doctest::Approx(-2.0 * m.log_likelihood + 7.0 * std::log(34.0)));
  // The reference runs are on the same grid as the CCD, so the day effect is
  // visible as a shift of the fitted level.
  CHECK(std::isfinite(*m.gamma_hat));
}

TEST_CASE("fit preconditions") {
  const Dataset data = bundled::ccd30();
  Dataset tiny;
  tiny.runs.assign(data.runs.begin(), data.runs.begin() + 5);
  tiny.responses["temperature"].assign(data.responses.at("temperature").begin(),
                                       data.responses.at("temperature").begin() + 5);
  CHECK(kind_of([&] { fit(bundled::model("temperature"), tiny, "temperature", false); }) ==
        ErrorKind::RankDeficient);

  // Only the center runs: K never varies.
  Dataset center;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.runs[i].coords == std::array<double, 4>{0, 0, 0, 0} || i < 2) {
      center.runs.push_back(data.runs[i]);
      center.responses["temperature"].push_back(data.responses.at("temperature")[i]);
    }
  }
  for (int k = 0; k < 4; ++k) {
    center.runs.push_back(data.runs[4]);
    center.responses["temperature"].push_back(1500.0 + k);
  }
  CHECK(kind_of([&] { fit(bundled::model("temperature"), center, "temperature", false); }) ==
        ErrorKind::RankDeficient);

  CHECK(kind_of([&] { fit(bundled::model("temperature"), data, "pressure", false); }) ==
        ErrorKind::Parse);
  Dataset bad = data;
  bad.responses["temperature"][7] = -1.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::Parse);
}

TEST_CASE("predictions") {
  const Run center{{0, 0, 0, 0}, 0};
  CHECK(predict(model_from_estimates("temperature"), {center})[0] == doctest::Approx(1523.2627));
  CHECK(predict(model_from_estimates("velocity"), {center})[0] ==
        doctest::Approx(std::exp(6.5648)).epsilon(1e-12));
  CHECK(std::abs(predict(model_from_estimates("velocity"), {center})[0] - 710.0) < 0.5);
  FittedModel zero = model_from_estimates("velocity");
  zero.beta_hat.setZero();
  CHECK(predict(zero, {Run{{1.2, -0.3, 2, -2}, 0}})[0] == 1.0);

  FittedModel with_day = model_from_estimates("temperature");
  with_day.gamma_hat = -16.0;
  CHECK(predict(with_day, {Run{{0, 0, 0, 0}, 1}})[0] == doctest::Approx(1507.2627));
  // Without a day effect the day flag is ignored.
  CHECK(predict(model_from_estimates("temperature"), {Run{{0, 0, 0, 0}, 1}})[0] ==
        doctest::Approx(1523.2627));

  FittedModel neg = model_from_estimates("flame_width");
  neg.beta_hat(0) = -1.0;
  try {
    predict(neg, {center, center});
    FAIL("expected PredictorOutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PredictorOutOfDomain);
    CHECK(std::string(e.what()).find("run 1") != std::string::npos);
  }
}

TEST_CASE("error metrics") {
  const std::vector<double> obs{3.0, 5.0, 8.0, 13.0};
  CHECK(error_metric(obs, obs, ErrorMetric::MSE) == 0.0);
  CHECK(error_metric(obs, obs, ErrorMetric::RMSE) == 0.0);
  CHECK(error_metric(obs, obs, ErrorMetric::MAE) == 0.0);
  for (double c : {-2.5, 0.75}) {
    std::vector<double> pred = obs;
    for (double& p : pred) p += c;
    CHECK(error_metric(pred, obs, ErrorMetric::MSE) == doctest::Approx(c * c));
    CHECK(error_metric(pred, obs, ErrorMetric::RMSE) == doctest::Approx(std::abs(c)));
    CHECK(error_metric(pred, obs, ErrorMetric::MAE) == doctest::Approx(std::abs(c)));
  }
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> pred = obs;
    for (double& p : pred) p += g(rng);
    const double mse = error_metric(pred, obs, ErrorMetric::MSE);
    CHECK(error_metric(pred, obs, ErrorMetric::RMSE) == doctest::Approx(std::sqrt(mse)));
    CHECK(error_metric(pred, obs, ErrorMetric::MAE) <= error_metric(pred, obs, ErrorMetric::RMSE) + 1e-15);
  }
  CHECK(parse_metric("rmse") == ErrorMetric::RMSE);
  CHECK(kind_of([] { parse_metric("r2"); }) == ErrorKind::InvalidArgument);

  // Fitted means as data give a zero prediction error.
  const Dataset data = bundled::ccd30();
  const FittedModel m = fit(bundled::model("velocity"), data, "velocity", false);
  Dataset perfect = data;
  perfect.responses["velocity"] = predict(m, data.runs);
  CHECK(prediction_error(m, perfect, "velocity", ErrorMetric::MSE) == 0.0);
}

TEST_CASE("observed efficiency") {
  const Dataset ref = bundled::ccd30().concat(bundled::reference_runs());
  const Dataset opt = bundled::ccd30().concat(bundled::bayes_runs());
  const FittedModel a = fit(bundled::model("temperature"), ref, "temperature", true);
  const FittedModel b = fit(bundled::model("temperature"), opt, "temperature", true);
  CHECK(observed_efficiency(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  const double e = observed_efficiency(a, b);
  CHECK(e > 0.0);
  CHECK(observed_efficiency(b, a) == doctest::Approx(1.0 / e).epsilon(1e-12));
  FittedModel scaled = a;
  scaled.covariance *= 4.0;
  CHECK(observed_efficiency(scaled, b) == doctest::Approx(e / 4.0).epsilon(1e-12));
  const FittedModel no_day = fit(bundled::model("temperature"), bundled::ccd30(), "temperature", false);
  CHECK(kind_of([&] { observed_efficiency(a, no_day); }) == ErrorKind::Dimension);
  FittedModel singular = a;
  singular.covariance.row(0).setZero();
  singular.covariance.col(0).setZero();
  CHECK(kind_of([&] { observed_efficiency(singular, b); }) == ErrorKind::RankDeficient);
}

TEST_CASE("fits are deterministic and may run concurrently") {
  const Dataset data = bundled::ccd30();
  const FittedModel ref = fit(bundled::model("flame_intensity"), data, "flame_intensity", false);
  std::vector<FittedModel> out(4);
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < out.size(); ++t)
      threads.emplace_back([&, t] {
        out[t] = fit(bundled::model("flame_intensity"), data, "flame_intensity", false);
      });
  }
  for (const auto& m : out) {
    CHECK(m.beta_hat == ref.beta_hat);
    CHECK(m.log_likelihood == ref.log_likelihood);
  }
}
