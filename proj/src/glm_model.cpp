#include "odex/glm_model.hpp"

#include <cmath>
#include <sstream>

#include "odex/error.hpp"

namespace odex {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidPredictor: return "InvalidPredictor";
    case ErrorKind::MissingGamma: return "MissingGamma";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::PredictorOutOfDomain: return "PredictorOutOfDomain";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Dimension: return "Dimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view factor_name(Factor f) { return kFactorNames[static_cast<int>(f)]; }

Factor parse_factor(std::string_view name) {
  for (int i = 0; i < kNumFactors; ++i) {
    if (kFactorNames[i] == name) return static_cast<Factor>(i);
  }
  throw Error(ErrorKind::Parse, "unknown factor '" + std::string(name) + "'");
}

std::string_view link_name(Link link) {
  switch (link) {
    case Link::Identity: return "identity";
    case Link::Inverse: return "inverse";
    case Link::Log: return "log";
  }
  return "?";
}

Link parse_link(std::string_view name) {
  if (name == "identity") return Link::Identity;
  if (name == "inverse") return Link::Inverse;
  if (name == "log" || name == "logistic") return Link::Log;
  throw Error(ErrorKind::Parse, "unknown link '" + std::string(name) + "'");
}

namespace {

void require_positive(Link link, double eta) {
  if (link != Link::Log && !(eta > 0.0)) {
    std::ostringstream os;
    os << "linear predictor " << eta << " is not positive under the " << link_name(link)
       << " link";
    throw Error(ErrorKind::InvalidPredictor, os.str());
  }
}

}  // namespace

double link_apply(Link link, double mu) {
  switch (link) {
    case Link::Identity: return mu;
    case Link::Inverse: return 1.0 / mu;
    case Link::Log: return std::log(mu);
  }
  return mu;
}

double link_inverse(Link link, double eta) {
  require_positive(link, eta);
  switch (link) {
    case Link::Identity: return eta;
    case Link::Inverse: return 1.0 / eta;
    case Link::Log: return std::exp(eta);
  }
  return eta;
}

double link_inverse_derivative(Link link, double eta) {
  switch (link) {
    case Link::Identity: return 1.0;
    case Link::Inverse: return -1.0 / (eta * eta);
    case Link::Log: return std::exp(eta);
  }
  return 1.0;
}

double info_weight(Link link, double eta) {
  require_positive(link, eta);
  if (link == Link::Log) return 1.0;
  return 1.0 / (eta * eta);
}

Term Term::interaction(Factor a, Factor b) {
  if (a == b) throw Error(ErrorKind::InvalidArgument, "interaction needs two distinct factors");
  if (static_cast<int>(b) < static_cast<int>(a)) std::swap(a, b);
  return {Kind::Interaction, a, b};
}

double Term::evaluate(const std::array<double, kNumFactors>& x) const {
  const double xa = x[static_cast<int>(a)];
  switch (kind) {
    case Kind::Intercept: return 1.0;
    case Kind::Main: return xa;
    case Kind::Square: return xa * xa;
    case Kind::Interaction: return xa * x[static_cast<int>(b)];
  }
  return 0.0;
}

std::string Term::label() const {
  switch (kind) {
    case Kind::Intercept: return "(Intercept)";
    case Kind::Main: return std::string(factor_name(a));
    case Kind::Square: return std::string(factor_name(a)) + "^2";
    case Kind::Interaction:
      return std::string(factor_name(a)) + "*" + std::string(factor_name(b));
  }
  return "?";
}

bool ModelSpec::uses(Factor f) const {
  for (Factor g : factors)
    if (g == f) return true;
  return false;
}

void ModelSpec::validate() const {
  auto fail = [this](const std::string& msg) {
    throw Error(ErrorKind::InvalidArgument, "model '" + name + "': " + msg);
  };
  if (terms.empty() || terms.front().kind != Term::Kind::Intercept)
    fail("first term must be the intercept");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (t.kind == Term::Kind::Interaction && t.a == t.b) fail("degenerate interaction");
    if (t.kind != Term::Kind::Intercept) {
      if (!uses(t.a)) fail("term " + t.label() + " uses an unlisted factor");
      if (t.kind == Term::Kind::Interaction && !uses(t.b))
        fail("term " + t.label() + " uses an unlisted factor");
    }
    for (std::size_t j = 0; j < i; ++j)
      if (terms[j] == t) fail("duplicate term " + t.label());
  }
}

Eigen::VectorXd regressor(const ModelSpec& spec, const Run& run) {
  Eigen::VectorXd z(spec.num_params());
  for (int j = 0; j < spec.num_params(); ++j) z[j] = spec.terms[j].evaluate(run.coords);
  return z;
}

double linear_predictor(const ModelSpec& spec, const ParamPoint& params, const Run& run) {
  if (params.beta.size() != spec.num_params())
    throw Error(ErrorKind::Dimension, "beta length does not match the terms of '" + spec.name + "'");
  double eta = regressor(spec, run).dot(params.beta);
  if (run.day != 0) {
    if (!params.gamma) throw Error(ErrorKind::MissingGamma, "day-1 run needs a day effect");
    eta += *params.gamma;
  }
  return eta;
}

}  // namespace odex
