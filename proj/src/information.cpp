#include "odex/information.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "odex/error.hpp"

namespace odex {

Design Design::initial_part() const {
  Design out{{}, label};
  for (const Run& r : runs)
    if (r.day == 0) out.runs.push_back(r);
  return out;
}

Design Design::new_part() const {
  Design out{{}, label};
  for (const Run& r : runs)
    if (r.day != 0) out.runs.push_back(r);
  return out;
}

Design augment(const Design& initial, const Design& new_runs) {
  Design out{{}, new_runs.label};
  out.runs.reserve(initial.size() + new_runs.size());
  for (Run r : initial.runs) {
    r.day = 0;
    out.runs.push_back(r);
  }
  for (Run r : new_runs.runs) {
    r.day = 1;
    out.runs.push_back(r);
  }
  return out;
}

void check_in_box(const Design& design) {
  for (std::size_t i = 0; i < design.runs.size(); ++i) {
    const Run& r = design.runs[i];
    for (int j = 0; j < kNumFactors; ++j) {
      const double x = r.coords[j];
      if (!(x >= kBoxLower && x <= kBoxUpper)) {
        std::ostringstream os;
        os << "run " << i + 1 << ": " << kFactorNames[j] << " = " << x << " lies outside [-2, 2]";
        throw Error(ErrorKind::InvalidArgument, os.str());
      }
    }
    if (r.day != 0 && r.day != 1) {
      std::ostringstream os;
      os << "run " << i + 1 << ": day flag must be 0 or 1";
      throw Error(ErrorKind::InvalidArgument, os.str());
    }
  }
}

void accumulate_run(const ModelSpec& spec, const ParamPoint& params, const Run& run,
                    bool with_day_effect, InfoMatrix& info) {
  const int p = spec.num_params();
  const int dim = with_day_effect ? p + 1 : p;
  Eigen::VectorXd z(dim);
  z.head(p) = regressor(spec, run);
  double eta = z.head(p).dot(params.beta);
  if (with_day_effect) {
    const double t = run.day != 0 ? 1.0 : 0.0;
    z[p] = t;
    if (t != 0.0) {
      if (!params.gamma) throw Error(ErrorKind::MissingGamma, "day-effect information needs gamma");
      eta += *params.gamma;
    }
  }
  const double w = info_weight(spec.link, eta);
  info.selfadjointView<Eigen::Lower>().rankUpdate(z, w);
}

InfoMatrix fisher_info(const ModelSpec& spec, const ParamPoint& params, const Design& design,
                       bool with_day_effect) {
  if (params.beta.size() != spec.num_params())
    throw Error(ErrorKind::Dimension, "beta length does not match the terms of '" + spec.name + "'");
  const int dim = spec.num_params() + (with_day_effect ? 1 : 0);
  InfoMatrix info = InfoMatrix::Zero(dim, dim);
  for (const Run& r : design.runs) accumulate_run(spec, params, r, with_day_effect, info);
  info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
  return info;
}

namespace {

// Pivoted LDL^T; false when some pivot is below the relative tolerance.
bool factor_nonsingular(const InfoMatrix& info, double tolerance,
                        Eigen::LDLT<InfoMatrix>& ldlt) {
  if (info.rows() == 0) return false;
  const double scale = info.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  ldlt.compute(info);
  if (ldlt.info() != Eigen::Success) return false;
  const auto d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] > tolerance * scale)) return false;
  return true;
}

}  // namespace

double log_det(const InfoMatrix& info, double tolerance) {
  Eigen::LDLT<InfoMatrix> ldlt;
  if (!factor_nonsingular(info, tolerance, ldlt)) return -std::numeric_limits<double>::infinity();
  return ldlt.vectorD().array().log().sum();
}

double inv_quadratic_form(const InfoMatrix& info, int index, double tolerance) {
  if (index < 0 || index >= info.rows())
    throw Error(ErrorKind::Dimension, "inv_quadratic_form: index out of range");
  Eigen::LDLT<InfoMatrix> ldlt;
  if (!factor_nonsingular(info, tolerance, ldlt)) return 0.0;
  const Eigen::VectorXd x = ldlt.solve(Eigen::VectorXd::Unit(info.rows(), index));
  const double q = x[index];
  return q > 0.0 ? 1.0 / q : 0.0;
}

}  // namespace odex
