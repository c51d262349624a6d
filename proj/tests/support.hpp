#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "odex/bundled.hpp"
#include "odex/criteria.hpp"
#include "odex/information.hpp"

namespace odex::test {

inline Design initial_block() {
  Design d;
  d.runs = bundled::ccd30().runs;
  return d;
}

inline Scenario scenario(const std::string& name, double gamma_mult = 1.0) {
  Scenario s;
  s.spec = bundled::model(name);
  s.params = bundled::estimates(name);
  s.params.gamma = gamma_mult * bundled::default_gamma(name);
  s.label = name;
  return s;
}

inline Design random_design(std::mt19937_64& rng, int m, int day = 1) {
  std::uniform_real_distribution<double> u(kBoxLower, kBoxUpper);
  Design d;
  for (int i = 0; i < m; ++i) d.runs.push_back(Run{{u(rng), u(rng), u(rng), u(rng)}, day});
  return d;
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, int rank = -1) {
  std::normal_distribution<double> g;
  if (rank < 0) rank = n + 2;
  Eigen::MatrixXd a(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = g(rng);
  return a * a.transpose();
}

/// Determinant by Laplace expansion along the first row, in long double.
inline long double cofactor_det(const std::vector<std::vector<long double>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  long double det = 0.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<long double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<long double> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(std::move(row));
    }
    const long double sign = (c % 2 == 0) ? 1.0L : -1.0L;
    det += sign * a[0][c] * cofactor_det(minor);
  }
  return det;
}

inline long double cofactor_det(const Eigen::MatrixXd& m) {
  std::vector<std::vector<long double>> a(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a[static_cast<std::size_t>(i)].push_back(m(i, j));
  return cofactor_det(a);
}

}  // namespace odex::test
