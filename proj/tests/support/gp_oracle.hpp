// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Dense GP posterior without factorization reuse.

#pragma once

#include <cmath>
#include <vector>

#include "rxngen/bayesopt/gp.hpp"

namespace rxngen::testing {

// Gaussian elimination with partial pivoting on a copy of A.
inline std::vector<double> naive_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

inline double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const bayesopt::GPHyper& h) {
  double d2 = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return h.signal_var * std::exp(-d2 / (2 * h.lengthscale * h.lengthscale));
}

inline bayesopt::Prediction naive_predict(const bayesopt::GPModel& m, const Eigen::VectorXd& z) {
  const auto n = static_cast<std::size_t>(m.Z.rows());
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  std::vector<double> resid(n), ks(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf(m.Z.row(static_cast<Eigen::Index>(i)), m.Z.row(static_cast<Eigen::Index>(j)), m.hyper);
    k[i][i] += m.hyper.noise_var + m.jitter;
    resid[i] = m.y[static_cast<Eigen::Index>(i)] - m.prior_mean;
    ks[i] = rbf(m.Z.row(static_cast<Eigen::Index>(i)), z, m.hyper);
  }
  const auto alpha = naive_solve(k, resid);
  const auto v = naive_solve(k, ks);
  bayesopt::Prediction p{m.prior_mean, m.hyper.signal_var + m.hyper.noise_var};
  for (std::size_t i = 0; i < n; ++i) {
    p.mean += ks[i] * alpha[i];
    p.variance -= ks[i] * v[i];
  }
  return p;
}

}  // namespace rxngen::testing
