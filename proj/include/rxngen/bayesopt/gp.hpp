// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rxngen::bayesopt {

class GPError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RBF kernel k(a, b) = signal_var * exp(-|a - b|^2 / (2 lengthscale^2)).
struct GPHyper {
  double lengthscale = 1.0;
  double signal_var = 1.0;
  double noise_var = 1e-2;
};

struct GPFitOptions {
  int restarts = 8;
  int iterations = 150;
  double step = 0.05;  // Adam step in log-hyperparameter space
  std::uint64_t seed = 0;
  bool fix_noise = false;  // keep init.noise_var (may be 0)
};

struct GPModel {
  Eigen::MatrixXd Z;  // n x d
  Eigen::VectorXd y;
  double prior_mean = 0;  // mean of y
  GPHyper hyper;
  double jitter = 0;      // added to the diagonal for a stable factor
  Eigen::MatrixXd L;      // lower Cholesky factor of K + (noise + jitter) I
  Eigen::VectorXd alpha;  // (K + (noise + jitter) I)^-1 (y - prior_mean)
  double log_marginal_likelihood = 0;
};

struct Prediction {
  double mean = 0;
  double variance = 0;
};

Eigen::MatrixXd rbf_kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GPHyper& hyper);
Eigen::MatrixXd rbf_kernel_matrix_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GPHyper& hyper);

/// Factorizes for fixed hyperparameters. Jitter escalates from 1e-12 to
/// 1e-6; throws GPError if the matrix is still not positive definite.
GPModel gp_condition(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const GPHyper& hyper);

/// Maximizes the log marginal likelihood over (lengthscale, signal_var,
/// noise_var) by gradient ascent in log space from `restarts` seeded starts
/// (the first at `init`). Requires n >= 2.
GPModel gp_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const GPHyper& init = {},
               const GPFitOptions& options = {});

/// Posterior of the latent function plus observation noise; the variance is
/// clamped at 0 below 1e-12.
Prediction gp_predict(const GPModel& model, const Eigen::VectorXd& z);
std::vector<Prediction> gp_predict_batch(const GPModel& model, const Eigen::MatrixXd& Zs);

/// Maximization convention.
double expected_improvement(double mean, double variance, double best);
std::vector<double> expected_improvement_batch(const std::vector<Prediction>& preds, double best);
std::vector<double> expected_improvement_batch_serial(const std::vector<Prediction>& preds, double best);

}  // namespace rxngen::bayesopt
