// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/bayesopt/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "rxngen/numerics/random.hpp"

namespace rxngen::bayesopt {

namespace {

double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GPHyper& h) {
  return h.signal_var * std::exp(-(a - b).squaredNorm() / (2.0 * h.lengthscale * h.lengthscale));
}

constexpr double kMinJitter = 1e-12;
constexpr double kMaxJitter = 1e-6;

}  // namespace

Eigen::MatrixXd rbf_kernel_matrix_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GPHyper& h) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = rbf(a.row(i).transpose(), b.row(j).transpose(), h);
  return k;
}

Eigen::MatrixXd rbf_kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GPHyper& h) {
  Eigen::MatrixXd k(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = rbf(a.row(i).transpose(), b.row(j).transpose(), h);
  return k;
}

GPModel gp_condition(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const GPHyper& hyper) {
  if (Z.rows() != y.size()) throw std::invalid_argument("gp: Z rows and y size differ");
  if (Z.rows() < 1) throw std::invalid_argument("gp: no training data");
  GPModel m;
  m.Z = Z;
  m.y = y;
  m.prior_mean = y.mean();
  m.hyper = hyper;
  const Eigen::MatrixXd k = rbf_kernel_matrix(Z, Z, hyper);
  const Eigen::Index n = Z.rows();
  for (double jitter = 0.0; jitter <= kMaxJitter * 1.0001; jitter = jitter == 0.0 ? kMinJitter : jitter * 10.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += hyper.noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd l = llt.matrixL();
    if (!(l.diagonal().array() > 0).all() || !l.allFinite()) continue;
    m.jitter = jitter;
    m.L = l;
    const Eigen::VectorXd centered = y.array() - m.prior_mean;
    m.alpha = llt.solve(centered);
    m.log_marginal_likelihood = -0.5 * centered.dot(m.alpha) - l.diagonal().array().log().sum() -
                                0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return m;
  }
  throw GPError("kernel matrix is not positive definite even with jitter 1e-6");
}

namespace {

using Theta = std::array<double, 3>;  // log lengthscale, log signal_var, log noise_var

GPHyper from_theta(const Theta& t, const GPHyper& init, bool fix_noise) {
  return {std::exp(t[0]), std::exp(t[1]), fix_noise ? init.noise_var : std::exp(t[2])};
}

// Log marginal likelihood and its gradient with respect to theta.
bool lml_and_grad(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const Eigen::MatrixXd& sqdist,
                  const GPHyper& h, bool fix_noise, double& lml, Theta& grad) {
  GPModel m;
  try {
    m = gp_condition(Z, y, h);
  } catch (const GPError&) {
    return false;
  }
  const Eigen::Index n = Z.rows();
  const Eigen::MatrixXd kinv = m.L.transpose().triangularView<Eigen::Upper>().solve(
      m.L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)));
  const Eigen::MatrixXd w = m.alpha * m.alpha.transpose() - kinv;
  const Eigen::MatrixXd kf = (-sqdist.array() / (2.0 * h.lengthscale * h.lengthscale)).exp() * h.signal_var;
  const Eigen::MatrixXd dk_dlen = kf.array() * sqdist.array() / (h.lengthscale * h.lengthscale);
  grad[0] = 0.5 * (w.array() * dk_dlen.array()).sum();
  grad[1] = 0.5 * (w.array() * kf.array()).sum();
  grad[2] = fix_noise ? 0.0 : 0.5 * w.trace() * h.noise_var;
  lml = m.log_marginal_likelihood;
  return std::isfinite(lml);
}

}  // namespace

GPModel gp_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const GPHyper& init, const GPFitOptions& opt) {
  if (Z.rows() < 2) throw std::invalid_argument("gp_fit needs at least 2 points");
  if (init.lengthscale <= 0 || init.signal_var <= 0 || init.noise_var < 0) {
    throw std::invalid_argument("gp_fit: invalid initial hyperparameters");
  }
  const Eigen::Index n = Z.rows();
  Eigen::MatrixXd sqdist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) sqdist(i, j) = (Z.row(i) - Z.row(j)).squaredNorm();

  const Theta lo{std::log(1e-3), std::log(1e-8), std::log(1e-8)};
  const Theta hi{std::log(1e3), std::log(1e4), std::log(1e2)};
  const bool fix_noise = opt.fix_noise || init.noise_var == 0.0;
  numerics::Rng rng(numerics::Rng::derive(opt.seed, 0x6770));

  double best_lml = -std::numeric_limits<double>::infinity();
  GPHyper best_hyper = init;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Theta t{std::log(init.lengthscale), std::log(init.signal_var),
            fix_noise ? 0.0 : std::log(std::max(init.noise_var, 1e-8))};
    if (r > 0) {
      for (int k = 0; k < 3; ++k) t[k] += rng.normal();
    }
    Theta m1{}, m2{};
    for (int it = 1; it <= opt.iterations; ++it) {
      for (int k = 0; k < 3; ++k) t[k] = std::clamp(t[k], lo[k], hi[k]);
      double lml;
      Theta g;
      const GPHyper h = from_theta(t, init, fix_noise);
      if (!lml_and_grad(Z, y, sqdist, h, fix_noise, lml, g)) break;
      if (lml > best_lml) {
        best_lml = lml;
        best_hyper = h;
      }
      for (int k = 0; k < 3; ++k) {
        m1[k] = 0.9 * m1[k] + 0.1 * g[k];
        m2[k] = 0.999 * m2[k] + 0.001 * g[k] * g[k];
        const double mh = m1[k] / (1.0 - std::pow(0.9, it));
        const double vh = m2[k] / (1.0 - std::pow(0.999, it));
        t[k] += opt.step * mh / (std::sqrt(vh) + 1e-8);
      }
    }
  }
  if (!std::isfinite(best_lml)) throw GPError("gp_fit: no start produced a positive definite kernel");
  return gp_condition(Z, y, best_hyper);
}

Prediction gp_predict(const GPModel& m, const Eigen::VectorXd& z) {
  Eigen::VectorXd k(m.Z.rows());
  for (Eigen::Index i = 0; i < m.Z.rows(); ++i) k[i] = rbf(m.Z.row(i).transpose(), z, m.hyper);
  Prediction p;
  p.mean = m.prior_mean + k.dot(m.alpha);
  const Eigen::VectorXd v = m.L.triangularView<Eigen::Lower>().solve(k);
  const double var = m.hyper.signal_var + m.hyper.noise_var - v.squaredNorm();
  p.variance = var < 1e-12 ? 0.0 : var;
  return p;
}

std::vector<Prediction> gp_predict_batch(const GPModel& m, const Eigen::MatrixXd& Zs) {
  std::vector<Prediction> out(static_cast<std::size_t>(Zs.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < Zs.rows(); ++i) out[static_cast<std::size_t>(i)] = gp_predict(m, Zs.row(i).transpose());
  return out;
}

double expected_improvement(double mean, double variance, double best) {
  const double diff = mean - best;
  if (!(variance > 0.0)) return std::max(diff, 0.0);
  const double sigma = std::sqrt(variance);
  const double u = diff / sigma;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, diff * cdf + sigma * pdf);
}

std::vector<double> expected_improvement_batch_serial(const std::vector<Prediction>& preds, double best) {
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = expected_improvement(preds[i].mean, preds[i].variance, best);
  return out;
}

std::vector<double> expected_improvement_batch(const std::vector<Prediction>& preds, double best) {
  std::vector<double> out(preds.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = expected_improvement(preds[i].mean, preds[i].variance, best);
  return out;
}

}  // namespace rxngen::bayesopt
