#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "mosaic/basis.hpp"
#include "mosaic/data.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/rng.hpp"

namespace fixtures {

// Random patient/FOV data with the given per-patient sizes.
inline mosaic::HmiDataset random_dataset(mosaic::Rng& rng, const std::vector<std::size_t>& sizes,
                                         std::size_t covariates = 1) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> cov(-2.0, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<mosaic::FovObservation> rows;
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    for (std::size_t k = 0; k < sizes[p]; ++k) {
      mosaic::FovObservation o;
      o.patient_id = "p" + std::to_string(p);
      o.centroid << unit(rng), unit(rng);
      o.covariates.resize(static_cast<Eigen::Index>(covariates));
      for (auto& v : o.covariates) v = cov(rng);
      o.outcome = 3.0 * normal(rng) + (o.covariates.size() ? o.covariates(0) : 0.0);
      rows.push_back(o);
    }
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < covariates; ++c) names.push_back("x" + std::to_string(c));
  return mosaic::HmiDataset::from_observations(rows, names);
}

// Orthogonal projector onto span{1, (1, 2, ..., k)}.
inline Eigen::MatrixXd linear_trend_projector(Eigen::Index k) {
  Eigen::MatrixXd v(k, 2);
  for (Eigen::Index i = 0; i < k; ++i) {
    v(i, 0) = 1.0;
    v(i, 1) = static_cast<double>(i + 1);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, 2);
  return q * q.transpose();
}

// Prior covariance of a basis block, built directly from its definition:
// linear -> linear_variance I; spline -> sigma2_x (D'D + P_null / null_factor)^{-1}.
inline Eigen::MatrixXd prior_covariance(const mosaic::SplineBasis& b, double sigma2_x,
                                        const mosaic::PriorOptions& o = {}) {
  const Eigen::Index k = b.size();
  if (b.kind == mosaic::BasisKind::linear) return o.linear_variance * Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k - 2, k);
  for (Eigen::Index i = 0; i < k - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  const Eigen::MatrixXd dtd = d.transpose() * d;
  if (o.penalty_role == mosaic::PenaltyRole::covariance) return sigma2_x * dtd;
  const Eigen::MatrixXd prec = dtd + linear_trend_projector(k) / o.null_variance_factor;
  return sigma2_x * prec.fullPivLu().inverse();
}

// Dense Sigma_y from first principles.
inline Eigen::MatrixXd dense_sigma(const mosaic::HmiDataset& data, const std::vector<mosaic::SplineBasis>& bases,
                                   const mosaic::VarianceState& s, double phi, bool spatial,
                                   const mosaic::PriorOptions& o = {}) {
  const auto n = static_cast<Eigen::Index>(data.num_observations());
  Eigen::MatrixXd sigma = s.sigma2_y * Eigen::MatrixXd::Identity(n, n);
  for (const auto& b : bases) sigma += b.design * prior_covariance(b, s.sigma2_x, o) * b.design.transpose();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const bool same = data.patient_of(static_cast<std::size_t>(a)) == data.patient_of(static_cast<std::size_t>(c));
      if (!same) continue;
      sigma(a, c) += s.sigma2_z;
      if (spatial) {
        const double d2 = (data.centroids().row(a) - data.centroids().row(c)).squaredNorm();
        sigma(a, c) += s.tau2 * std::exp(-phi * d2);
      }
    }
  }
  return sigma;
}

// -1/2 [N log 2pi + log|S| + y' S^{-1} y] by explicit inverse, in long double.
inline double naive_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& sigma) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const MatL s = sigma.cast<long double>();
  const VecL yl = y.cast<long double>();
  const Eigen::FullPivLU<MatL> lu(s);
  const MatL inv = lu.inverse();
  long double logdet = 0.0L;
  const MatL& m = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) logdet += std::log(std::abs(m(i, i)));
  const long double quad = yl.dot(inv * yl);
  const long double n = static_cast<long double>(y.size());
  return static_cast<double>(-0.5L * (n * std::log(2.0L * 3.14159265358979323846264338327950288L) + logdet + quad));
}

}  // namespace fixtures
