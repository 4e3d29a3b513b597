#include "mosaic/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

double kernel_value(const Eigen::Vector2d& s, const Eigen::Vector2d& t, double phi, bool same_patient) {
  if (!(phi >= 0.0)) throw ConfigError("spatial decay must be non-negative, got " + csv::format(phi));
  if (!same_patient) return 0.0;
  return std::exp(-phi * (s - t).squaredNorm());
}

KernelMatrix::KernelMatrix(double phi, std::vector<Eigen::MatrixXd> blocks)
    : phi_(phi), blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    offsets_.push_back(static_cast<std::size_t>(size_));
    size_ += b.rows();
  }
}

Eigen::MatrixXd KernelMatrix::dense() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(size_, size_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto o = static_cast<Eigen::Index>(offsets_[i]);
    c.block(o, o, blocks_[i].rows(), blocks_[i].cols()) = blocks_[i];
  }
  return c;
}

Eigen::VectorXd KernelMatrix::multiply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto o = static_cast<Eigen::Index>(offsets_[i]);
    const auto n = blocks_[i].rows();
    out.segment(o, n) = blocks_[i] * v.segment(o, n);
  }
  return out;
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixX2d& a, const Eigen::MatrixX2d& b, double phi) {
  if (!(phi >= 0.0)) throw ConfigError("spatial decay must be non-negative, got " + csv::format(phi));
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      c(i, j) = std::exp(-phi * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return c;
}

KernelMatrix assemble_kernel(const HmiDataset& data, double phi) {
  if (!(phi >= 0.0)) throw ConfigError("spatial decay must be non-negative, got " + csv::format(phi));
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(data.num_patients());
  for (std::size_t i = 0; i < data.num_patients(); ++i) {
    const auto o = static_cast<Eigen::Index>(data.offset(i));
    const auto n = static_cast<Eigen::Index>(data.size(i));
    const Eigen::MatrixX2d s = data.centroids().middleRows(o, n);
    Eigen::MatrixXd c = cross_kernel(s, s, phi);
    c.diagonal().setOnes();
    blocks.push_back(std::move(c));
  }
  return KernelMatrix(phi, std::move(blocks));
}

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& a, const char* what) {
  JitteredCholesky out;
  out.llt.compute(a);
  if (out.llt.info() == Eigen::Success) return out;

  const double mean_diag = a.diagonal().mean();
  const double base = mean_diag > 0.0 ? mean_diag : 1.0;
  for (double factor = 1e-10; factor <= 1e-6 * (1.0 + 1e-9); factor *= 10.0) {
    Eigen::MatrixXd b = a;
    b.diagonal().array() += factor * base;
    out.llt.compute(b);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = factor * base;
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  throw NumericalError(std::string("Cholesky of ") + what + " failed after jitter escalation; "
                       "smallest eigenvalue " + csv::format(eig.eigenvalues().minCoeff()));
}

MarginalCovariance assemble_marginal_covariance(const VarianceState& state,
                                                const std::vector<SplineBasis>& bases,
                                                const PatientDesign& design, const KernelMatrix& kernel,
                                                const PriorOptions& options) {
  const bool spatial = kernel.size() > 0;
  if (!(state.sigma2_z > 0 && state.sigma2_y > 0 && state.sigma2_x > 0 && (!spatial || state.tau2 > 0))) {
    throw ConfigError("marginal covariance needs strictly positive variances");
  }
  const Eigen::Index n = design.z.rows();
  MarginalCovariance out;
  out.sigma = state.sigma2_z * design.z * design.z.transpose();
  for (const auto& basis : bases) {
    const CoefficientPrior prior = coefficient_prior(basis, options);
    const Eigen::MatrixXd bl = basis.design * prior.factor;
    const double scale = prior.scaled_by_sigma_x ? state.sigma2_x : 1.0;
    out.sigma.noalias() += scale * bl * bl.transpose();
  }
  if (spatial) {
    if (kernel.size() != n) throw ConfigError("kernel and design sizes differ");
    out.sigma += state.tau2 * kernel.dense();
  }
  out.sigma.diagonal().array() += state.sigma2_y;

  auto chol = jittered_cholesky(out.sigma, "Sigma_y");
  out.llt = std::move(chol.llt);
  out.jitter = chol.jitter;
  return out;
}

double log_marginal_likelihood(const Eigen::VectorXd& y, const MarginalCovariance& sigma) {
  if (y.size() != sigma.sigma.rows()) {
    throw ConfigError("outcome length " + std::to_string(y.size()) + " does not match Sigma_y of size " +
                      std::to_string(sigma.sigma.rows()));
  }
  const Eigen::MatrixXd& l = sigma.llt.matrixLLT();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Eigen::VectorXd w = sigma.llt.matrixL().solve(y);
  const double n = static_cast<double>(y.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + w.squaredNorm());
}

}  // namespace mosaic
