#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mosaic/basis.hpp"
#include "mosaic/data.hpp"

namespace mosaic {

/// The four variance components of the marginal model.
struct VarianceState {
  double sigma2_z = 1.0;  // patient intercepts
  double sigma2_x = 1.0;  // spline coefficients
  double tau2 = 1.0;      // spatial effect
  double sigma2_y = 1.0;  // measurement error

  bool all_positive() const { return sigma2_z > 0 && sigma2_x > 0 && tau2 > 0 && sigma2_y > 0; }
};

/// Squared-exponential correlation, zero across patients.
double kernel_value(const Eigen::Vector2d& s, const Eigen::Vector2d& t, double phi, bool same_patient);

/// Patient-blocked correlation matrix C_phi.
class KernelMatrix {
 public:
  KernelMatrix() = default;
  KernelMatrix(double phi, std::vector<Eigen::MatrixXd> blocks);

  double phi() const { return phi_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const Eigen::MatrixXd& block(std::size_t patient) const { return blocks_[patient]; }
  std::size_t offset(std::size_t patient) const { return offsets_[patient]; }
  Eigen::Index size() const { return size_; }

  Eigen::MatrixXd dense() const;
  /// C * v without forming the dense matrix.
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;

 private:
  double phi_ = 0.0;
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<std::size_t> offsets_;
  Eigen::Index size_ = 0;
};

KernelMatrix assemble_kernel(const HmiDataset& data, double phi);

/// Cross-correlation between two location sets of the same patient.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixX2d& a, const Eigen::MatrixX2d& b, double phi);

/// Cholesky with escalating diagonal jitter: 1e-10 * mean(diag), times 10 up
/// to 1e-6 * mean(diag). Throws NumericalError reporting the smallest
/// eigenvalue when every attempt fails.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& a, const char* what = "matrix");

/// Dense Sigma_y with its Cholesky factor.
struct MarginalCovariance {
  Eigen::MatrixXd sigma;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

/// Dense assembly of
///   Sigma_y = sum_l B_l Cov(theta_l) B_l' + sigma2_z Z Z' + tau2 C_phi + sigma2_y I.
/// An empty kernel matrix drops the spatial term.
MarginalCovariance assemble_marginal_covariance(const VarianceState& state,
                                                const std::vector<SplineBasis>& bases,
                                                const PatientDesign& design, const KernelMatrix& kernel,
                                                const PriorOptions& options = {});

/// -1/2 [N log 2pi + log det Sigma + y' Sigma^{-1} y] through the cached factor.
double log_marginal_likelihood(const Eigen::VectorXd& y, const MarginalCovariance& sigma);

}  // namespace mosaic
