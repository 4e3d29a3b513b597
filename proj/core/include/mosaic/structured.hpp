#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mosaic/kernel.hpp"

namespace mosaic {

/// Per-patient eigendecompositions C_i = Q_i diag(lambda_i) Q_i'.
///
/// Rotating into the eigenbasis turns tau2 C + sigma2_y I into a diagonal,
/// so every likelihood evaluation at fixed phi avoids refactorizing the
/// spatial blocks. Negative rounding-level eigenvalues are clamped to 0.
class SpectralBlocks {
 public:
  SpectralBlocks() = default;
  explicit SpectralBlocks(const KernelMatrix& kernel);
  /// Identity blocks with zero eigenvalues (no spatial term).
  explicit SpectralBlocks(std::span<const std::size_t> sizes);

  Eigen::Index size() const { return values_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return values_; }

  /// Q' x (block-wise, applied to every column).
  Eigen::MatrixXd rotate(const Eigen::MatrixXd& x) const;
  /// Q x.
  Eigen::MatrixXd unrotate(const Eigen::MatrixXd& x) const;
  /// Q diag(sqrt(lambda)) z, a draw from N(0, C) when z is standard normal.
  Eigen::VectorXd sqrt_multiply(const Eigen::VectorXd& z) const;

 private:
  std::vector<Eigen::MatrixXd> vectors_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd values_;
  bool identity_ = false;
};

/// Factorization of Sigma = blockdiag(tau2 C_i + sigma2_y I) + W W' with
/// W = U diag(scale), computed through the matrix determinant lemma and the
/// Woodbury identity in the rotated coordinates of SpectralBlocks.
class LowRankFactor {
 public:
  /// `rotated_u` is Q'U. Throws NumericalError when the diagonal part is not
  /// positive.
  LowRankFactor(const SpectralBlocks& blocks, const Eigen::MatrixXd& rotated_u,
                const Eigen::VectorXd& scale, double tau2, double sigma2_y);

  double log_det() const { return log_det_; }
  /// y' Sigma^{-1} y given the rotated vector Q'y.
  double quadratic_form_rotated(const Eigen::VectorXd& rotated_y) const;
  /// Sigma^{-1} rhs for rhs given in original coordinates.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  Eigen::MatrixXd solve_rotated(const Eigen::MatrixXd& rotated_rhs) const;

  const SpectralBlocks* blocks_;
  const Eigen::MatrixXd* rotated_u_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd inv_diag_;
  Eigen::LLT<Eigen::MatrixXd> inner_;
  double log_det_ = 0.0;
};

}  // namespace mosaic
