#include "mosaic/structured.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mosaic/errors.hpp"

namespace mosaic {

SpectralBlocks::SpectralBlocks(const KernelMatrix& kernel) {
  values_.resize(kernel.size());
  for (std::size_t i = 0; i < kernel.num_blocks(); ++i) {
    const auto o = static_cast<Eigen::Index>(kernel.offset(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel.block(i));
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of a kernel block failed");
    values_.segment(o, kernel.block(i).rows()) = eig.eigenvalues().cwiseMax(0.0);
    vectors_.push_back(eig.eigenvectors());
    offsets_.push_back(o);
  }
}

SpectralBlocks::SpectralBlocks(std::span<const std::size_t> sizes) : identity_(true) {
  Eigen::Index n = 0;
  for (std::size_t s : sizes) n += static_cast<Eigen::Index>(s);
  values_ = Eigen::VectorXd::Zero(n);
}

Eigen::MatrixXd SpectralBlocks::rotate(const Eigen::MatrixXd& x) const {
  if (identity_) return x;
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const auto n = vectors_[i].rows();
    out.middleRows(offsets_[i], n).noalias() = vectors_[i].transpose() * x.middleRows(offsets_[i], n);
  }
  return out;
}

Eigen::MatrixXd SpectralBlocks::unrotate(const Eigen::MatrixXd& x) const {
  if (identity_) return x;
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const auto n = vectors_[i].rows();
    out.middleRows(offsets_[i], n).noalias() = vectors_[i] * x.middleRows(offsets_[i], n);
  }
  return out;
}

Eigen::VectorXd SpectralBlocks::sqrt_multiply(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd scaled = values_.cwiseSqrt().cwiseProduct(z);
  return unrotate(scaled);
}

LowRankFactor::LowRankFactor(const SpectralBlocks& blocks, const Eigen::MatrixXd& rotated_u,
                             const Eigen::VectorXd& scale, double tau2, double sigma2_y)
    : blocks_(&blocks), rotated_u_(&rotated_u), scale_(scale) {
  const Eigen::VectorXd diag = (tau2 * blocks.eigenvalues()).array() + sigma2_y;
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
    throw NumericalError("block-diagonal covariance part is not positive definite");
  }
  inv_diag_ = diag.cwiseInverse();
  log_det_ = diag.array().log().sum();

  const Eigen::Index r = rotated_u.cols();
  if (r > 0) {
    const Eigen::MatrixXd weighted = inv_diag_.cwiseSqrt().asDiagonal() * rotated_u;
    Eigen::MatrixXd inner(r, r);
    inner.setZero();
    inner.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    inner = inner.selfadjointView<Eigen::Lower>();
    inner = scale_.asDiagonal() * inner * scale_.asDiagonal();
    inner.diagonal().array() += 1.0;
    inner_.compute(inner);
    if (inner_.info() != Eigen::Success) throw NumericalError("Woodbury inner matrix is not positive definite");
    log_det_ += 2.0 * inner_.matrixLLT().diagonal().array().log().sum();
  }
  if (!std::isfinite(log_det_)) throw NumericalError("non-finite log determinant");
}

double LowRankFactor::quadratic_form_rotated(const Eigen::VectorXd& rotated_y) const {
  const Eigen::VectorXd dy = inv_diag_.cwiseProduct(rotated_y);
  double q = rotated_y.dot(dy);
  if (rotated_u_->cols() > 0) {
    const Eigen::VectorXd v = scale_.cwiseProduct(rotated_u_->transpose() * dy);
    q -= v.dot(inner_.solve(v));
  }
  return q;
}

Eigen::MatrixXd LowRankFactor::solve_rotated(const Eigen::MatrixXd& rotated_rhs) const {
  Eigen::MatrixXd x = inv_diag_.asDiagonal() * rotated_rhs;
  if (rotated_u_->cols() > 0) {
    const Eigen::MatrixXd v = scale_.asDiagonal() * (rotated_u_->transpose() * x);
    const Eigen::MatrixXd w = scale_.asDiagonal() * inner_.solve(v);
    x.noalias() -= inv_diag_.asDiagonal() * (*rotated_u_ * w);
  }
  return x;
}

Eigen::MatrixXd LowRankFactor::solve(const Eigen::MatrixXd& rhs) const {
  return blocks_->unrotate(solve_rotated(blocks_->rotate(rhs)));
}

}  // namespace mosaic
