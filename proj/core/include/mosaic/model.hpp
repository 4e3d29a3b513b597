#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "mosaic/basis.hpp"
#include "mosaic/data.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/structured.hpp"

namespace mosaic {

struct ModelOptions {
  /// false gives the non-spatial ablation: no tau2 C_phi term and psi = 0.
  bool spatial = true;
  PriorOptions prior;
};

/// Everything the marginal model needs at a fixed spatial decay: training
/// data, bases, patient design, kernel and the cached rotations used by the
/// likelihood. Immutable after construction.
class MosaicModel {
 public:
  MosaicModel(HmiDataset data, std::vector<SplineBasis> bases, double phi, ModelOptions options = {});

  const HmiDataset& data() const { return data_; }
  const std::vector<SplineBasis>& bases() const { return bases_; }
  const std::vector<CoefficientPrior>& priors() const { return priors_; }
  const PatientDesign& design() const { return design_; }
  const KernelMatrix& kernel() const { return kernel_; }
  const SpectralBlocks& spectra() const { return spectra_; }
  const ModelOptions& options() const { return options_; }
  double phi() const { return phi_; }
  bool spatial() const { return options_.spatial; }
  bool has_spline() const;

  Eigen::Index num_observations() const { return data_.outcomes().size(); }
  Eigen::Index num_patients() const { return design_.z.cols(); }
  Eigen::Index num_coefficients() const { return basis_matrix_.cols(); }
  /// Start of basis l's coefficients within the stacked theta.
  Eigen::Index coefficient_offset(std::size_t l) const { return coefficient_offsets_[l]; }

  /// [B_1 ... B_p], N x sum K_l.
  const Eigen::MatrixXd& basis_matrix() const { return basis_matrix_; }

  /// Structured factorization of Sigma_y at `state`.
  LowRankFactor factorize(const VarianceState& state) const;
  double log_likelihood(const VarianceState& state) const;

  /// Dense Sigma_y (reference path).
  MarginalCovariance dense_covariance(const VarianceState& state) const;

  /// Prior covariance of the stacked theta.
  Eigen::MatrixXd coefficient_covariance(double sigma2_x) const;

 private:
  Eigen::VectorXd column_scale(const VarianceState& state) const;

  HmiDataset data_;
  std::vector<SplineBasis> bases_;
  std::vector<CoefficientPrior> priors_;
  PatientDesign design_;
  KernelMatrix kernel_;
  SpectralBlocks spectra_;
  ModelOptions options_;
  double phi_ = 0.0;

  Eigen::MatrixXd basis_matrix_;
  std::vector<Eigen::Index> coefficient_offsets_;
  // Low-rank columns [Z, B_1 F_1, ..., B_p F_p] and their owner (0: Z, 1: fixed, 2: sigma_x).
  Eigen::MatrixXd low_rank_;
  std::vector<int> column_kind_;
  Eigen::MatrixXd rotated_low_rank_;
  Eigen::VectorXd rotated_y_;
};

}  // namespace mosaic
