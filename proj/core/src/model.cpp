#include "mosaic/model.hpp"

#include <cmath>
#include <numbers>

#include "mosaic/errors.hpp"

namespace mosaic {

MosaicModel::MosaicModel(HmiDataset data, std::vector<SplineBasis> bases, double phi, ModelOptions options)
    : data_(std::move(data)), bases_(std::move(bases)), options_(options), phi_(phi) {
  design_ = build_patient_design(data_);
  const Eigen::Index n = num_observations();

  Eigen::Index k_total = 0;
  for (const auto& b : bases_) {
    if (b.design.rows() != n) throw ConfigError("basis rows do not match the dataset");
    coefficient_offsets_.push_back(k_total);
    k_total += b.size();
    priors_.push_back(coefficient_prior(b, options_.prior));
  }
  basis_matrix_.resize(n, k_total);
  for (std::size_t l = 0; l < bases_.size(); ++l) {
    basis_matrix_.middleCols(coefficient_offsets_[l], bases_[l].size()) = bases_[l].design;
  }

  Eigen::Index r = design_.z.cols();
  for (const auto& p : priors_) r += p.factor.cols();
  low_rank_.resize(n, r);
  low_rank_.leftCols(design_.z.cols()) = design_.z;
  column_kind_.assign(static_cast<std::size_t>(design_.z.cols()), 0);
  Eigen::Index col = design_.z.cols();
  for (std::size_t l = 0; l < bases_.size(); ++l) {
    const Eigen::Index w = priors_[l].factor.cols();
    low_rank_.middleCols(col, w) = bases_[l].design * priors_[l].factor;
    column_kind_.insert(column_kind_.end(), static_cast<std::size_t>(w), priors_[l].scaled_by_sigma_x ? 2 : 1);
    col += w;
  }

  if (options_.spatial) {
    kernel_ = assemble_kernel(data_, phi_);
    spectra_ = SpectralBlocks(kernel_);
  } else {
    spectra_ = SpectralBlocks(data_.patient_sizes());
  }
  rotated_low_rank_ = spectra_.rotate(low_rank_);
  rotated_y_ = spectra_.rotate(data_.outcomes());
}

bool MosaicModel::has_spline() const {
  for (const auto& b : bases_) {
    if (b.kind == BasisKind::spline) return true;
  }
  return false;
}

Eigen::VectorXd MosaicModel::column_scale(const VarianceState& state) const {
  Eigen::VectorXd scale(static_cast<Eigen::Index>(column_kind_.size()));
  const double sz = std::sqrt(state.sigma2_z);
  const double sx = std::sqrt(state.sigma2_x);
  for (std::size_t c = 0; c < column_kind_.size(); ++c) {
    scale(static_cast<Eigen::Index>(c)) = column_kind_[c] == 0 ? sz : (column_kind_[c] == 1 ? 1.0 : sx);
  }
  return scale;
}

LowRankFactor MosaicModel::factorize(const VarianceState& state) const {
  const double tau2 = options_.spatial ? state.tau2 : 0.0;
  return LowRankFactor(spectra_, rotated_low_rank_, column_scale(state), tau2, state.sigma2_y);
}

double MosaicModel::log_likelihood(const VarianceState& state) const {
  const LowRankFactor factor = factorize(state);
  const double n = static_cast<double>(num_observations());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + factor.log_det() +
                 factor.quadratic_form_rotated(rotated_y_));
}

MarginalCovariance MosaicModel::dense_covariance(const VarianceState& state) const {
  VarianceState s = state;
  if (!options_.spatial) s.tau2 = 1.0;
  return assemble_marginal_covariance(s, bases_, design_, options_.spatial ? kernel_ : KernelMatrix{},
                                      options_.prior);
}

Eigen::MatrixXd MosaicModel::coefficient_covariance(double sigma2_x) const {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(num_coefficients(), num_coefficients());
  for (std::size_t l = 0; l < bases_.size(); ++l) {
    const Eigen::Index o = coefficient_offsets_[l];
    cov.block(o, o, bases_[l].size(), bases_[l].size()) = priors_[l].covariance(sigma2_x);
  }
  return cov;
}

}  // namespace mosaic
