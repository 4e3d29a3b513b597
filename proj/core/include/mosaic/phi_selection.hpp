#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/basis.hpp"
#include "mosaic/data.hpp"
#include "mosaic/sampler.hpp"

namespace mosaic {

enum class PhiCriterion { rmse, log_predictive_score };

struct PhiGrid {
  std::vector<double> values;
  double test_fraction = 0.1;
  PhiCriterion criterion = PhiCriterion::rmse;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses "start:stop:step" (stop inclusive up to rounding) or a single value.
std::vector<double> parse_grid(const std::string& text);

struct OlsFit {
  Eigen::VectorXd residuals;
  Eigen::VectorXd coefficients;
  std::vector<std::string> column_names;
};

/// Pooled least squares of y on [intercept, bases] and its residuals.
///
/// Spline bases sum to one, so their first column is dropped to keep the
/// design full rank. With `patient_effects` the intercept is replaced by one
/// indicator per patient. Rank deficiency throws DataError naming the
/// columns that could not be estimated.
OlsFit ols_residuals(const HmiDataset& data, const std::vector<SplineBasis>& bases,
                     bool patient_effects = false);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Holds out round(fraction N) rows uniformly at random while leaving every
/// patient at least one training row. Both index lists come back sorted.
TrainTestSplit stratified_split(const HmiDataset& data, double fraction, std::uint64_t seed);

struct PhiSelectionOptions {
  ChainConfig chain = default_chain();
  InverseGamma tau2_prior;
  InverseGamma sigma2_y_prior;
  bool patient_effects = false;

  static ChainConfig default_chain();
};

struct PhiSelectionReport {
  std::vector<double> phi;
  std::vector<double> score;
  std::vector<double> acceptance_rate;
  double best_phi = 0.0;
  std::size_t best_index = 0;
  PhiCriterion criterion = PhiCriterion::rmse;
  TrainTestSplit split;
};

/// Scores one decay value: samples (sigma2_y, tau2) for the training
/// residuals, averages the conditional mean at the test rows over draws and
/// compares it with the held-out residuals.
struct PhiScore {
  double score = 0.0;
  double acceptance_rate = 0.0;
  Eigen::VectorXd mean_prediction;
};

PhiScore score_phi(const HmiDataset& data, const Eigen::VectorXd& residuals, const TrainTestSplit& split,
                   double phi, PhiCriterion criterion, const PhiSelectionOptions& options,
                   const ChainConfig& chain);

/// Index of the smallest score; scores within 1e-9 of it go to the smaller phi.
std::size_t choose_phi(const std::vector<double>& phi, const std::vector<double>& score);

PhiSelectionReport select_phi(const HmiDataset& data, const std::vector<SplineBasis>& bases, const PhiGrid& grid,
                              const PhiSelectionOptions& options = {});

/// Conditional mean Sigma_test,train Sigma_train,train^{-1} r_train of a
/// zero-mean field with covariance sigma2_y I + tau2 C_phi. Test rows of a
/// patient without training rows get 0.
Eigen::VectorXd conditional_residual_mean(const HmiDataset& data, const Eigen::VectorXd& residuals,
                                          const TrainTestSplit& split, double phi, double tau2,
                                          double sigma2_y);

}  // namespace mosaic
