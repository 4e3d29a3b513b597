#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/data.hpp"
#include "mosaic/model.hpp"
#include "mosaic/posterior.hpp"

namespace mosaic {

/// Rows at which to predict. Covariates are on the scale the model was fitted on.
struct PredictionRequest {
  Eigen::MatrixXd covariates;  // n x p
  Eigen::MatrixX2d centroids;  // n x 2
  std::vector<std::string> patient_ids;

  static PredictionRequest from_dataset(const HmiDataset& data);
  Eigen::Index size() const { return covariates.rows(); }
  /// Training patient index per row, or model.num_patients() for a new patient.
  std::vector<std::size_t> training_patient(const MosaicModel& model) const;
  void validate(const MosaicModel& model) const;
};

/// Posterior predictive draws, M x n.
///
/// For draw m: basis mean from theta^(m), the patient intercept mu^(m) of a
/// known patient or a fresh N(0, sigma2_z^(m)) draw (shared within a new
/// patient), the spatial effect from the patient's Gaussian-process
/// conditional on the training psi^(m) (unconditional for a new patient) and
/// N(0, sigma2_y^(m)) noise. Draw m uses the substream
/// (seed, "prediction", "draw", m).
Eigen::MatrixXd predict(const PosteriorDraws& draws, const MosaicModel& model, const PredictionRequest& request,
                        std::uint64_t seed);

/// Mean over draws and test rows of (y - y*)^2.
double mspe(const Eigen::VectorXd& y_test, const Eigen::MatrixXd& predictive);

/// Linearly interpolated empirical quantile (sample quantile type 7).
double empirical_quantile(std::vector<double> values, double p);

struct PredictiveSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Per-column mean and (alpha/2, 1 - alpha/2) quantiles. Needs M >= 2.
PredictiveSummary summarize_predictions(const Eigen::MatrixXd& predictive, double alpha);

/// Fraction of test rows inside their central 1 - alpha predictive interval.
double predictive_coverage(const Eigen::VectorXd& y_test, const Eigen::MatrixXd& predictive, double alpha);

}  // namespace mosaic
