#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/bands.hpp"
#include "mosaic/basis.hpp"
#include "mosaic/data.hpp"
#include "mosaic/model.hpp"
#include "mosaic/posterior.hpp"
#include "mosaic/sampler.hpp"

namespace mosaic {

struct FitOptions {
  /// One spec per covariate; empty means a default cubic spline for each.
  std::vector<BasisSpec> bases;
  bool standardize = true;
  double phi = 1.0;
  bool spatial = true;
  PriorSpec priors;
  PriorOptions prior_options;
  ChainConfig chain;
  double alpha = 0.05;
  BetaSampling beta_sampling = BetaSampling::joint;
  long beta_thin = 1;
  Eigen::Index grid_size = 100;
};

/// Model inputs derived from raw data: optional z-scoring, then bases.
struct PreparedModel {
  std::shared_ptr<const MosaicModel> model;
  std::optional<StandardizationRecord> standardization;
};

PreparedModel prepare_model(const HmiDataset& data, const FitOptions& options);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Maximal runs of consecutive grid points with probability <= alpha.
std::vector<Interval> significant_regions(const Eigen::VectorXd& x, const Eigen::VectorXd& probability,
                                          double alpha);

struct CurveSummary {
  std::string covariate;
  std::size_t basis_index = 0;
  Eigen::VectorXd grid;  // model scale
  Eigen::VectorXd x;     // original covariate scale
  CurveBands bands;
  SimBaS simbas;
  std::vector<Interval> significant;  // on the original scale
};

struct ParameterDiagnostics {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double geweke = 0.0;
  double ess = 0.0;
};

struct FitResult {
  PreparedModel prepared;
  VarianceDraws variances;
  PosteriorDraws posterior;
  std::vector<CurveSummary> curves;
  VarianceDecomposition pve;
  Waic waic;
  Dic dic;
  std::vector<ParameterDiagnostics> diagnostics;
  Eigen::VectorXd patient_intercepts;  // posterior mean of mu
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;

  const MosaicModel& model() const { return *prepared.model; }
  bool nonconvergence_warning() const;
};

/// Samples the variances, recovers beta and computes every summary.
FitResult fit_model(const HmiDataset& data, const FitOptions& options);

/// Curve summaries and fit criteria from existing draws.
std::vector<CurveSummary> summarize_curves(const PosteriorDraws& draws, const PreparedModel& prepared, double alpha,
                                           Eigen::Index grid_size);

}  // namespace mosaic
