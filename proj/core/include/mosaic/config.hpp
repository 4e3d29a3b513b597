#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/data.hpp"
#include "mosaic/fit.hpp"
#include "mosaic/phi_selection.hpp"
#include "mosaic/simulation.hpp"

namespace mosaic {

/// Everything one CLI run needs, read from a single JSON document.
///
/// Keys (all optional):
///   data: {path, patient_id, sx, sy, covariates: [..], outcome}
///   bases: {default: {kind, knots, degree, placement}, <covariate>: {...}}
///   standardize, spatial, phi | phi_grid, alpha, grid_size, seed, output
///   priors: {sigma2_z: {shape, rate}, sigma2_x, tau2, sigma2_y}
///   penalty_role, linear_variance, null_variance_factor
///   chain: {total, burn_in, adapt, thin, initial_scale}
///   beta_joint, beta_thin, draws_beta_limit
///   phi_selection: {test_fraction, criterion, patient_effects, chain: {...}}
///   simulation: {scenario, replicates, oracle_phi, phi_grid, chain: {...}}
struct RunConfig {
  std::filesystem::path data_path;
  ColumnSchema schema;
  BasisSpec default_basis{BasisKind::spline};
  std::map<std::string, BasisSpec> covariate_bases;
  bool standardize = true;
  bool spatial = true;
  std::optional<double> phi;
  std::optional<std::string> phi_grid;
  double alpha = 0.05;
  long grid_size = 100;
  std::uint64_t seed = 1;
  std::filesystem::path output = "mosaic_out";
  PriorSpec priors;
  PriorOptions prior_options;
  ChainConfig chain;
  bool beta_joint = true;
  long beta_thin = 1;
  /// draws_beta.csv is written only when draws x (I + K + N) stays below this.
  long draws_beta_limit = 20'000'000;

  double test_fraction = 0.1;
  PhiCriterion criterion = PhiCriterion::rmse;
  bool patient_effects = false;
  ChainConfig phi_chain = PhiSelectionOptions::default_chain();

  int scenario = 2;
  long replicates = 10;
  bool oracle_phi = false;
  std::string simulation_phi_grid = "0.5:15:0.5";
  ChainConfig simulation_chain = BenchmarkOptions::desk_chain();

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_json() const;
  /// FNV-1a of the canonical JSON, excluding the output directory.
  std::string hash() const;
  void validate() const;

  std::vector<BasisSpec> basis_specs(const std::vector<std::string>& covariates) const;
  FitOptions fit_options(const std::vector<std::string>& covariates) const;
  PhiGrid phi_grid_spec() const;
  PhiSelectionOptions phi_selection_options() const;
  BenchmarkOptions benchmark_options() const;
};

}  // namespace mosaic
