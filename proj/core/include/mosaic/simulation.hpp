#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/data.hpp"
#include "mosaic/fit.hpp"
#include "mosaic/phi_selection.hpp"

namespace mosaic {

/// Generative settings of one synthetic scenario.
struct ScenarioSpec {
  int scenario = 1;
  std::size_t patients = 20;
  std::size_t observations = 300;
  std::size_t test_size = 30;
  double sigma2_y = 50.0;
  double intercept_mean = 50.0;
  double intercept_variance = 100.0;
  double tau2 = 50.0;
  double phi = 10.0;
  double theta = 5.0;
  bool nonlinear = false;  // arctan(x) theta instead of x theta
  double x_lower = -3.0;
  double x_upper = 3.0;
  double dirichlet_alpha = 2.0;
  std::size_t min_per_patient = 5;
  std::uint64_t seed = 1;

  /// Defaults of scenario 1 (weak spatial signal), 2 (strong) or 3 (nonlinear, intermediate).
  static ScenarioSpec for_scenario(int scenario, std::uint64_t seed = 1);
  double curve(double x) const;
  void validate() const;
};

struct SyntheticDataset {
  ScenarioSpec spec;
  HmiDataset data;        // every row, grouped by patient
  Eigen::VectorXd mu;     // per patient
  Eigen::VectorXd g;      // per row
  Eigen::VectorXd psi;    // per row
  Eigen::VectorXd noise;  // per row
  TrainTestSplit split;

  HmiDataset train() const { return data.subset(split.train); }
  HmiDataset test() const { return data.subset(split.test); }
  /// mu[patient] + g + psi + noise, summed in that order.
  Eigen::VectorXd reconstruct() const;
};

/// Draws one synthetic dataset. Patient sizes follow a Dirichlet-multinomial
/// allocation redrawn until every patient has `min_per_patient` rows. The
/// held-out rows leave every patient a training row and never include the
/// rows holding the smallest or largest covariate value, so the fitted
/// covariate range covers the test rows.
SyntheticDataset generate(const ScenarioSpec& spec);

/// Mean over the grid of (mean curve - truth)^2, `curves` being M x grid.
double mse_of_curve(const Eigen::MatrixXd& curves, const Eigen::VectorXd& truth);

struct BenchmarkOptions {
  ChainConfig chain = desk_chain();
  bool oracle_phi = false;
  std::vector<double> phi_grid = parse_grid("0.5:15:0.5");
  PhiSelectionOptions phi_selection;
  BasisSpec basis{BasisKind::spline};
  double alpha = 0.05;
  BetaSampling beta_sampling = BetaSampling::joint;
  Eigen::Index grid_size = 100;

  static ChainConfig desk_chain();
};

struct BenchmarkRow {
  std::string model;  // "MoSAIC" or "NonSpatial"
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double phi = 0.0;
  double waic = 0.0;
  double mse = 0.0;
  double mspe = 0.0;
  double coverage = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string message;
};

/// Fits the spatial model and the non-spatial ablation to `replicates`
/// datasets. Replicate r uses the seed (master, "simulation", "replicate", r).
/// A failing replicate yields rows flagged `failed` instead of an exception.
std::vector<BenchmarkRow> run_benchmark(const ScenarioSpec& spec, std::size_t replicates,
                                        const BenchmarkOptions& options, std::uint64_t master_seed);

/// Both rows of one replicate.
std::vector<BenchmarkRow> run_replicate(const ScenarioSpec& spec, std::size_t replicate,
                                        const BenchmarkOptions& options);

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace mosaic
