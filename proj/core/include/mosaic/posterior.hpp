#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/model.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/sampler.hpp"

namespace mosaic {

/// How (mu, theta, psi) are drawn given the variances.
///
/// `joint`: one draw from the exact joint Gaussian posterior.
/// `block_independent`: each block from its exact marginal posterior, the
/// three blocks independent of one another (block-diagonal covariance).
enum class BetaSampling { joint, block_independent };

struct BetaDraw {
  Eigen::VectorXd mu;     // patient intercepts (I)
  Eigen::VectorXd theta;  // stacked basis coefficients (sum K_l)
  Eigen::VectorXd psi;    // spatial effect at each observation (N)

  /// B theta + Z mu + psi.
  Eigen::VectorXd fitted(const MosaicModel& model) const;
};

/// One draw of beta given the variances, without re-centering.
///
/// Uses Matheron's rule: a prior draw of (beta, y) is corrected by
/// Cov(beta, y) Sigma_y^{-1} (y - y_prior), which is an exact draw from the
/// Gaussian conditional and needs a single structured solve.
BetaDraw recover_beta(const VarianceState& state, const MosaicModel& model, Rng& rng,
                      BetaSampling mode = BetaSampling::joint);

/// Exact conditional mean E[beta | y, variances] (no re-centering).
BetaDraw beta_posterior_mean(const VarianceState& state, const MosaicModel& model);

/// Moves each patient's mean of psi into mu. Fitted values are unchanged up
/// to rounding and every patient's psi averages to zero afterwards.
void recenter(BetaDraw& beta, const MosaicModel& model);

/// Index-aligned variance and beta draws.
struct PosteriorDraws {
  Eigen::MatrixXd variances;  // M x 4, columns ordered as Component
  Eigen::MatrixXd mu;         // M x I
  Eigen::MatrixXd theta;      // M x sum K_l
  Eigen::MatrixXd psi;        // M x N
  std::uint64_t seed = 0;
  std::string config_hash;

  Eigen::Index size() const { return variances.rows(); }
  VarianceState state(Eigen::Index m) const;
  BetaDraw beta(Eigen::Index m) const;
  /// M x N fitted values.
  Eigen::MatrixXd fitted(const MosaicModel& model) const;
};

/// Recovers (and re-centers) beta for every `thin`-th variance draw. Draw m
/// uses the substream (seed, "posterior", "beta", m).
PosteriorDraws recover_posterior(const Eigen::MatrixXd& variances, const MosaicModel& model,
                                 std::uint64_t seed, BetaSampling mode = BetaSampling::joint,
                                 long thin = 1);

/// Equally spaced grid over the training range of basis `basis_index`.
Eigen::VectorXd curve_grid(const SplineBasis& basis, Eigen::Index grid_size = 100);

/// Per-draw global curves g^(m)(x) = basis_row(x) theta_l^(m), M x grid.
/// Throws ConfigError if any grid point lies outside the training range.
Eigen::MatrixXd evaluate_global_curve(const PosteriorDraws& draws, const MosaicModel& model,
                                      std::size_t basis_index, const Eigen::VectorXd& grid);

struct VarianceDecomposition {
  double covariates = 0.0;
  double patients = 0.0;
  double spatial = 0.0;
  double noise = 0.0;
};

/// Percent of trace(Sigma_Y) from B theta, Z mu, psi and sigma2_y I, with the
/// first three traces taken from the empirical variance over draws.
VarianceDecomposition pve(const PosteriorDraws& draws, const MosaicModel& model);

/// M x N matrix of log N(y_n; fitted_mn, sigma2_y^(m)).
Eigen::MatrixXd pointwise_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& fitted,
                                         const Eigen::VectorXd& sigma2_y);

struct Waic {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

/// -2 (lppd - p_waic) on the deviance scale.
Waic waic(const Eigen::MatrixXd& log_lik);

struct Dic {
  double dic = 0.0;
  double mean_deviance = 0.0;
  double deviance_at_mean = 0.0;
  double p_d = 0.0;
};

/// D-bar + p_D, with the plug-in deviance at the posterior-mean fitted values
/// and posterior-mean sigma2_y. Negative p_D is reported as is.
Dic dic(const Eigen::VectorXd& y, const Eigen::MatrixXd& fitted, const Eigen::VectorXd& sigma2_y);

}  // namespace mosaic
