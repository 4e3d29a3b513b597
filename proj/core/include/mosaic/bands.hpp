#pragma once

#include <vector>

#include <Eigen/Core>

namespace mosaic {

/// Pointwise and simultaneous credible bands of a curve sampled on a grid.
///
/// Both bands are centred at the pointwise mean and scaled by the pointwise
/// (population) standard deviation. The multipliers are order statistics of
/// the standardized deviations: the pointwise one per grid point, the joint
/// one of their per-draw maximum. Both use the same rule, order statistic
/// ceil((1 - alpha) M), so the joint band always contains the pointwise band
/// and excluding zero from the joint band is equivalent to P_SimBaS <= alpha.
struct CurveBands {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd lower_pointwise;
  Eigen::VectorXd upper_pointwise;
  Eigen::VectorXd lower_joint;
  Eigen::VectorXd upper_joint;
  /// Per-draw max over the grid of |g - mean| / sd.
  Eigen::VectorXd max_deviation;
  double joint_multiplier = 0.0;
  /// Grid points whose sd hit the floor 1e-12 (max|mean| + 1).
  std::vector<bool> degenerate;
};

/// Index (0-based) of the order statistic used as the (1 - alpha) quantile
/// of M draws: the smallest k with (M - k) / M <= alpha in floating point.
Eigen::Index band_order_statistic(Eigen::Index m, double alpha);

/// `curves` is M x grid. Throws ConfigError for M < 2 or alpha outside (0, 1).
CurveBands joint_credible_band(const Eigen::MatrixXd& curves, double alpha);

struct SimBaS {
  Eigen::VectorXd probability;  // per grid point
  double global = 1.0;          // min over the grid
};

/// P_SimBaS(x) = (1/M) sum_m 1(|mean(x) / sd(x)| <= max_deviation_m).
SimBaS simbas(const Eigen::MatrixXd& curves);
SimBaS simbas(const CurveBands& bands);

}  // namespace mosaic
