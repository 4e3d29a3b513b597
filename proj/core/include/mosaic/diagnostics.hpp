#pragma once

#include <Eigen/Core>

namespace mosaic {

/// Spectral density at frequency zero from an autoregressive fit
/// (Yule-Walker, order chosen by AIC).
double spectral_density_at_zero(const Eigen::VectorXd& x);

/// Geweke z-score comparing the means of the first `first` and last `last`
/// fractions of the chain. A constant chain scores 0.
double geweke(const Eigen::VectorXd& x, double first = 0.1, double last = 0.5);

/// Effective sample size from Geyer's initial positive (monotone) sequence
/// of paired autocorrelations. A constant chain has ESS equal to its length.
double effective_sample_size(const Eigen::VectorXd& x);

}  // namespace mosaic
