#include "mosaic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mosaic/errors.hpp"

namespace mosaic {

namespace {

double autocovariance(const Eigen::VectorXd& centred, Eigen::Index lag) {
  const Eigen::Index n = centred.size();
  return centred.head(n - lag).dot(centred.tail(n - lag)) / static_cast<double>(n);
}

}  // namespace

double spectral_density_at_zero(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw ConfigError("spectral density needs at least two values");
  const Eigen::VectorXd c = x.array() - x.mean();
  const double gamma0 = c.squaredNorm() / static_cast<double>(n);
  if (!(gamma0 > 0.0)) return 0.0;

  const auto max_order = std::min<Eigen::Index>(
      n - 1, static_cast<Eigen::Index>(std::floor(10.0 * std::log10(static_cast<double>(n)))));
  std::vector<double> r(static_cast<std::size_t>(max_order) + 1);
  for (Eigen::Index k = 0; k <= max_order; ++k) r[static_cast<std::size_t>(k)] = autocovariance(c, k) / gamma0;

  // Levinson-Durbin, keeping the coefficients of the AIC-best order.
  std::vector<double> phi, best_phi;
  double innovation = 1.0;
  double best_aic = static_cast<double>(n) * std::log(gamma0);
  double best_innovation = 1.0;
  for (Eigen::Index p = 1; p <= max_order; ++p) {
    double num = r[static_cast<std::size_t>(p)];
    for (Eigen::Index j = 1; j < p; ++j) num -= phi[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(p - j)];
    const double kappa = num / innovation;
    if (!(std::abs(kappa) < 1.0)) break;
    std::vector<double> next(static_cast<std::size_t>(p));
    for (Eigen::Index j = 1; j < p; ++j) {
      next[static_cast<std::size_t>(j - 1)] =
          phi[static_cast<std::size_t>(j - 1)] - kappa * phi[static_cast<std::size_t>(p - j - 1)];
    }
    next[static_cast<std::size_t>(p - 1)] = kappa;
    phi = std::move(next);
    innovation *= 1.0 - kappa * kappa;
    const double aic = static_cast<double>(n) * std::log(gamma0 * innovation) + 2.0 * static_cast<double>(p);
    if (aic < best_aic) {
      best_aic = aic;
      best_phi = phi;
      best_innovation = innovation;
    }
  }
  const double order = static_cast<double>(best_phi.size());
  const double var_pred = gamma0 * best_innovation * static_cast<double>(n) / (static_cast<double>(n) - (order + 1.0));
  double denom = 1.0;
  for (double a : best_phi) denom -= a;
  return var_pred / (denom * denom);
}

double geweke(const Eigen::VectorXd& x, double first, double last) {
  if (!(first > 0.0 && last > 0.0 && first + last <= 1.0)) throw ConfigError("invalid Geweke fractions");
  const Eigen::Index n = x.size();
  const auto n1 = static_cast<Eigen::Index>(std::floor(first * static_cast<double>(n)));
  const auto n2 = static_cast<Eigen::Index>(std::floor(last * static_cast<double>(n)));
  if (n1 < 2 || n2 < 2) throw ConfigError("Geweke diagnostic needs a longer chain");
  const Eigen::VectorXd a = x.head(n1);
  const Eigen::VectorXd b = x.tail(n2);
  const double var = spectral_density_at_zero(a) / static_cast<double>(n1) +
                     spectral_density_at_zero(b) / static_cast<double>(n2);
  if (!(var > 0.0)) return 0.0;
  return (a.mean() - b.mean()) / std::sqrt(var);
}

double effective_sample_size(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) return static_cast<double>(n);
  const Eigen::VectorXd c = x.array() - x.mean();
  const double gamma0 = autocovariance(c, 0);
  if (!(gamma0 > 1e-300)) return static_cast<double>(n);

  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = (autocovariance(c, 2 * m) + autocovariance(c, 2 * m + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

}  // namespace mosaic
