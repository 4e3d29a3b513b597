#include "mosaic/bands.hpp"

#include <algorithm>
#include <cmath>

#include "mosaic/errors.hpp"

namespace mosaic {

Eigen::Index band_order_statistic(Eigen::Index m, double alpha) {
  const double dm = static_cast<double>(m);
  auto tail_ok = [&](Eigen::Index k) { return static_cast<double>(m - k) / dm <= alpha; };
  auto k = static_cast<Eigen::Index>(std::ceil((1.0 - alpha) * dm));
  k = std::clamp<Eigen::Index>(k, 1, m);
  while (k < m && !tail_ok(k)) ++k;
  while (k > 1 && tail_ok(k - 1)) --k;
  return k - 1;
}

CurveBands joint_credible_band(const Eigen::MatrixXd& curves, double alpha) {
  const Eigen::Index m = curves.rows();
  const Eigen::Index g = curves.cols();
  if (m < 2) throw ConfigError("credible bands need at least two draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("band level alpha must lie in (0, 1)");

  CurveBands out;
  out.mean = curves.colwise().mean().transpose();
  const Eigen::MatrixXd centred = curves.rowwise() - out.mean.transpose();
  out.sd = (centred.array().square().colwise().sum() / static_cast<double>(m)).sqrt().transpose();
  const double floor = 1e-12 * (out.mean.cwiseAbs().maxCoeff() + 1.0);
  out.degenerate.assign(static_cast<std::size_t>(g), false);
  for (Eigen::Index j = 0; j < g; ++j) {
    if (out.sd(j) < floor) {
      out.sd(j) = floor;
      out.degenerate[static_cast<std::size_t>(j)] = true;
    }
  }

  const Eigen::MatrixXd z = (centred.array().rowwise() / out.sd.transpose().array()).abs();
  out.max_deviation = z.rowwise().maxCoeff();
  const Eigen::Index k = band_order_statistic(m, alpha);

  std::vector<double> buf(static_cast<std::size_t>(m));
  auto order_stat = [&](auto&& column) {
    for (Eigen::Index i = 0; i < m; ++i) buf[static_cast<std::size_t>(i)] = column(i);
    std::nth_element(buf.begin(), buf.begin() + k, buf.end());
    return buf[static_cast<std::size_t>(k)];
  };

  out.joint_multiplier = order_stat(out.max_deviation);
  out.lower_pointwise.resize(g);
  out.upper_pointwise.resize(g);
  for (Eigen::Index j = 0; j < g; ++j) {
    const double q = order_stat(z.col(j));
    out.lower_pointwise(j) = out.mean(j) - q * out.sd(j);
    out.upper_pointwise(j) = out.mean(j) + q * out.sd(j);
  }
  out.lower_joint = out.mean - out.joint_multiplier * out.sd;
  out.upper_joint = out.mean + out.joint_multiplier * out.sd;
  return out;
}

SimBaS simbas(const CurveBands& bands) {
  const Eigen::Index m = bands.max_deviation.size();
  SimBaS out;
  out.probability.resize(bands.mean.size());
  for (Eigen::Index j = 0; j < bands.mean.size(); ++j) {
    const double t = std::abs(bands.mean(j) / bands.sd(j));
    const auto count = (bands.max_deviation.array() >= t).count();
    out.probability(j) = static_cast<double>(count) / static_cast<double>(m);
  }
  out.global = out.probability.minCoeff();
  return out;
}

SimBaS simbas(const Eigen::MatrixXd& curves) {
  // alpha only affects the multipliers, which SimBaS does not use.
  return simbas(joint_credible_band(curves, 0.05));
}

}  // namespace mosaic
