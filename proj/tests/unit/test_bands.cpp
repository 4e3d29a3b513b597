#include "doctest.h"
#include "fixtures.hpp"
#include "mosaic/bands.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/fit.hpp"

using namespace mosaic;

namespace {

Eigen::MatrixXd random_curves(Rng& rng, Eigen::Index m, Eigen::Index g, double shift) {
  Eigen::MatrixXd out(m, g);
  const Eigen::VectorXd base = Eigen::VectorXd::LinSpaced(g, -1.0, 1.0) * shift;
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::VectorXd z = standard_normal(rng, g + 1);
    for (Eigen::Index j = 0; j < g; ++j) out(r, j) = base(j) + 0.6 * z(j) + 0.8 * z(g);
  }
  return out;
}

}  // namespace

TEST_SUITE("bands") {

TEST_CASE("symmetric two-draw example") {
  Eigen::MatrixXd c(2, 3);
  c << 1.5, 1.5, 1.5, -1.5, -1.5, -1.5;
  const auto b = joint_credible_band(c, 0.05);
  CHECK(b.joint_multiplier == doctest::Approx(1.0));
  CHECK(b.lower_joint.isApproxToConstant(-1.5));
  CHECK(b.upper_joint.isApproxToConstant(1.5));
  const auto p = simbas(b);
  CHECK(p.global == 1.0);
}

TEST_CASE("order statistic rule") {
  CHECK(band_order_statistic(1000, 0.05) == 949);
  CHECK(band_order_statistic(100, 0.1) == 89);
  CHECK(band_order_statistic(2, 0.05) == 1);
  CHECK(band_order_statistic(20, 0.05) == 18);
}

TEST_CASE("band properties on random draws") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto curves = random_curves(rng, 200, 15, trial % 3 == 0 ? 0.0 : 0.4);
    const double alpha = 0.05;
    const auto b = joint_credible_band(curves, alpha);
    const auto p = simbas(b);
    CHECK(p.global == doctest::Approx(p.probability.minCoeff()));
    for (Eigen::Index j = 0; j < curves.cols(); ++j) {
      CHECK(b.lower_joint(j) <= b.lower_pointwise(j) + 1e-12);
      CHECK(b.upper_joint(j) >= b.upper_pointwise(j) - 1e-12);
      const bool excludes = b.lower_joint(j) > 0.0 || b.upper_joint(j) < 0.0;
      CHECK(excludes == (p.probability(j) <= alpha));
    }
  }
}

TEST_CASE("zero mean curve has probability one") {
  Eigen::MatrixXd c(4, 2);
  c << 1, 2, -1, -2, 2, 1, -2, -1;
  CHECK(simbas(c).global == 1.0);
}

TEST_CASE("invalid input and degenerate points") {
  CHECK_THROWS_AS(joint_credible_band(Eigen::MatrixXd::Ones(1, 3), 0.05), ConfigError);
  CHECK_THROWS_AS(joint_credible_band(Eigen::MatrixXd::Ones(5, 3), 0.0), ConfigError);
  CHECK_THROWS_AS(joint_credible_band(Eigen::MatrixXd::Ones(5, 3), 1.0), ConfigError);
  Eigen::MatrixXd c(3, 2);
  c << 1, 4, 1, 5, 1, 6;
  const auto b = joint_credible_band(c, 0.1);
  CHECK(b.degenerate[0]);
  CHECK_FALSE(b.degenerate[1]);
  CHECK(std::isfinite(b.joint_multiplier));
}

TEST_CASE("significant regions are maximal runs") {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 0, 5);
  Eigen::VectorXd p(6);
  p << 0.01, 0.02, 0.5, 0.05, 0.9, 0.0;
  const auto r = significant_regions(x, p, 0.05);
  REQUIRE(r.size() == 3);
  CHECK(r[0].lower == 0.0);
  CHECK(r[0].upper == 1.0);
  CHECK(r[1].lower == 3.0);
  CHECK(r[1].upper == 3.0);
  CHECK(r[2].lower == 5.0);
  CHECK(significant_regions(x, Eigen::VectorXd::Ones(6), 0.05).empty());
}

}
