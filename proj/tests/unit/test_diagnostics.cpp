#include <cmath>

#include "doctest.h"
#include "mosaic/diagnostics.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/rng.hpp"

using namespace mosaic;

namespace {

Eigen::VectorXd ar1(Rng& rng, Eigen::Index n, double rho) {
  Eigen::VectorXd x(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  x(0) = normal(rng) / std::sqrt(1 - rho * rho);
  for (Eigen::Index i = 1; i < n; ++i) x(i) = rho * x(i - 1) + normal(rng);
  return x;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("Geweke scores of iid chains are mostly small") {
  Rng rng(1);
  int small = 0;
  for (int t = 0; t < 100; ++t) {
    if (std::abs(geweke(standard_normal(rng, 2000))) < 1.96) ++small;
  }
  CHECK(small >= 90);
}

TEST_CASE("Geweke detects a drifting chain") {
  Rng rng(2);
  Eigen::VectorXd x = standard_normal(rng, 2000);
  x += Eigen::VectorXd::LinSpaced(2000, 0.0, 3.0);
  CHECK(std::abs(geweke(x)) > 1.96);
}

TEST_CASE("effective sample size") {
  Rng rng(3);
  const double rho = 0.9;
  const Eigen::Index m = 20000;
  const double ess = effective_sample_size(ar1(rng, m, rho));
  const double expect = m * (1 - rho) / (1 + rho);
  CHECK(ess < 0.15 * m);
  CHECK(ess > expect / 2);
  CHECK(ess < expect * 2);
  const double iid = effective_sample_size(standard_normal(rng, 5000));
  CHECK(iid > 4000);
}

TEST_CASE("constant chain") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(500, 3.0);
  CHECK(effective_sample_size(c) == 500.0);
  CHECK(geweke(c) == 0.0);
}

TEST_CASE("spectral density at zero") {
  Rng rng(4);
  CHECK(spectral_density_at_zero(standard_normal(rng, 20000)) == doctest::Approx(1.0).epsilon(0.1));
  const double rho = 0.5;
  CHECK(spectral_density_at_zero(ar1(rng, 20000, rho)) == doctest::Approx(1.0 / ((1 - rho) * (1 - rho))).epsilon(0.15));
}

TEST_CASE("Geweke needs enough draws") {
  CHECK_THROWS_AS(geweke(Eigen::Vector3d(1, 2, 3)), ConfigError);
}

}
