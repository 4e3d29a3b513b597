#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fixtures.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/model.hpp"
#include "mosaic/structured.hpp"

using namespace mosaic;

TEST_SUITE("kernel") {

TEST_CASE("kernel values") {
  const Eigen::Vector2d a(0, 0), b(1, 1);
  CHECK(kernel_value(a, b, 0.5, true) == doctest::Approx(std::exp(-1.0)));
  CHECK(kernel_value(a, b, 0.5, false) == 0.0);
  CHECK(kernel_value(a, a, 3.0, true) == 1.0);
  CHECK(kernel_value(a, b, 0.0, true) == 1.0);
  CHECK_THROWS_AS(kernel_value(a, b, -1.0, true), ConfigError);
}

TEST_CASE("assembled kernel is symmetric PSD and patient blocked") {
  Rng rng(2);
  const auto data = fixtures::random_dataset(rng, {4, 6, 3});
  const auto k = assemble_kernel(data, 2.0);
  const Eigen::MatrixXd c = k.dense();
  CHECK((c - c.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    CHECK(c(r, r) == 1.0);
    for (Eigen::Index s = 0; s < c.cols(); ++s) {
      if (data.patient_of(static_cast<std::size_t>(r)) != data.patient_of(static_cast<std::size_t>(s))) {
        CHECK(c(r, s) == 0.0);
      }
    }
  }
  const Eigen::VectorXd v = standard_normal(rng, c.rows());
  CHECK((k.multiply(v) - c * v).norm() < 1e-12);
  CHECK_THROWS_AS(assemble_kernel(data, -0.1), ConfigError);
}

TEST_CASE("jittered cholesky") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(5, 5);
  const auto f = jittered_cholesky(ones);
  CHECK(f.jitter > 0.0);
  CHECK(f.jitter <= 1e-6 + 1e-15);
  const Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(jittered_cholesky(neg), NumericalError);
  const auto id = jittered_cholesky(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.jitter == 0.0);
}

TEST_CASE("marginal covariance matches first-principles assembly") {
  Rng rng(4);
  const auto data = fixtures::random_dataset(rng, {5, 3, 4}, 2);
  std::vector<SplineBasis> bases{build_linear_basis(data, 0), build_spline_basis(data, 1, 3, 2)};
  const VarianceState s{2.0, 0.7, 3.0, 1.5};
  const double phi = 1.7;

  const MosaicModel spatial(data, bases, phi);
  const Eigen::MatrixXd expect = fixtures::dense_sigma(data, bases, s, phi, true);
  const Eigen::MatrixXd got = spatial.dense_covariance(s).sigma;
  CHECK((got - expect).norm() / expect.norm() < 1e-9);

  ModelOptions flat;
  flat.spatial = false;
  const MosaicModel plain(data, bases, phi, flat);
  const Eigen::MatrixXd diff = got - plain.dense_covariance(s).sigma;
  CHECK((diff - s.tau2 * spatial.kernel().dense()).norm() < 1e-9 * expect.norm());
}

TEST_CASE("structured and dense likelihoods agree with a naive inverse") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = fixtures::random_dataset(rng, {3, 5, 2, 4}, 1);
    std::vector<SplineBasis> bases{build_spline_basis(data, 0, 3, 2)};
    std::uniform_real_distribution<double> u(0.2, 5.0);
    const VarianceState s{u(rng), u(rng), u(rng), u(rng)};
    const double phi = u(rng);
    const MosaicModel model(data, bases, phi);
    const double naive = fixtures::naive_log_likelihood(data.outcomes(), fixtures::dense_sigma(data, bases, s, phi, true));
    CHECK(model.log_likelihood(s) == doctest::Approx(naive).epsilon(1e-9));
    CHECK(log_marginal_likelihood(data.outcomes(), model.dense_covariance(s)) ==
          doctest::Approx(naive).epsilon(1e-9));

    const auto factor = model.factorize(s);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd::Random(data.num_observations(), 2);
    const Eigen::MatrixXd dense = model.dense_covariance(s).sigma;
    CHECK((dense * factor.solve(rhs) - rhs).norm() < 1e-8 * rhs.norm());
  }
}

TEST_CASE("spectral blocks reproduce the kernel") {
  Rng rng(6);
  const auto data = fixtures::random_dataset(rng, {4, 7});
  const auto k = assemble_kernel(data, 3.0);
  const SpectralBlocks blocks(k);
  const Eigen::MatrixXd c = k.dense();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(c.rows(), c.rows());
  const Eigen::MatrixXd q = blocks.unrotate(id);
  CHECK((q * blocks.eigenvalues().asDiagonal() * q.transpose() - c).norm() < 1e-10);
  CHECK((blocks.rotate(blocks.unrotate(id)) - id).norm() < 1e-10);
}

}
