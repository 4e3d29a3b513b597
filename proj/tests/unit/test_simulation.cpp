#include <sstream>

#include "doctest.h"
#include "mosaic/errors.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/simulation.hpp"

using namespace mosaic;

namespace {

BenchmarkOptions quick_options() {
  BenchmarkOptions o;
  o.oracle_phi = true;
  o.chain.total = 800;
  o.chain.adapt = 400;
  o.chain.burn_in = 400;
  o.grid_size = 20;
  return o;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("scenario defaults") {
  const auto s1 = ScenarioSpec::for_scenario(1);
  CHECK(s1.phi == 10.0);
  CHECK(s1.tau2 == 50.0);
  const auto s2 = ScenarioSpec::for_scenario(2);
  CHECK(s2.phi == 2.0);
  CHECK(s2.tau2 == 500.0);
  const auto s3 = ScenarioSpec::for_scenario(3);
  CHECK(s3.nonlinear);
  CHECK(s3.curve(1.0) == doctest::Approx(5.0 * std::atan(1.0)));
  CHECK(s1.curve(-2.0) == -10.0);
  CHECK_THROWS_AS(ScenarioSpec::for_scenario(4), ConfigError);
}

TEST_CASE("outcomes are the sum of their parts") {
  const auto sim = generate(ScenarioSpec::for_scenario(3, 5));
  CHECK(sim.reconstruct() == sim.data.outcomes());
  CHECK(sim.data.num_observations() == 300);
  CHECK(sim.data.num_patients() == 20);
  const double var = (sim.noise.array() - sim.noise.mean()).square().sum() / 299.0;
  CHECK(var == doctest::Approx(50.0).epsilon(0.35));
  const auto again = generate(ScenarioSpec::for_scenario(3, 5));
  CHECK(again.data.outcomes() == sim.data.outcomes());
}

TEST_CASE("allocation and split invariants") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sim = generate(ScenarioSpec::for_scenario(2, seed));
    std::size_t total = 0;
    for (std::size_t n : sim.data.patient_sizes()) {
      CHECK(n >= 5);
      total += n;
    }
    CHECK(total == 300);
    CHECK(sim.split.test.size() == 30);
    const auto train = sim.train();
    CHECK(train.num_patients() == 20);
    const Eigen::VectorXd x = sim.data.covariates().col(0);
    CHECK(train.covariates().minCoeff() == x.minCoeff());
    CHECK(train.covariates().maxCoeff() == x.maxCoeff());
    CHECK(x.minCoeff() >= -3.0);
    CHECK(x.maxCoeff() <= 3.0);
  }
}

TEST_CASE("spatial effects follow the kernel") {
  double near_sum = 0.0, far_sum = 0.0;
  double white_sum = 0.0, white_sq = 0.0;
  long white_n = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto spec = ScenarioSpec::for_scenario(2, seed);
    const auto sim = generate(spec);
    const auto o = static_cast<Eigen::Index>(sim.data.offset(0));
    const auto n = static_cast<Eigen::Index>(sim.data.size(0));
    const Eigen::MatrixX2d s = sim.data.centroids().middleRows(o, n);
    const Eigen::VectorXd psi = sim.psi.segment(o, n);
    if (seed <= 50) {
      double dmin = 1e300, dmax = -1.0;
      Eigen::Index a0 = 0, b0 = 0, a1 = 0, b1 = 0;
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
          const double d = (s.row(a) - s.row(b)).squaredNorm();
          if (d < dmin) dmin = d, a0 = a, b0 = b;
          if (d > dmax) dmax = d, a1 = a, b1 = b;
        }
      }
      near_sum += psi(a0) * psi(b0) / spec.tau2;
      far_sum += psi(a1) * psi(b1) / spec.tau2;
    }
    const JitteredCholesky chol = jittered_cholesky(spec.tau2 * cross_kernel(s, s, spec.phi));
    const Eigen::VectorXd w = chol.llt.matrixL().solve(psi);
    white_sum += w.sum();
    white_sq += w.squaredNorm();
    white_n += n;
  }
  CHECK(near_sum / 50.0 > far_sum / 50.0 + 0.4);
  const double mean = white_sum / white_n;
  const double var = white_sq / white_n - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("curve MSE") {
  const Eigen::VectorXd truth = Eigen::VectorXd::LinSpaced(10, -1, 1);
  const Eigen::MatrixXd exact = truth.transpose().replicate(3, 1);
  CHECK(mse_of_curve(exact, truth) < 1e-28);
  const Eigen::MatrixXd shifted = exact.array() + 0.7;
  CHECK(mse_of_curve(shifted, truth) == doctest::Approx(0.49));
  CHECK_THROWS_AS(mse_of_curve(exact, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("benchmark is deterministic and writes one row per model") {
  const auto spec = ScenarioSpec::for_scenario(2);
  const auto a = run_benchmark(spec, 1, quick_options(), 7);
  const auto b = run_benchmark(spec, 1, quick_options(), 7);
  REQUIRE(a.size() == 2);
  CHECK(a[0].model == "MoSAIC");
  CHECK(a[1].model == "NonSpatial");
  CHECK_FALSE(a[0].failed);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].waic == b[k].waic);
    CHECK(a[k].mspe == b[k].mspe);
    CHECK(a[k].mse == b[k].mse);
  }
  std::ostringstream out;
  write_benchmark_csv(out, a);
  const std::string text = out.str();
  CHECK(text.rfind("model,replicate,seed,phi,WAIC,MSE,MSPE,coverage,time,failed,message", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("failing replicates are flagged") {
  auto o = quick_options();
  o.oracle_phi = false;
  o.phi_grid = {-1.0};
  const auto rows = run_benchmark(ScenarioSpec::for_scenario(1), 2, o, 3);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.failed);
    CHECK(std::isnan(r.mspe));
    CHECK_FALSE(r.message.empty());
  }
}

TEST_CASE("curve recovery is comparable under a weak spatial signal") {
  auto o = quick_options();
  o.chain = BenchmarkOptions::desk_chain();
  const auto rows = run_benchmark(ScenarioSpec::for_scenario(1), 1, o, 11);
  REQUIRE(rows.size() == 2);
  const double ratio = rows[0].mse / rows[1].mse;
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 3.0);
}

}
