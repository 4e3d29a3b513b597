#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "mosaic/bands.hpp"
#include "mosaic/posterior.hpp"
#include "mosaic/sampler.hpp"
#include "mosaic/simulation.hpp"

using namespace mosaic;

namespace {

// Scenario-sized training set (270 rows, 20 patients) with a cubic spline.
const MosaicModel& scenario_model() {
  static const MosaicModel model = [] {
    const auto sim = generate(ScenarioSpec::for_scenario(2, 1));
    const auto train = sim.train();
    return MosaicModel(train, {build_spline_basis(train, 0, 5, 3)}, 2.0);
  }();
  return model;
}

const VarianceState kState{100.0, 5.0, 500.0, 50.0};

}  // namespace

static void likelihood_structured(benchmark::State& st) {
  const auto& model = scenario_model();
  for (auto _ : st) benchmark::DoNotOptimize(model.log_likelihood(kState));
}
BENCHMARK(likelihood_structured);

static void likelihood_dense(benchmark::State& st) {
  const auto& model = scenario_model();
  for (auto _ : st) {
    benchmark::DoNotOptimize(log_marginal_likelihood(model.data().outcomes(), model.dense_covariance(kState)));
  }
}
BENCHMARK(likelihood_dense);

static void ram_step_posterior(benchmark::State& st) {
  const auto& model = scenario_model();
  const auto layout = ParameterLayout::for_model(model);
  const VariancePosterior post(model, PriorSpec{}, layout);
  const LogDensity target = [&](const Eigen::VectorXd& x) { return post(x); };
  Eigen::VectorXd x = layout.to_log(kState);
  double lp = post(x);
  RamState ram;
  ram.s = 0.1 * Eigen::MatrixXd::Identity(layout.dimension(), layout.dimension());
  ram.n_adapt = 1 << 30;
  Rng rng(1);
  for (auto _ : st) benchmark::DoNotOptimize(ram_step(x, lp, ram, target, rng));
}
BENCHMARK(ram_step_posterior);

static void beta_recovery(benchmark::State& st) {
  const auto& model = scenario_model();
  const auto mode = st.range(0) == 0 ? BetaSampling::joint : BetaSampling::block_independent;
  Rng rng(2);
  for (auto _ : st) benchmark::DoNotOptimize(recover_beta(kState, model, rng, mode));
}
BENCHMARK(beta_recovery)->Arg(0)->Arg(1);

static void joint_band(benchmark::State& st) {
  Rng rng(3);
  Eigen::MatrixXd curves(st.range(0), 100);
  for (Eigen::Index r = 0; r < curves.rows(); ++r) curves.row(r) = standard_normal(rng, 100).transpose();
  for (auto _ : st) benchmark::DoNotOptimize(joint_credible_band(curves, 0.05));
}
BENCHMARK(joint_band)->Arg(1000)->Arg(15000);
BENCHMARK_MAIN();
