#include "doctest.h"
#include "mosaic/config.hpp"
#include "mosaic/errors.hpp"

using namespace mosaic;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c = RunConfig::from_json_text("{}");
  CHECK(c.chain.total == 60000);
  CHECK(c.chain.adapt == 30000);
  CHECK(c.chain.burn_in == 45000);
  CHECK(c.alpha == 0.05);
  CHECK(c.default_basis.kind == BasisKind::spline);
  CHECK(c.phi_grid_spec().values.size() == 31);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing") {
  const RunConfig c = RunConfig::from_json_text(R"({
    "data": {"path": "d.csv", "covariates": ["a", "b"]},
    "bases": {"default": {"kind": "spline", "knots": 6}, "b": {"kind": "linear"}},
    "phi": 2.5, "seed": 42,
    "priors": {"tau2": {"shape": 2, "rate": 3}},
    "chain": {"total": 100, "burn_in": 50, "adapt": 40},
    "phi_selection": {"criterion": "log_predictive_score"},
    "simulation": {"scenario": 3, "replicates": 2}
  })");
  CHECK(c.data_path == "d.csv");
  CHECK(*c.phi == 2.5);
  CHECK(c.seed == 42);
  CHECK(c.priors.tau2.shape == 2.0);
  CHECK(c.chain.total == 100);
  CHECK(c.criterion == PhiCriterion::log_predictive_score);
  CHECK(c.scenario == 3);
  const auto specs = c.basis_specs({"a", "b"});
  CHECK(specs[0].kind == BasisKind::spline);
  CHECK(specs[0].n_knots == 6);
  CHECK(specs[1].kind == BasisKind::linear);
  CHECK_THROWS_AS(c.basis_specs({"a"}), ConfigError);
  const auto fo = c.fit_options({"a", "b"});
  CHECK(fo.phi == 2.5);
  CHECK(fo.chain.seed != 42);
}

TEST_CASE("invalid documents") {
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"chian": {}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"chain": {"totl": 3}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text("{not json"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"penalty_role": "weird"})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"phi": 1, "phi_grid": "0:2:1"})").validate(), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"alpha": 1.5})").validate(), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seed": "x"})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/mosaic.json"), IoError);
}

TEST_CASE("hash") {
  const RunConfig a = RunConfig::from_json_text(R"({"seed": 3})");
  RunConfig b = a;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.output = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 4;
  CHECK(a.hash() != b.hash());
  const RunConfig c = RunConfig::from_json_text(a.to_json());
  CHECK(c.hash() == a.hash());
}

}
