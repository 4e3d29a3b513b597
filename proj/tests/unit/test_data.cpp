#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mosaic/csv.hpp"
#include "mosaic/data.hpp"
#include "mosaic/errors.hpp"

using namespace mosaic;

namespace {

FovObservation obs(const std::string& id, double sx, double sy, double x, double y) {
  FovObservation o;
  o.patient_id = id;
  o.centroid << sx, sy;
  o.covariates = Eigen::VectorXd::Constant(1, x);
  o.outcome = y;
  return o;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mosaic_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("rows are grouped by patient in order of first appearance") {
  const std::vector<FovObservation> rows{obs("b", 0, 0, 1, 10), obs("a", 0, 0, 2, 20), obs("b", 1, 0, 3, 30),
                                         obs("a", 0, 1, 4, 40), obs("b", 0, 1, 5, 50)};
  const auto data = HmiDataset::from_observations(rows, {"x"});
  REQUIRE(data.num_patients() == 2);
  CHECK(data.patient_ids()[0] == "b");
  CHECK(data.size(0) == 3);
  CHECK(data.size(1) == 2);
  CHECK(data.offset(1) == 3);
  CHECK(data.outcomes()(0) == 10);
  CHECK(data.outcomes()(1) == 30);
  CHECK(data.outcomes()(2) == 50);
  CHECK(data.outcomes()(3) == 20);
  CHECK(data.source_row(3) == 1);
  CHECK(data.patient_of(4) == 1);
  CHECK(data.find_patient("a") == 1);
  CHECK(data.find_patient("zz") == 2);

  const auto design = build_patient_design(data);
  CHECK(design.z.rows() == 5);
  CHECK(design.z.cols() == 2);
  CHECK(design.z.rowwise().sum().isApproxToConstant(1.0));
  CHECK(design.z(3, 1) == 1.0);
}

TEST_CASE("invalid observations are rejected") {
  SUBCASE("duplicate centroid within a patient") {
    const std::vector<FovObservation> rows{obs("a", 0.5, 0.5, 1, 1), obs("a", 0.5, 0.5, 2, 2)};
    CHECK_THROWS_AS(HmiDataset::from_observations(rows, {"x"}), DataError);
  }
  SUBCASE("same centroid in different patients is fine") {
    const std::vector<FovObservation> rows{obs("a", 0.5, 0.5, 1, 1), obs("b", 0.5, 0.5, 2, 2)};
    CHECK_NOTHROW(HmiDataset::from_observations(rows, {"x"}));
  }
  SUBCASE("non-finite outcome") {
    const std::vector<FovObservation> rows{obs("a", 0, 0, 1, std::nan(""))};
    CHECK_THROWS_AS(HmiDataset::from_observations(rows, {"x"}), DataError);
  }
  SUBCASE("covariate length mismatch") {
    auto bad = obs("a", 0, 0, 1, 1);
    bad.covariates = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(HmiDataset::from_observations({bad}, {"x"}), DataError);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(HmiDataset::from_observations({}, {"x"}), DataError); }
}

TEST_CASE("csv round trip is exact") {
  Rng rng(11);
  const auto data = fixtures::random_dataset(rng, {3, 4, 2}, 2);
  const auto dir = scratch_dir("roundtrip");
  write_dataset(data, dir / "d.csv");
  const auto back = load_dataset(dir / "d.csv");
  CHECK(back.patient_ids() == data.patient_ids());
  CHECK(back.covariate_names() == data.covariate_names());
  CHECK(back.outcomes() == data.outcomes());
  CHECK(back.covariates() == data.covariates());
  CHECK(back.centroids() == data.centroids());
}

TEST_CASE("csv schema errors") {
  const auto dir = scratch_dir("schema");
  {
    std::ofstream f(dir / "missing.csv");
    f << "patient_id,sx,x,y\na,0,1,2\n";
  }
  CHECK_THROWS_AS(load_dataset(dir / "missing.csv"), ConfigError);
  {
    std::ofstream f(dir / "bad.csv");
    f << "patient_id,sx,sy,x,y\na,0,0,1,2\na,1,0,oops,2\n";
  }
  try {
    load_dataset(dir / "bad.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("oops") != std::string::npos);
    CHECK(msg.find("x") != std::string::npos);
  }
  CHECK_THROWS_AS(load_dataset(dir / "absent.csv"), IoError);
}

TEST_CASE("csv formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567, 1e22}) {
    CHECK(std::stod(csv::format(v)) == v);
  }
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
  const auto cells = csv::split_line("\"a,b\",c,\"d\"\"e\"");
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == "a,b");
  CHECK(cells[2] == "d\"e");
}

TEST_CASE("standardization gives zero mean and unit sd") {
  Rng rng(3);
  const auto data = fixtures::random_dataset(rng, {10, 15}, 2);
  const auto z = standardize_covariates(data);
  const auto& x = z.data.covariates();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    CHECK(std::abs(x.col(c).mean()) < 1e-12);
    const double var = (x.col(c).array() - x.col(c).mean()).square().sum() / static_cast<double>(x.rows() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK((z.record.invert(x) - data.covariates()).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<FovObservation> rows{obs("a", 0, 0, 2, 1), obs("a", 1, 0, 2, 2)};
  CHECK_THROWS_AS(standardize_covariates(HmiDataset::from_observations(rows, {"x"})), DataError);
}

TEST_CASE("distance rescaling") {
  CHECK(rescale_dimple(0.0) == 100.0);
  CHECK(rescale_dimple(1.0) == 0.0);
  CHECK(rescale_dimple(0.25) == 75.0);
  CHECK_THROWS_AS(rescale_dimple(1.5), ConfigError);
  CHECK_THROWS_AS(rescale_dimple(-0.1), ConfigError);
}

TEST_CASE("subset keeps grouping and order") {
  Rng rng(5);
  const auto data = fixtures::random_dataset(rng, {3, 3, 3});
  const std::vector<std::size_t> rows{7, 1, 2, 8};
  const auto sub = data.subset(rows);
  CHECK(sub.num_patients() == 2);
  CHECK(sub.outcomes()(0) == data.outcomes()(1));
  CHECK(sub.outcomes()(1) == data.outcomes()(2));
  CHECK(sub.outcomes()(2) == data.outcomes()(7));
  CHECK(sub.outcomes()(3) == data.outcomes()(8));
}

}
