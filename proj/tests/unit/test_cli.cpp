#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "mosaic/csv.hpp"
#include "mosaic/data.hpp"

#ifdef MOSAIC_CLI_PATH

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "mosaic_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    mosaic::Rng rng(77);
    mosaic::write_dataset(fixtures::random_dataset(rng, {12, 10, 14, 9}), d / "train.csv");
    const auto test = fixtures::random_dataset(rng, {3, 2});
    mosaic::write_dataset(test.with_covariates(test.covariates().cwiseMax(-1.5).cwiseMin(1.5)), d / "test.csv");
    mosaic::write_dataset(test.with_covariates(test.covariates().array() + 50.0), d / "far.csv");
    std::ofstream cfg(d / "quick.json");
    cfg << R"({"chain": {"total": 600, "burn_in": 300, "adapt": 300},
               "phi_selection": {"chain": {"total": 300, "burn_in": 150, "adapt": 150}},
               "simulation": {"chain": {"total": 400, "burn_in": 200, "adapt": 200}, "oracle_phi": true},
               "bases": {"default": {"kind": "spline", "knots": 4}}, "grid_size": 30})";
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(MOSAIC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t data_rows(const fs::path& csv_path) { return mosaic::csv::read(csv_path).rows.size(); }

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string quick() { return " --config " + (workdir() / "quick.json").string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("select-phi writes one row per grid value") {
  const auto d = workdir();
  REQUIRE(run("select-phi" + quick() + " --data " + (d / "train.csv").string() + " --grid 0:15:0.5 --out " +
              (d / "sel").string()) == 0);
  CHECK(data_rows(d / "sel" / "phi_scores.csv") == 31);
  const json sel = load(d / "sel" / "phi_selected.json");
  CHECK(sel.contains("metadata"));
  REQUIRE(run("select-phi" + quick() + " --data " + (d / "train.csv").string() + " --grid 3 --out " +
              (d / "sel1").string()) == 0);
  CHECK(data_rows(d / "sel1" / "phi_scores.csv") == 1);
}

TEST_CASE("fit is reproducible and writes its artifacts") {
  const auto d = workdir();
  const std::string base = "fit" + quick() + " --data " + (d / "train.csv").string() + " --phi 2 --seed 5 --out ";
  REQUIRE(run(base + (d / "fit_a").string()) == 0);
  REQUIRE(run(base + (d / "fit_b").string()) == 0);
  for (const char* f : {"draws_variances.csv", "draws_beta.csv", "curves.csv", "trace_data.csv", "fit_summary.json",
                        "config.json", "training_data.csv"}) {
    CHECK_MESSAGE(fs::exists(d / "fit_a" / f), f);
  }
  json a = load(d / "fit_a" / "fit_summary.json");
  json b = load(d / "fit_b" / "fit_summary.json");
  a.erase("runtime_seconds");
  b.erase("runtime_seconds");
  CHECK(a == b);
  const json& p = a.at("pve");
  const double total = p.at("covariates").get<double>() + p.at("patients").get<double>() +
                       p.at("spatial").get<double>() + p.at("noise").get<double>();
  CHECK(total == doctest::Approx(100.0).epsilon(1e-9));

  const auto va = mosaic::csv::read(d / "fit_a" / "draws_variances.csv");
  const auto vb = mosaic::csv::read(d / "fit_b" / "draws_variances.csv");
  CHECK(va.rows == vb.rows);
  CHECK(va.rows.size() == 300);
  REQUIRE_FALSE(va.metadata.empty());
  CHECK(va.metadata[0].find("config_hash=") != std::string::npos);

  SUBCASE("predict and summarize") {
    REQUIRE(run("predict --fit " + (d / "fit_a").string() + " --data " + (d / "test.csv").string() + " --out " +
                (d / "pred").string()) == 0);
    CHECK(data_rows(d / "pred" / "prediction_summary.csv") == 5);
    CHECK(fs::exists(d / "pred" / "prediction_metrics.json"));
    CHECK(run("summarize --fit " + (d / "fit_a").string()) == 0);
    CHECK(run("predict --fit " + (d / "fit_a").string() + " --data " + (d / "far.csv").string() + " --out " +
              (d / "pred_far").string()) == 1);
  }
}

TEST_CASE("simulate writes two rows per replicate") {
  const auto d = workdir();
  REQUIRE(run("simulate" + quick() + " --scenario 2 --replicates 1 --seed 7 --out " + (d / "sim").string()) == 0);
  CHECK(data_rows(d / "sim" / "benchmark.csv") == 2);
}

TEST_CASE("exit codes") {
  const auto d = workdir();
  {
    std::ofstream blocker(d / "blocker");
    blocker << "x";
  }
  CHECK(run("fit" + quick() + " --data " + (d / "train.csv").string() + " --phi 1 --out " +
            (d / "blocker" / "sub").string()) == 2);
  CHECK(run("summarize --fit " + (d / "nothing_here").string()) == 2);
  CHECK(run("predict --fit " + (d / "nothing_here").string() + " --data " + (d / "test.csv").string()) == 2);
  {
    std::ofstream bad(d / "bad.json");
    bad << R"({"chian": 1})";
  }
  CHECK(run("fit --config " + (d / "bad.json").string() + " --data " + (d / "train.csv").string()) == 1);
  CHECK(run("fit" + quick() + " --data " + (d / "missing.csv").string() + " --phi 1") == 2);
  CHECK(run("simulate --scenario 9") == 1);
  CHECK(run("fit" + quick() + " --data " + (d / "train.csv").string() + " --phi 1 --grid 0:2:1") == 1);
}

}

#endif
