#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mosaic/errors.hpp"

namespace {

// 0 success, 1 user/config error, 2 I/O error, 3 numerical failure.
int exit_code(const std::exception& e) {
  if (dynamic_cast<const mosaic::IoError*>(&e)) return 2;
  if (dynamic_cast<const mosaic::NumericalError*>(&e)) return 3;
  return 1;
}

void add_common(CLI::App* cmd, mosaic::cli::Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "master random seed");
  cmd->add_option("--alpha", o.alpha, "band / interval level")->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical Bayesian spatial regression for patient / field-of-view data"};
  app.require_subcommand(1);
  mosaic::cli::Overrides o;

  auto* fit = app.add_subcommand("fit", "fit the model and write draws, curves and summaries");
  add_common(fit, o);
  fit->add_option("--data", o.data, "training CSV");
  fit->add_option("--phi", o.phi, "fixed spatial decay");
  fit->add_option("--phi-file", o.phi_file, "phi_selected.json from select-phi");
  fit->add_option("--grid", o.grid, "select phi first over start:stop:step");

  auto* select = app.add_subcommand("select-phi", "choose the spatial decay by train/test residual prediction");
  add_common(select, o);
  select->add_option("--data", o.data, "training CSV");
  select->add_option("--grid", o.grid, "candidate grid start:stop:step (default 0:15:0.5)");

  std::string fit_dir, test_csv;
  auto* pred = app.add_subcommand("predict", "posterior predictive draws at new fields of view");
  pred->add_option("--fit", fit_dir, "directory written by fit")->required();
  pred->add_option("--data", test_csv, "CSV of rows to predict")->required();
  pred->add_option("--out", o.out, "output directory (default: the fit directory)");
  pred->add_option("--alpha", o.alpha, "interval level")->check(CLI::Range(0.0, 1.0));

  auto* sim = app.add_subcommand("simulate", "run the synthetic benchmark");
  add_common(sim, o);
  sim->add_option("--scenario", o.scenario, "scenario 1, 2 or 3")->check(CLI::Range(1, 3));
  sim->add_option("--replicates", o.replicates, "number of replicates")->check(CLI::PositiveNumber);
  sim->add_option("--grid", o.grid, "phi selection grid for each replicate");

  auto* summ = app.add_subcommand("summarize", "print a report of a fit directory");
  summ->add_option("--fit", fit_dir, "directory written by fit")->required();
  summ->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) {
      mosaic::cli::cmd_fit(mosaic::cli::resolve_config(o));
    } else if (*select) {
      mosaic::cli::cmd_select_phi(mosaic::cli::resolve_config(o));
    } else if (*pred) {
      mosaic::cli::cmd_predict(fit_dir, test_csv, o.out.empty() ? fit_dir : o.out, o.alpha);
    } else if (*sim) {
      auto config = mosaic::cli::resolve_config(o);
      if (!o.grid.empty()) config.simulation_phi_grid = o.grid;
      mosaic::cli::cmd_simulate(config);
    } else if (*summ) {
      mosaic::cli::cmd_summarize(fit_dir, o.alpha);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
