#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/fit.hpp"
#include "mosaic/phi_selection.hpp"
#include "mosaic/prediction.hpp"
#include "mosaic/simulation.hpp"

namespace mosaic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".mosaic_write_test";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::string metadata_line(const RunConfig& c) {
  return "# mosaic " + std::string(kVersion) + " config_hash=" + c.hash() + " seed=" + std::to_string(c.seed);
}

json metadata_json(const RunConfig& c) {
  return {{"tool", "mosaic"}, {"version", kVersion}, {"config_hash", c.hash()}, {"seed", c.seed}};
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing fit artifact '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse '" + path.string() + "': " + e.what());
  }
}

// Doubles in JSON: non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

HmiDataset load_training(const RunConfig& config) {
  if (config.data_path.empty()) throw ConfigError("no dataset given (use --data or data.path)");
  return load_dataset(config.data_path, config.schema);
}

PhiSelectionReport run_selection(const RunConfig& config, const HmiDataset& data, const fs::path& out_dir) {
  const FitOptions fo = config.fit_options(data.covariate_names());
  const PreparedModel prepared = prepare_model(data, fo);
  const PhiSelectionReport report =
      select_phi(prepared.model->data(), prepared.model->bases(), config.phi_grid_spec(), config.phi_selection_options());

  auto scores = open_output(out_dir / "phi_scores.csv");
  scores << metadata_line(config) << '\n';
  csv::write_row(scores, {"phi", "score", "acceptance_rate"});
  for (std::size_t k = 0; k < report.phi.size(); ++k) {
    csv::write_row(scores, {csv::format(report.phi[k]), csv::format(report.score[k]), csv::format(report.acceptance_rate[k])});
  }
  std::vector<std::size_t> test_rows;
  for (std::size_t r : report.split.test) test_rows.push_back(data.source_row(r));
  std::sort(test_rows.begin(), test_rows.end());
  write_json(out_dir / "phi_selected.json",
             {{"metadata", metadata_json(config)},
              {"phi", report.best_phi},
              {"score", report.score[report.best_index]},
              {"criterion", report.criterion == PhiCriterion::rmse ? "rmse" : "log_predictive_score"},
              {"test_fraction", config.test_fraction},
              {"n_train", report.split.train.size()},
              {"n_test", report.split.test.size()},
              {"test_rows", test_rows}});
  return report;
}

std::string beta_header_name(const MosaicModel& model, Eigen::Index column) {
  const auto np = model.num_patients();
  if (column < np) return "mu:" + model.data().patient_ids()[static_cast<std::size_t>(column)];
  column -= np;
  if (column < model.num_coefficients()) {
    for (std::size_t l = model.bases().size(); l-- > 0;) {
      if (column >= model.coefficient_offset(l)) {
        return "theta:" + model.data().covariate_names()[model.bases()[l].covariate_index] + ":" +
               std::to_string(column - model.coefficient_offset(l));
      }
    }
  }
  column -= model.num_coefficients();
  return "psi:" + std::to_string(model.data().source_row(static_cast<std::size_t>(column)));
}

void write_fit_artifacts(const RunConfig& config, const HmiDataset& data, const FitResult& fit, const fs::path& dir) {
  const MosaicModel& model = fit.model();
  const std::string meta = metadata_line(config);

  {
    auto out = open_output(dir / "draws_variances.csv");
    out << meta << '\n';
    csv::write_row(out, {"draw", "sigma2_z", "sigma2_x", "tau2", "sigma2_y", "log_posterior", "accepted"});
    for (Eigen::Index m = 0; m < fit.variances.size(); ++m) {
      csv::write_row(out, {std::to_string(m), csv::format(fit.variances.values(m, 0)), csv::format(fit.variances.values(m, 1)),
                           csv::format(fit.variances.values(m, 2)), csv::format(fit.variances.values(m, 3)),
                           csv::format(fit.variances.log_posterior(m)),
                           fit.variances.accepted[static_cast<std::size_t>(m)] ? "1" : "0"});
    }
  }
  {
    const Eigen::Index width = model.num_patients() + model.num_coefficients() + model.num_observations();
    if (static_cast<double>(fit.posterior.size()) * static_cast<double>(width) <= static_cast<double>(config.draws_beta_limit)) {
      auto out = open_output(dir / "draws_beta.csv");
      out << meta << '\n';
      std::vector<std::string> header{"draw"};
      for (Eigen::Index c = 0; c < width; ++c) header.push_back(csv::escape(beta_header_name(model, c)));
      csv::write_row(out, header);
      for (Eigen::Index m = 0; m < fit.posterior.size(); ++m) {
        std::vector<std::string> row{std::to_string(m)};
        for (Eigen::Index c = 0; c < model.num_patients(); ++c) row.push_back(csv::format(fit.posterior.mu(m, c)));
        for (Eigen::Index c = 0; c < model.num_coefficients(); ++c) row.push_back(csv::format(fit.posterior.theta(m, c)));
        for (Eigen::Index c = 0; c < model.num_observations(); ++c) row.push_back(csv::format(fit.posterior.psi(m, c)));
        csv::write_row(out, row);
      }
    }
  }
  {
    auto out = open_output(dir / "curves.csv");
    out << meta << '\n';
    csv::write_row(out, {"covariate", "X", "mean", "lo_pt", "hi_pt", "lo_joint", "hi_joint", "p_simbas"});
    for (const CurveSummary& c : fit.curves) {
      for (Eigen::Index g = 0; g < c.x.size(); ++g) {
        csv::write_row(out, {csv::escape(c.covariate), csv::format(c.x(g)), csv::format(c.bands.mean(g)),
                             csv::format(c.bands.lower_pointwise(g)), csv::format(c.bands.upper_pointwise(g)),
                             csv::format(c.bands.lower_joint(g)), csv::format(c.bands.upper_joint(g)),
                             csv::format(c.simbas.probability(g))});
      }
    }
  }
  {
    auto out = open_output(dir / "patient_curves.csv");
    out << meta << '\n';
    csv::write_row(out, {"patient_id", "covariate", "X", "mean"});
    for (const CurveSummary& c : fit.curves) {
      for (std::size_t i = 0; i < model.data().num_patients(); ++i) {
        const double offset = fit.patient_intercepts(static_cast<Eigen::Index>(i));
        for (Eigen::Index g = 0; g < c.x.size(); ++g) {
          csv::write_row(out, {csv::escape(model.data().patient_ids()[i]), csv::escape(c.covariate), csv::format(c.x(g)),
                               csv::format(c.bands.mean(g) + offset)});
        }
      }
    }
  }
  {
    auto out = open_output(dir / "trace_data.csv");
    out << meta << '\n';
    csv::write_row(out, {"draw", "parameter", "value", "log_posterior"});
    for (Component comp : fit.variances.layout.active) {
      for (Eigen::Index m = 0; m < fit.variances.size(); ++m) {
        csv::write_row(out, {std::to_string(m), component_name(comp),
                             csv::format(fit.variances.values(m, static_cast<Eigen::Index>(comp))),
                             csv::format(fit.variances.log_posterior(m))});
      }
    }
  }

  json summary;
  summary["metadata"] = metadata_json(config);
  summary["phi"] = model.phi();
  summary["spatial"] = model.spatial();
  summary["n_observations"] = model.num_observations();
  summary["n_patients"] = model.num_patients();
  summary["n_draws"] = fit.posterior.size();
  summary["pve"] = {{"covariates", fit.pve.covariates},
                    {"patients", fit.pve.patients},
                    {"spatial", fit.pve.spatial},
                    {"noise", fit.pve.noise}};
  summary["waic"] = {{"waic", number(fit.waic.waic)}, {"lppd", number(fit.waic.lppd)}, {"p_waic", number(fit.waic.p_waic)}};
  summary["dic"] = {{"dic", number(fit.dic.dic)},
                    {"mean_deviance", number(fit.dic.mean_deviance)},
                    {"deviance_at_mean", number(fit.dic.deviance_at_mean)},
                    {"p_d", number(fit.dic.p_d)}};
  json diag = json::array();
  for (const auto& d : fit.diagnostics) {
    diag.push_back({{"parameter", d.name}, {"mean", d.mean}, {"sd", d.sd}, {"geweke", number(d.geweke)}, {"ess", d.ess}});
  }
  summary["diagnostics"] = diag;
  summary["acceptance_rate"] = fit.variances.chain.acceptance_rate;
  summary["adaptive_acceptance_rate"] = fit.variances.chain.adaptive_acceptance_rate;
  json curves = json::array();
  for (const CurveSummary& c : fit.curves) {
    json regions = json::array();
    for (const Interval& r : c.significant) regions.push_back({r.lower, r.upper});
    curves.push_back({{"covariate", c.covariate},
                      {"p_global", c.simbas.global},
                      {"joint_multiplier", c.bands.joint_multiplier},
                      {"significant_regions", regions}});
  }
  summary["curves"] = curves;
  json intercepts = json::object();
  for (std::size_t i = 0; i < model.data().num_patients(); ++i) {
    intercepts[model.data().patient_ids()[i]] = fit.patient_intercepts(static_cast<Eigen::Index>(i));
  }
  summary["patient_intercepts"] = intercepts;
  summary["warnings"] = fit.warnings;
  summary["nonconvergence_warning"] = fit.nonconvergence_warning();
  summary["runtime_seconds"] = fit.runtime_seconds;
  write_json(dir / "fit_summary.json", summary);

  // Enough to rebuild the model exactly for prediction.
  RunConfig frozen = config;
  frozen.phi = model.phi();
  frozen.phi_grid.reset();
  frozen.data_path = "training_data.csv";
  frozen.output = dir;
  frozen.schema.covariates = data.covariate_names();
  {
    auto out = open_output(dir / "config.json");
    out << frozen.to_json() << '\n';
  }
  ColumnSchema schema = config.schema;
  schema.covariates = data.covariate_names();
  write_dataset(data, dir / "training_data.csv", schema);

  json bases = json::array();
  for (const SplineBasis& b : model.bases()) {
    bases.push_back({{"covariate", model.data().covariate_names()[b.covariate_index]},
                     {"kind", b.kind == BasisKind::linear ? "linear" : "spline"},
                     {"degree", b.degree},
                     {"size", b.size()},
                     {"knots", std::vector<double>(b.knots.data(), b.knots.data() + b.knots.size())},
                     {"lower", b.lower},
                     {"upper", b.upper}});
  }
  json model_json = {{"metadata", metadata_json(config)}, {"phi", model.phi()}, {"spatial", model.spatial()}, {"bases", bases}};
  if (fit.prepared.standardization) {
    const auto& rec = *fit.prepared.standardization;
    model_json["standardization"] = {{"mean", std::vector<double>(rec.mean.data(), rec.mean.data() + rec.mean.size())},
                                     {"sd", std::vector<double>(rec.sd.data(), rec.sd.data() + rec.sd.size())}};
  }
  write_json(dir / "model.json", model_json);
}

struct TestRows {
  PredictionRequest request;
  std::optional<Eigen::VectorXd> outcomes;
};

TestRows load_test_rows(const fs::path& path, const ColumnSchema& schema, const std::vector<std::string>& covariates) {
  const csv::Table table = csv::read(path);
  const std::size_t id_col = table.column(schema.patient_id);
  const std::size_t sx_col = table.column(schema.sx);
  const std::size_t sy_col = table.column(schema.sy);
  std::vector<std::size_t> cov_cols;
  for (const auto& name : covariates) cov_cols.push_back(table.column(name));
  const bool has_y = table.has_column(schema.outcome);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw DataError("test file '" + path.string() + "' has no rows");

  TestRows out;
  out.request.covariates.resize(n, static_cast<Eigen::Index>(covariates.size()));
  out.request.centroids.resize(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& cells = table.rows[static_cast<std::size_t>(r)];
    const auto row = static_cast<std::size_t>(r);
    out.request.patient_ids.push_back(cells[id_col]);
    out.request.centroids(r, 0) = csv::to_double(cells[sx_col], row, schema.sx);
    out.request.centroids(r, 1) = csv::to_double(cells[sy_col], row, schema.sy);
    for (std::size_t c = 0; c < covariates.size(); ++c) {
      out.request.covariates(r, static_cast<Eigen::Index>(c)) = csv::to_double(cells[cov_cols[c]], row, covariates[c]);
    }
    if (has_y) y(r) = csv::to_double(cells[table.column(schema.outcome)], row, schema.outcome);
  }
  if (has_y) out.outcomes = y;
  return out;
}

Eigen::MatrixXd read_variance_draws(const fs::path& path) {
  const csv::Table table = csv::read(path);
  const char* names[] = {"sigma2_z", "sigma2_x", "tau2", "sigma2_y"};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(table.rows.size()), 4);
  for (int c = 0; c < 4; ++c) {
    const std::size_t col = table.column(names[c]);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), c) = csv::to_double(table.rows[r][col], r, names[c]);
    }
  }
  return out;
}

}  // namespace

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (!o.data.empty()) c.data_path = o.data;
  if (!o.out.empty()) c.output = o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.alpha) c.alpha = *o.alpha;
  if (static_cast<int>(!o.grid.empty()) + static_cast<int>(o.phi.has_value()) + static_cast<int>(!o.phi_file.empty()) > 1) {
    throw ConfigError("give only one of --grid, --phi and --phi-file");
  }
  if (!o.grid.empty()) {
    c.phi_grid = o.grid;
    c.phi.reset();
  }
  if (o.phi) {
    c.phi = *o.phi;
    c.phi_grid.reset();
  }
  if (!o.phi_file.empty()) {
    const json j = read_json(o.phi_file);
    if (!j.contains("phi")) throw ConfigError("'" + o.phi_file + "' has no phi entry");
    c.phi = j.at("phi").get<double>();
    c.phi_grid.reset();
  }
  if (o.scenario) c.scenario = *o.scenario;
  if (o.replicates) c.replicates = *o.replicates;
  c.validate();
  return c;
}

void cmd_select_phi(const RunConfig& config) {
  const HmiDataset data = load_training(config);
  ensure_directory(config.output);
  const PhiSelectionReport report = run_selection(config, data, config.output);
  std::cout << "selected phi = " << report.best_phi << " (" << report.phi.size() << " candidates, score "
            << report.score[report.best_index] << ")\n";
}

void cmd_fit(RunConfig config) {
  const HmiDataset data = load_training(config);
  ensure_directory(config.output);
  if (!config.phi) {
    if (!config.phi_grid) throw ConfigError("fit needs a spatial decay: give --phi, --phi-file or --grid");
    const PhiSelectionReport report = run_selection(config, data, config.output);
    config.phi = report.best_phi;
    std::cout << "selected phi = " << report.best_phi << '\n';
  }
  const FitResult fit = fit_model(data, config.fit_options(data.covariate_names()));
  write_fit_artifacts(config, data, fit, config.output);

  std::cout << "fit complete: " << fit.posterior.size() << " draws, acceptance "
            << fit.variances.chain.acceptance_rate << ", WAIC " << fit.waic.waic << '\n';
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
}

void cmd_predict(const fs::path& fit_dir, const fs::path& test_csv, const fs::path& out_dir, std::optional<double> alpha) {
  if (!fs::exists(fit_dir / "config.json")) throw IoError("missing fit artifact '" + (fit_dir / "config.json").string() + "'");
  RunConfig config = RunConfig::load(fit_dir / "config.json");
  if (alpha) config.alpha = *alpha;
  config.validate();
  config.data_path = fit_dir / "training_data.csv";
  const HmiDataset train = load_training(config);
  const FitOptions fo = config.fit_options(train.covariate_names());
  const PreparedModel prepared = prepare_model(train, fo);
  const Eigen::MatrixXd variances = read_variance_draws(fit_dir / "draws_variances.csv");
  const PosteriorDraws draws = recover_posterior(variances, *prepared.model, derive_seed(fo.chain.seed, "fit", "beta"),
                                                 fo.beta_sampling, fo.beta_thin);

  TestRows test = load_test_rows(test_csv, config.schema, train.covariate_names());
  if (prepared.standardization) test.request.covariates = prepared.standardization->apply(test.request.covariates);
  const Eigen::MatrixXd ystar = predict(draws, *prepared.model, test.request, derive_seed(config.seed, "prediction", "cli"));
  const PredictiveSummary summary = summarize_predictions(ystar, config.alpha);

  ensure_directory(out_dir);
  const std::string meta = metadata_line(config);
  {
    auto out = open_output(out_dir / "predictions.csv");
    out << meta << '\n';
    csv::write_row(out, {"draw", "test_index", "y_star"});
    for (Eigen::Index m = 0; m < ystar.rows(); ++m) {
      for (Eigen::Index k = 0; k < ystar.cols(); ++k) {
        csv::write_row(out, {std::to_string(m), std::to_string(k), csv::format(ystar(m, k))});
      }
    }
  }
  {
    auto out = open_output(out_dir / "prediction_summary.csv");
    out << meta << '\n';
    csv::write_row(out, {"test_index", "patient_id", "mean", "lo", "hi"});
    for (Eigen::Index k = 0; k < ystar.cols(); ++k) {
      csv::write_row(out, {std::to_string(k), csv::escape(test.request.patient_ids[static_cast<std::size_t>(k)]),
                           csv::format(summary.mean(k)), csv::format(summary.lower(k)), csv::format(summary.upper(k))});
    }
  }
  std::cout << "predicted " << ystar.cols() << " rows from " << ystar.rows() << " draws\n";
  if (test.outcomes) {
    const double e = mspe(*test.outcomes, ystar);
    const double cov = predictive_coverage(*test.outcomes, ystar, config.alpha);
    write_json(out_dir / "prediction_metrics.json",
               {{"metadata", metadata_json(config)}, {"mspe", e}, {"coverage", cov}, {"alpha", config.alpha}});
    std::cout << "MSPE " << e << ", coverage " << cov << '\n';
  }
}

void cmd_simulate(const RunConfig& config) {
  ensure_directory(config.output);
  const ScenarioSpec spec = ScenarioSpec::for_scenario(config.scenario);
  const std::vector<BenchmarkRow> rows =
      run_benchmark(spec, static_cast<std::size_t>(config.replicates), config.benchmark_options(), config.seed);
  {
    auto out = open_output(config.output / "benchmark.csv");
    out << metadata_line(config) << " scenario=" << spec.scenario << " theta=" << spec.theta << " phi_true=" << spec.phi
        << " tau2=" << spec.tau2 << " sigma2_y=" << spec.sigma2_y << '\n';
    write_benchmark_csv(out, rows);
  }

  auto median = [](std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  json models = json::object();
  for (const char* name : {"MoSAIC", "NonSpatial"}) {
    std::vector<double> waic, mse, mspe_v, cov, secs;
    std::size_t failed = 0;
    for (const auto& r : rows) {
      if (r.model != name) continue;
      if (r.failed) {
        ++failed;
        continue;
      }
      waic.push_back(r.waic);
      mse.push_back(r.mse);
      mspe_v.push_back(r.mspe);
      cov.push_back(r.coverage);
      secs.push_back(r.seconds);
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
    };
    models[name] = {{"median_waic", number(median(waic))}, {"median_mse", number(median(mse))},
                    {"median_mspe", number(median(mspe_v))}, {"mean_coverage", number(mean(cov))},
                    {"mean_seconds", number(mean(secs))}, {"failed", failed}};
  }
  std::size_t waic_wins = 0;
  for (std::size_t r = 0; r + 1 < rows.size(); r += 2) {
    if (!rows[r].failed && !rows[r + 1].failed && rows[r].waic < rows[r + 1].waic) ++waic_wins;
  }
  write_json(config.output / "benchmark_summary.json",
             {{"metadata", metadata_json(config)},
              {"scenario",
               {{"scenario", spec.scenario}, {"patients", spec.patients}, {"observations", spec.observations},
                {"test_size", spec.test_size}, {"sigma2_y", spec.sigma2_y}, {"tau2", spec.tau2}, {"phi_true", spec.phi},
                {"theta", spec.theta}, {"nonlinear", spec.nonlinear}, {"x_lower", spec.x_lower}, {"x_upper", spec.x_upper}}},
              {"replicates", config.replicates},
              {"models", models},
              {"spatial_waic_wins", waic_wins}});
  std::cout << "wrote " << rows.size() << " benchmark rows to " << (config.output / "benchmark.csv").string() << '\n';
}

void cmd_summarize(const fs::path& fit_dir, std::optional<double> alpha) {
  const json s = read_json(fit_dir / "fit_summary.json");
  if (!fs::exists(fit_dir / "curves.csv")) throw IoError("missing fit artifact '" + (fit_dir / "curves.csv").string() + "'");
  const csv::Table curves = csv::read(fit_dir / "curves.csv");
  double level = 0.05;
  if (fs::exists(fit_dir / "config.json")) level = RunConfig::load(fit_dir / "config.json").alpha;
  if (alpha) level = *alpha;

  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "fit: " << fit_dir.string() << "  (config " << s["metadata"]["config_hash"].get<std::string>() << ", seed "
      << s["metadata"]["seed"].get<std::uint64_t>() << ")\n";
  out << "phi " << s["phi"].get<double>() << ", " << s["n_observations"].get<long>() << " observations, "
      << s["n_patients"].get<long>() << " patients, " << s["n_draws"].get<long>() << " draws\n\n";
  out << "variance explained (%)\n";
  for (const char* k : {"covariates", "patients", "spatial", "noise"}) {
    out << "  " << std::left << std::setw(12) << k << std::right << std::setw(10) << s["pve"][k].get<double>() << '\n';
  }
  auto num = [](const json& v) { return v.is_null() ? std::string("nan") : std::to_string(v.get<double>()); };
  out << "\nWAIC " << num(s["waic"]["waic"]) << "   DIC " << num(s["dic"]["dic"]) << "   p_D " << num(s["dic"]["p_d"]) << '\n';
  out << "\nparameter        mean          sd      geweke         ess\n";
  for (const auto& d : s["diagnostics"]) {
    out << "  " << std::left << std::setw(10) << d["parameter"].get<std::string>() << std::right << std::setw(12)
        << d["mean"].get<double>() << std::setw(12) << d["sd"].get<double>() << std::setw(12) << num(d["geweke"])
        << std::setw(12) << d["ess"].get<double>() << '\n';
  }

  // Significant regions straight from curves.csv.
  const std::size_t c_cov = curves.column("covariate");
  const std::size_t c_x = curves.column("X");
  const std::size_t c_p = curves.column("p_simbas");
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_cov;
  for (std::size_t r = 0; r < curves.rows.size(); ++r) {
    const std::string& name = curves.rows[r][c_cov];
    if (!by_cov.count(name)) order.push_back(name);
    by_cov[name].first.push_back(csv::to_double(curves.rows[r][c_x], r, "X"));
    by_cov[name].second.push_back(csv::to_double(curves.rows[r][c_p], r, "p_simbas"));
  }
  out << "\ncovariate effects (alpha = " << level << ")\n";
  for (const auto& name : order) {
    const auto& [xs, ps] = by_cov[name];
    const Eigen::VectorXd x = Eigen::VectorXd::Map(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::VectorXd p = Eigen::VectorXd::Map(ps.data(), static_cast<Eigen::Index>(ps.size()));
    const auto regions = significant_regions(x, p, level);
    out << "  " << name << ": P_global " << p.minCoeff();
    if (regions.empty()) {
      out << ", no significant region\n";
    } else {
      out << ", significant on";
      for (const auto& r : regions) out << " [" << r.lower << ", " << r.upper << "]";
      out << '\n';
    }
  }
  if (!s["warnings"].empty()) {
    out << "\nwarnings\n";
    for (const auto& w : s["warnings"]) out << "  " << w.get<std::string>() << '\n';
  }
  std::cout << out.str();
}

}  // namespace mosaic::cli
