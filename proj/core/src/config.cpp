#include "mosaic/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mosaic/errors.hpp"

namespace mosaic {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown configuration key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

BasisSpec read_basis(const json& j, BasisSpec spec) {
  check_keys(j, {"kind", "knots", "degree", "placement"}, "bases");
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") spec.kind = BasisKind::linear;
    else if (kind == "spline") spec.kind = BasisKind::spline;
    else throw ConfigError("basis kind must be 'linear' or 'spline'");
  }
  read(j, "knots", spec.n_knots);
  read(j, "degree", spec.degree);
  if (j.contains("placement")) {
    const std::string p = j.at("placement").get<std::string>();
    if (p == "uniform") spec.placement = KnotPlacement::uniform;
    else if (p == "quantile") spec.placement = KnotPlacement::quantile;
    else throw ConfigError("knot placement must be 'uniform' or 'quantile'");
  }
  return spec;
}

json basis_json(const BasisSpec& b) {
  return {{"kind", b.kind == BasisKind::linear ? "linear" : "spline"},
          {"knots", b.n_knots},
          {"degree", b.degree},
          {"placement", b.placement == KnotPlacement::uniform ? "uniform" : "quantile"}};
}

ChainConfig read_chain(const json& j, ChainConfig c) {
  check_keys(j, {"total", "burn_in", "adapt", "thin", "initial_scale"}, "chain");
  read(j, "total", c.total);
  read(j, "burn_in", c.burn_in);
  read(j, "adapt", c.adapt);
  read(j, "thin", c.thin);
  read(j, "initial_scale", c.initial_scale);
  return c;
}

json chain_json(const ChainConfig& c) {
  return {{"total", c.total}, {"burn_in", c.burn_in}, {"adapt", c.adapt}, {"thin", c.thin}, {"initial_scale", c.initial_scale}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"data", "bases", "standardize", "spatial", "phi", "phi_grid", "alpha", "grid_size", "seed", "output",
              "priors", "penalty_role", "linear_variance", "null_variance_factor", "chain", "beta_joint", "beta_thin",
              "draws_beta_limit", "phi_selection", "simulation"},
             "config");
  RunConfig c;
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, {"path", "patient_id", "sx", "sy", "covariates", "outcome"}, "data");
    std::string path;
    read(d, "path", path);
    c.data_path = path;
    read(d, "patient_id", c.schema.patient_id);
    read(d, "sx", c.schema.sx);
    read(d, "sy", c.schema.sy);
    read(d, "covariates", c.schema.covariates);
    read(d, "outcome", c.schema.outcome);
  }
  if (j.contains("bases")) {
    const json& b = j.at("bases");
    if (!b.is_object()) throw ConfigError("bases must be a JSON object");
    if (b.contains("default")) c.default_basis = read_basis(b.at("default"), c.default_basis);
    for (const auto& [name, spec] : b.items()) {
      if (name != "default") c.covariate_bases[name] = read_basis(spec, c.default_basis);
    }
  }
  read(j, "standardize", c.standardize);
  read(j, "spatial", c.spatial);
  if (j.contains("phi") && !j.at("phi").is_null()) c.phi = j.at("phi").get<double>();
  if (j.contains("phi_grid") && !j.at("phi_grid").is_null()) c.phi_grid = j.at("phi_grid").get<std::string>();
  read(j, "alpha", c.alpha);
  read(j, "grid_size", c.grid_size);
  read(j, "seed", c.seed);
  std::string output;
  read(j, "output", output);
  if (!output.empty()) c.output = output;
  if (j.contains("priors")) {
    const json& p = j.at("priors");
    check_keys(p, {"sigma2_z", "sigma2_x", "tau2", "sigma2_y"}, "priors");
    auto ig = [&](const char* key, InverseGamma& out) {
      if (!p.contains(key)) return;
      check_keys(p.at(key), {"shape", "rate"}, std::string("priors.") + key);
      read(p.at(key), "shape", out.shape);
      read(p.at(key), "rate", out.rate);
    };
    ig("sigma2_z", c.priors.sigma2_z);
    ig("sigma2_x", c.priors.sigma2_x);
    ig("tau2", c.priors.tau2);
    ig("sigma2_y", c.priors.sigma2_y);
  }
  if (j.contains("penalty_role")) {
    const std::string role = j.at("penalty_role").get<std::string>();
    if (role == "precision") c.prior_options.penalty_role = PenaltyRole::precision;
    else if (role == "covariance") c.prior_options.penalty_role = PenaltyRole::covariance;
    else throw ConfigError("penalty_role must be 'precision' or 'covariance'");
  }
  read(j, "linear_variance", c.prior_options.linear_variance);
  read(j, "null_variance_factor", c.prior_options.null_variance_factor);
  if (j.contains("chain")) c.chain = read_chain(j.at("chain"), c.chain);
  read(j, "beta_joint", c.beta_joint);
  read(j, "beta_thin", c.beta_thin);
  read(j, "draws_beta_limit", c.draws_beta_limit);
  if (j.contains("phi_selection")) {
    const json& p = j.at("phi_selection");
    check_keys(p, {"test_fraction", "criterion", "patient_effects", "chain"}, "phi_selection");
    read(p, "test_fraction", c.test_fraction);
    if (p.contains("criterion")) {
      const std::string crit = p.at("criterion").get<std::string>();
      if (crit == "rmse") c.criterion = PhiCriterion::rmse;
      else if (crit == "log_predictive_score") c.criterion = PhiCriterion::log_predictive_score;
      else throw ConfigError("phi criterion must be 'rmse' or 'log_predictive_score'");
    }
    read(p, "patient_effects", c.patient_effects);
    if (p.contains("chain")) c.phi_chain = read_chain(p.at("chain"), c.phi_chain);
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    check_keys(s, {"scenario", "replicates", "oracle_phi", "phi_grid", "chain"}, "simulation");
    read(s, "scenario", c.scenario);
    read(s, "replicates", c.replicates);
    read(s, "oracle_phi", c.oracle_phi);
    read(s, "phi_grid", c.simulation_phi_grid);
    if (s.contains("chain")) c.simulation_chain = read_chain(s.at("chain"), c.simulation_chain);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["data"] = {{"path", data_path.string()},
               {"patient_id", schema.patient_id},
               {"sx", schema.sx},
               {"sy", schema.sy},
               {"covariates", schema.covariates},
               {"outcome", schema.outcome}};
  json bases = {{"default", basis_json(default_basis)}};
  for (const auto& [name, spec] : covariate_bases) bases[name] = basis_json(spec);
  j["bases"] = bases;
  j["standardize"] = standardize;
  j["spatial"] = spatial;
  j["phi"] = phi ? json(*phi) : json(nullptr);
  j["phi_grid"] = phi_grid ? json(*phi_grid) : json(nullptr);
  j["alpha"] = alpha;
  j["grid_size"] = grid_size;
  j["seed"] = seed;
  j["output"] = output.string();
  auto ig = [](const InverseGamma& p) { return json{{"shape", p.shape}, {"rate", p.rate}}; };
  j["priors"] = {{"sigma2_z", ig(priors.sigma2_z)},
                 {"sigma2_x", ig(priors.sigma2_x)},
                 {"tau2", ig(priors.tau2)},
                 {"sigma2_y", ig(priors.sigma2_y)}};
  j["penalty_role"] = prior_options.penalty_role == PenaltyRole::precision ? "precision" : "covariance";
  j["linear_variance"] = prior_options.linear_variance;
  j["null_variance_factor"] = prior_options.null_variance_factor;
  j["chain"] = chain_json(chain);
  j["beta_joint"] = beta_joint;
  j["beta_thin"] = beta_thin;
  j["draws_beta_limit"] = draws_beta_limit;
  j["phi_selection"] = {{"test_fraction", test_fraction},
                        {"criterion", criterion == PhiCriterion::rmse ? "rmse" : "log_predictive_score"},
                        {"patient_effects", patient_effects},
                        {"chain", chain_json(phi_chain)}};
  j["simulation"] = {{"scenario", scenario},
                     {"replicates", replicates},
                     {"oracle_phi", oracle_phi},
                     {"phi_grid", simulation_phi_grid},
                     {"chain", chain_json(simulation_chain)}};
  return j.dump(2);
}

std::string RunConfig::hash() const {
  json j = json::parse(to_json());
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  if (phi && phi_grid) throw ConfigError("give either a fixed phi or a phi grid, not both");
  if (phi && !(*phi >= 0.0)) throw ConfigError("phi must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (beta_thin < 1) throw ConfigError("beta_thin must be at least 1");
  if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  priors.validate();
  chain.validate();
  phi_chain.validate();
  simulation_chain.validate();
  if (phi_grid) phi_grid_spec().validate();
}

std::vector<BasisSpec> RunConfig::basis_specs(const std::vector<std::string>& covariates) const {
  for (const auto& [name, spec] : covariate_bases) {
    if (std::find(covariates.begin(), covariates.end(), name) == covariates.end()) {
      throw ConfigError("basis given for unknown covariate '" + name + "'");
    }
  }
  std::vector<BasisSpec> out;
  for (const auto& name : covariates) {
    auto it = covariate_bases.find(name);
    out.push_back(it == covariate_bases.end() ? default_basis : it->second);
  }
  return out;
}

FitOptions RunConfig::fit_options(const std::vector<std::string>& covariates) const {
  FitOptions o;
  o.bases = basis_specs(covariates);
  o.standardize = standardize;
  o.phi = phi.value_or(0.0);
  o.spatial = spatial;
  o.priors = priors;
  o.prior_options = prior_options;
  o.chain = chain;
  o.chain.seed = derive_seed(seed, "fit", "chain");
  o.alpha = alpha;
  o.beta_sampling = beta_joint ? BetaSampling::joint : BetaSampling::block_independent;
  o.beta_thin = beta_thin;
  o.grid_size = grid_size;
  return o;
}

PhiGrid RunConfig::phi_grid_spec() const {
  PhiGrid g;
  g.values = parse_grid(phi_grid.value_or("0:15:0.5"));
  g.test_fraction = test_fraction;
  g.criterion = criterion;
  g.seed = derive_seed(seed, "phi_selection", "grid");
  return g;
}

PhiSelectionOptions RunConfig::phi_selection_options() const {
  PhiSelectionOptions o;
  o.chain = phi_chain;
  o.tau2_prior = priors.tau2;
  o.sigma2_y_prior = priors.sigma2_y;
  o.patient_effects = patient_effects;
  return o;
}

BenchmarkOptions RunConfig::benchmark_options() const {
  BenchmarkOptions o;
  o.chain = simulation_chain;
  o.oracle_phi = oracle_phi;
  o.phi_grid = parse_grid(simulation_phi_grid);
  o.phi_selection = phi_selection_options();
  o.basis = default_basis;
  o.alpha = alpha;
  o.beta_sampling = beta_joint ? BetaSampling::joint : BetaSampling::block_independent;
  o.grid_size = grid_size;
  return o;
}

}  // namespace mosaic
