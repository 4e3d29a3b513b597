#include "mosaic/sampler.hpp"

#include <cmath>
#include <limits>

#include "mosaic/errors.hpp"

namespace mosaic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double inverse_gamma_log_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

void PriorSpec::validate() const {
  for (const InverseGamma* ig : {&sigma2_z, &sigma2_x, &tau2, &sigma2_y}) {
    if (!(ig->shape > 0.0 && ig->rate > 0.0)) {
      throw ConfigError("inverse-gamma shape and rate must be positive");
    }
  }
}

const char* component_name(Component c) {
  switch (c) {
    case Component::sigma2_z: return "sigma2_z";
    case Component::sigma2_x: return "sigma2_x";
    case Component::tau2: return "tau2";
    case Component::sigma2_y: return "sigma2_y";
  }
  return "?";
}

double get(const VarianceState& s, Component c) {
  switch (c) {
    case Component::sigma2_z: return s.sigma2_z;
    case Component::sigma2_x: return s.sigma2_x;
    case Component::tau2: return s.tau2;
    case Component::sigma2_y: return s.sigma2_y;
  }
  return 0.0;
}

void set(VarianceState& s, Component c, double value) {
  switch (c) {
    case Component::sigma2_z: s.sigma2_z = value; break;
    case Component::sigma2_x: s.sigma2_x = value; break;
    case Component::tau2: s.tau2 = value; break;
    case Component::sigma2_y: s.sigma2_y = value; break;
  }
}

ParameterLayout ParameterLayout::for_model(const MosaicModel& model) {
  ParameterLayout layout;
  layout.active.push_back(Component::sigma2_z);
  if (model.has_spline()) layout.active.push_back(Component::sigma2_x);
  if (model.spatial()) layout.active.push_back(Component::tau2);
  layout.active.push_back(Component::sigma2_y);
  layout.fixed = VarianceState{1.0, 1.0, model.spatial() ? 1.0 : 0.0, 1.0};
  return layout;
}

VarianceState ParameterLayout::to_state(const Eigen::VectorXd& log_values) const {
  VarianceState s = fixed;
  for (std::size_t k = 0; k < active.size(); ++k) {
    set(s, active[k], std::exp(log_values(static_cast<Eigen::Index>(k))));
  }
  return s;
}

Eigen::VectorXd ParameterLayout::to_log(const VarianceState& state) const {
  Eigen::VectorXd eta(dimension());
  for (std::size_t k = 0; k < active.size(); ++k) {
    eta(static_cast<Eigen::Index>(k)) = std::log(get(state, active[k]));
  }
  return eta;
}

void ChainConfig::validate() const {
  if (total <= 0) throw ConfigError("chain length must be positive");
  if (!(burn_in >= 0 && burn_in < total)) throw ConfigError("burn-in must satisfy 0 <= burn_in < total");
  if (!(adapt >= 0 && adapt <= total)) throw ConfigError("adaptation length must satisfy 0 <= adapt <= total");
  if (thin < 1) throw ConfigError("thinning must be at least 1");
  if (!(initial_scale > 0.0)) throw ConfigError("initial proposal scale must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) throw ConfigError("target acceptance must be in (0, 1)");
}

bool ram_update_factor(Eigen::MatrixXd& s, const Eigen::VectorXd& u, double coefficient) {
  const double norm2 = u.squaredNorm();
  if (coefficient == 0.0 || !(norm2 > 0.0)) return true;
  const Eigen::Index d = s.rows();
  Eigen::VectorXd x = s.template triangularView<Eigen::Lower>() * u;
  x *= std::sqrt(std::abs(coefficient) / norm2);
  const double sign = coefficient > 0.0 ? 1.0 : -1.0;

  Eigen::MatrixXd l = s;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double lkk = l(k, k);
    const double r2 = lkk * lkk + sign * x(k) * x(k);
    if (!(r2 > 0.0) || !std::isfinite(r2)) return false;
    const double r = std::sqrt(r2);
    const double c = r / lkk;
    const double sn = x(k) / lkk;
    l(k, k) = r;
    for (Eigen::Index i = k + 1; i < d; ++i) {
      l(i, k) = (l(i, k) + sign * sn * x(i)) / c;
      x(i) = c * x(i) - sn * l(i, k);
    }
  }
  if (!l.allFinite()) return false;
  s = l;
  return true;
}

RamStep ram_step(Eigen::VectorXd& x, double& log_density, RamState& ram, const LogDensity& target, Rng& rng) {
  ++ram.iteration;
  const Eigen::VectorXd u = standard_normal(rng, x.size());
  const Eigen::VectorXd proposal = x + ram.s.triangularView<Eigen::Lower>() * u;
  const double proposal_density = target(proposal);

  RamStep step;
  const double diff = proposal_density - log_density;
  if (std::isnan(proposal_density) || proposal_density == kNegInf) {
    step.acceptance_probability = 0.0;
  } else if (log_density == kNegInf) {
    step.acceptance_probability = 1.0;
  } else {
    step.acceptance_probability = diff >= 0.0 ? 1.0 : std::exp(diff);
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double draw = uniform(rng);
  if (step.acceptance_probability > 0.0 &&
      (step.acceptance_probability >= 1.0 || std::log(draw) < diff)) {
    x = proposal;
    log_density = proposal_density;
    step.accepted = true;
  }

  if (ram.iteration <= ram.n_adapt) {
    const double coefficient = std::pow(static_cast<double>(ram.iteration), -2.0 / 3.0) *
                               (step.acceptance_probability - ram.target);
    if (!ram_update_factor(ram.s, u, coefficient)) ++ram.skipped_updates;
  }
  return step;
}

ChainResult run_chain(const ChainConfig& config, const LogDensity& target, const Eigen::VectorXd& initial) {
  config.validate();
  const Eigen::Index d = initial.size();
  Rng rng = make_rng(config.seed, "sampler", "chain");

  RamState ram;
  ram.s = Eigen::MatrixXd::Identity(d, d) * config.initial_scale;
  ram.target = config.target_acceptance;
  ram.n_adapt = config.adapt;

  Eigen::VectorXd x = initial;
  double log_density = target(x);
  if (!std::isfinite(log_density)) throw NumericalError("initial state has zero posterior density");

  ChainResult result;
  const long retained = config.retained();
  result.draws.resize(retained, d);
  result.log_density.resize(retained);
  result.accepted.reserve(static_cast<std::size_t>(retained));
  result.accepted_trace.reserve(static_cast<std::size_t>(config.total));

  long accepted_total = 0;
  long accepted_adaptive = 0;
  long window_accepted = 0;
  bool warned = false;
  Eigen::Index row = 0;
  for (long it = 1; it <= config.total; ++it) {
    const RamStep step = ram_step(x, log_density, ram, target, rng);
    result.accepted_trace.push_back(step.accepted ? 1 : 0);
    accepted_total += step.accepted;
    if (it <= config.adapt) accepted_adaptive += step.accepted;

    window_accepted += step.accepted;
    if (it > 1000) window_accepted -= result.accepted_trace[static_cast<std::size_t>(it - 1001)];
    if (!warned && it >= 1000 && window_accepted < 1) {
      result.warnings.push_back("acceptance below 0.1% over 1000 consecutive iterations ending at " +
                                std::to_string(it));
      warned = true;
    }

    if (it > config.burn_in && (it - config.burn_in - 1) % config.thin == 0) {
      result.draws.row(row) = x.transpose();
      result.log_density(row) = log_density;
      result.accepted.push_back(step.accepted ? 1 : 0);
      ++row;
    }
  }
  result.final_s = ram.s;
  result.acceptance_rate = static_cast<double>(accepted_total) / static_cast<double>(config.total);
  result.adaptive_acceptance_rate =
      config.adapt > 0 ? static_cast<double>(accepted_adaptive) / static_cast<double>(config.adapt) : 0.0;
  result.skipped_updates = ram.skipped_updates;
  if (ram.skipped_updates > 0) {
    result.warnings.push_back(std::to_string(ram.skipped_updates) + " proposal-factor updates skipped");
  }
  return result;
}

VariancePosterior::VariancePosterior(const MosaicModel& model, PriorSpec priors, ParameterLayout layout)
    : model_(&model), priors_(priors), layout_(std::move(layout)) {
  priors_.validate();
}

double VariancePosterior::operator()(const Eigen::VectorXd& log_values) const {
  if (!log_values.allFinite()) return kNegInf;
  const VarianceState state = layout_.to_state(log_values);
  double log_prior = 0.0;
  for (std::size_t k = 0; k < layout_.active.size(); ++k) {
    const Component c = layout_.active[k];
    const double v = get(state, c);
    if (!(v > 0.0) || !std::isfinite(v) || !std::isfinite(1.0 / v)) return kNegInf;
    const InverseGamma& ig = c == Component::sigma2_z   ? priors_.sigma2_z
                             : c == Component::sigma2_x ? priors_.sigma2_x
                             : c == Component::tau2     ? priors_.tau2
                                                        : priors_.sigma2_y;
    log_prior += inverse_gamma_log_density(v, ig.shape, ig.rate) + log_values(static_cast<Eigen::Index>(k));
  }
  try {
    const double ll = model_->log_likelihood(state);
    if (!std::isfinite(ll)) return kNegInf;
    return ll + log_prior;
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

VarianceState VarianceDraws::state(Eigen::Index m) const {
  return VarianceState{values(m, 0), values(m, 1), values(m, 2), values(m, 3)};
}

VarianceState default_initial_state(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  double var = y.size() > 1 ? (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1) : 1.0;
  if (!(var > 0.0) || !std::isfinite(var)) var = 1.0;
  return VarianceState{var / 6.0, var / 6.0, var / 6.0, var / 2.0};
}

VarianceDraws sample_variances(const MosaicModel& model, const PriorSpec& priors, const ChainConfig& config) {
  ParameterLayout layout = ParameterLayout::for_model(model);
  const VarianceState start = config.initial.value_or(default_initial_state(model.data().outcomes()));
  if (!start.all_positive()) throw ConfigError("initial variances must be positive");
  VariancePosterior posterior(model, priors, layout);

  VarianceDraws draws;
  draws.chain = run_chain(config, std::cref(posterior), layout.to_log(start));
  draws.layout = layout;
  const Eigen::Index m = draws.chain.draws.rows();
  draws.values.resize(m, 4);
  for (Eigen::Index r = 0; r < m; ++r) {
    const VarianceState s = layout.to_state(draws.chain.draws.row(r).transpose());
    draws.values.row(r) << s.sigma2_z, s.sigma2_x, s.tau2, s.sigma2_y;
  }
  draws.log_posterior = draws.chain.log_density;
  draws.accepted = draws.chain.accepted;
  return draws;
}

}  // namespace mosaic
