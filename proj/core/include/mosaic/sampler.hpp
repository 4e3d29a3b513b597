#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/kernel.hpp"
#include "mosaic/model.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

struct InverseGamma {
  double shape = 0.01;
  double rate = 0.01;
};

/// log of b^a / Gamma(a) x^{-a-1} exp(-b / x).
double inverse_gamma_log_density(double x, double shape, double rate);

struct PriorSpec {
  InverseGamma sigma2_z;
  InverseGamma sigma2_x;
  InverseGamma tau2;
  InverseGamma sigma2_y;

  void validate() const;
};

enum class Component { sigma2_z = 0, sigma2_x = 1, tau2 = 2, sigma2_y = 3 };

const char* component_name(Component c);
double get(const VarianceState& s, Component c);
void set(VarianceState& s, Component c, double value);

/// Which variance components the chain samples; the rest stay at `fixed`.
///
/// sigma2_x is only identified when some covariate has a spline basis, and
/// tau2 only for the spatial model, so both drop out otherwise.
struct ParameterLayout {
  std::vector<Component> active;
  VarianceState fixed;

  static ParameterLayout for_model(const MosaicModel& model);

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(active.size()); }
  VarianceState to_state(const Eigen::VectorXd& log_values) const;
  Eigen::VectorXd to_log(const VarianceState& state) const;
};

struct ChainConfig {
  long total = 60000;
  long burn_in = 45000;
  long adapt = 30000;
  long thin = 1;
  std::uint64_t seed = 1;
  std::optional<VarianceState> initial;
  /// Initial proposal factor S = initial_scale * I.
  double initial_scale = 0.1;
  double target_acceptance = 0.235;

  void validate() const;
  long retained() const { return (total - burn_in + thin - 1) / thin; }
};

/// Robust adaptive Metropolis state: lower-triangular proposal factor S.
struct RamState {
  Eigen::MatrixXd s;
  long iteration = 0;
  double target = 0.235;
  long n_adapt = 0;
  long skipped_updates = 0;
};

struct RamStep {
  bool accepted = false;
  double acceptance_probability = 0.0;
};

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

/// S S' <- S S' + coefficient * (S u)(S u)' / |u|^2 as an in-place Cholesky
/// update (coefficient > 0) or downdate (< 0). Returns false and leaves S
/// untouched when the downdate would lose positive definiteness.
bool ram_update_factor(Eigen::MatrixXd& s, const Eigen::VectorXd& u, double coefficient);

/// One Metropolis step with proposal x + S u. Adapts S while
/// iteration <= n_adapt. `log_density` caches the target at `x`.
RamStep ram_step(Eigen::VectorXd& x, double& log_density, RamState& ram, const LogDensity& target, Rng& rng);

struct ChainResult {
  Eigen::MatrixXd draws;  // retained iterations x dimension
  Eigen::VectorXd log_density;
  std::vector<char> accepted;        // retained iterations
  std::vector<char> accepted_trace;  // every iteration
  Eigen::MatrixXd final_s;
  double acceptance_rate = 0.0;
  double adaptive_acceptance_rate = 0.0;
  long skipped_updates = 0;
  std::vector<std::string> warnings;
};

/// Runs `config.total` RAM iterations from `initial` and keeps every
/// `thin`-th draw after burn-in. Deterministic given `config.seed`.
ChainResult run_chain(const ChainConfig& config, const LogDensity& target, const Eigen::VectorXd& initial);

/// Log posterior of log-variances: marginal likelihood + inverse-gamma priors
/// + log-scale Jacobian. Returns -inf when the state overflows or Sigma_y
/// cannot be factorized.
class VariancePosterior {
 public:
  VariancePosterior(const MosaicModel& model, PriorSpec priors, ParameterLayout layout);

  double operator()(const Eigen::VectorXd& log_values) const;
  const ParameterLayout& layout() const { return layout_; }

 private:
  const MosaicModel* model_;
  PriorSpec priors_;
  ParameterLayout layout_;
};

/// Retained variance draws, one row per draw, columns ordered as Component.
struct VarianceDraws {
  Eigen::MatrixXd values;
  Eigen::VectorXd log_posterior;
  std::vector<char> accepted;
  ParameterLayout layout;
  ChainResult chain;

  Eigen::Index size() const { return values.rows(); }
  VarianceState state(Eigen::Index m) const;
};

/// Scale-aware start: sigma2_y = var(y)/2, others var(y)/6.
VarianceState default_initial_state(const Eigen::VectorXd& y);

VarianceDraws sample_variances(const MosaicModel& model, const PriorSpec& priors, const ChainConfig& config);

}  // namespace mosaic
