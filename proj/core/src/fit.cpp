#include "mosaic/fit.hpp"

#include <chrono>
#include <cmath>

#include "mosaic/diagnostics.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

PreparedModel prepare_model(const HmiDataset& data, const FitOptions& options) {
  if (data.num_covariates() == 0) throw ConfigError("the model needs at least one covariate");
  std::vector<BasisSpec> specs = options.bases;
  if (specs.empty()) specs.assign(data.num_covariates(), BasisSpec{BasisKind::spline});
  if (specs.size() != data.num_covariates()) throw ConfigError("one basis spec per covariate is required");

  PreparedModel out;
  HmiDataset fitted = data;
  if (options.standardize) {
    StandardizedDataset z = standardize_covariates(data);
    fitted = std::move(z.data);
    out.standardization = std::move(z.record);
  }
  std::vector<SplineBasis> bases;
  for (std::size_t c = 0; c < specs.size(); ++c) bases.push_back(build_basis(fitted, c, specs[c]));
  out.model = std::make_shared<const MosaicModel>(std::move(fitted), std::move(bases), options.phi,
                                                  ModelOptions{options.spatial, options.prior_options});
  return out;
}

std::vector<Interval> significant_regions(const Eigen::VectorXd& x, const Eigen::VectorXd& probability,
                                          double alpha) {
  std::vector<Interval> out;
  Eigen::Index start = -1;
  for (Eigen::Index g = 0; g <= x.size(); ++g) {
    const bool hit = g < x.size() && probability(g) <= alpha;
    if (hit && start < 0) start = g;
    if (!hit && start >= 0) {
      out.push_back({x(start), x(g - 1)});
      start = -1;
    }
  }
  return out;
}

bool FitResult::nonconvergence_warning() const {
  for (const auto& d : diagnostics) {
    if (std::abs(d.geweke) > 1.96) return true;
  }
  return false;
}

std::vector<CurveSummary> summarize_curves(const PosteriorDraws& draws, const PreparedModel& prepared, double alpha,
                                           Eigen::Index grid_size) {
  const MosaicModel& model = *prepared.model;
  std::vector<CurveSummary> out;
  for (std::size_t l = 0; l < model.bases().size(); ++l) {
    const SplineBasis& basis = model.bases()[l];
    CurveSummary c;
    c.covariate = model.data().covariate_names()[basis.covariate_index];
    c.basis_index = l;
    c.grid = curve_grid(basis, grid_size);
    c.x = c.grid;
    if (prepared.standardization) {
      for (Eigen::Index g = 0; g < c.x.size(); ++g) c.x(g) = prepared.standardization->invert(c.grid(g), basis.covariate_index);
    }
    c.bands = joint_credible_band(evaluate_global_curve(draws, model, l, c.grid), alpha);
    c.simbas = simbas(c.bands);
    c.significant = significant_regions(c.x, c.simbas.probability, alpha);
    out.push_back(std::move(c));
  }
  return out;
}

FitResult fit_model(const HmiDataset& data, const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  FitResult out;
  out.prepared = prepare_model(data, options);
  const MosaicModel& model = *out.prepared.model;

  out.variances = sample_variances(model, options.priors, options.chain);
  out.warnings = out.variances.chain.warnings;
  out.posterior = recover_posterior(out.variances.values, model, derive_seed(options.chain.seed, "fit", "beta"),
                                    options.beta_sampling, options.beta_thin);
  out.curves = summarize_curves(out.posterior, out.prepared, options.alpha, options.grid_size);
  out.pve = pve(out.posterior, model);

  const Eigen::MatrixXd fitted = out.posterior.fitted(model);
  const Eigen::VectorXd s2y = out.posterior.variances.col(static_cast<Eigen::Index>(Component::sigma2_y));
  out.waic = waic(pointwise_log_likelihood(model.data().outcomes(), fitted, s2y));
  out.dic = dic(model.data().outcomes(), fitted, s2y);
  if (out.dic.p_d < 0.0) out.warnings.push_back("DIC effective number of parameters is negative");

  for (Component c : out.variances.layout.active) {
    const Eigen::VectorXd chain = out.variances.values.col(static_cast<Eigen::Index>(c));
    ParameterDiagnostics d;
    d.name = component_name(c);
    d.mean = chain.mean();
    d.sd = chain.size() > 1 ? std::sqrt((chain.array() - d.mean).square().sum() / static_cast<double>(chain.size() - 1)) : 0.0;
    d.geweke = chain.size() >= 20 ? geweke(chain) : 0.0;
    d.ess = effective_sample_size(chain);
    if (std::abs(d.geweke) > 1.96) {
      out.warnings.push_back("Geweke |z| = " + std::to_string(std::abs(d.geweke)) + " > 1.96 for " + d.name +
                             "; the chain may not have converged");
    }
    out.diagnostics.push_back(d);
  }
  out.patient_intercepts = out.posterior.mu.colwise().mean().transpose();
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mosaic
