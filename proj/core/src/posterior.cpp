#include "mosaic/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mosaic/errors.hpp"

namespace mosaic {

namespace {

struct PriorDraw {
  BetaDraw beta;
  Eigen::VectorXd y;
};

PriorDraw draw_prior(const VarianceState& state, const MosaicModel& model, Rng& rng) {
  PriorDraw out;
  const Eigen::Index n = model.num_observations();
  out.beta.mu = std::sqrt(state.sigma2_z) * standard_normal(rng, model.num_patients());
  out.beta.theta.resize(model.num_coefficients());
  for (std::size_t l = 0; l < model.bases().size(); ++l) {
    const CoefficientPrior& prior = model.priors()[l];
    const double scale = prior.scaled_by_sigma_x ? std::sqrt(state.sigma2_x) : 1.0;
    out.beta.theta.segment(model.coefficient_offset(l), model.bases()[l].size()) =
        scale * prior.factor * standard_normal(rng, prior.factor.cols());
  }
  if (model.spatial()) {
    out.beta.psi = std::sqrt(state.tau2) * model.spectra().sqrt_multiply(standard_normal(rng, n));
  } else {
    out.beta.psi = Eigen::VectorXd::Zero(n);
  }
  const Eigen::VectorXd noise = std::sqrt(state.sigma2_y) * standard_normal(rng, n);
  out.y = out.beta.fitted(model) + noise;
  return out;
}

// Adds Cov(beta, y) r to `out`.
void add_correction(BetaDraw& out, const VarianceState& state, const MosaicModel& model, const Eigen::VectorXd& r) {
  out.mu += state.sigma2_z * (model.design().z.transpose() * r);
  for (std::size_t l = 0; l < model.bases().size(); ++l) {
    const CoefficientPrior& p = model.priors()[l];
    const double scale = p.scaled_by_sigma_x ? state.sigma2_x : 1.0;
    const Eigen::VectorXd bt_r = model.bases()[l].design.transpose() * r;
    out.theta.segment(model.coefficient_offset(l), model.bases()[l].size()) +=
        scale * (p.factor * (p.factor.transpose() * bt_r));
  }
  if (model.spatial()) out.psi += state.tau2 * model.kernel().multiply(r);
}

BetaDraw joint_draw(const VarianceState& state, const MosaicModel& model, const LowRankFactor& factor,
                    Rng& rng) {
  PriorDraw prior = draw_prior(state, model, rng);
  BetaDraw out = std::move(prior.beta);
  add_correction(out, state, model, factor.solve(model.data().outcomes() - prior.y));
  return out;
}

VarianceState checked_state(const VarianceState& state, const MosaicModel& model) {
  VarianceState s = state;
  if (!model.spatial()) s.tau2 = 0.0;
  if (!(s.sigma2_z > 0 && s.sigma2_x > 0 && s.sigma2_y > 0 && (!model.spatial() || s.tau2 > 0))) {
    throw ConfigError("beta recovery needs strictly positive variances");
  }
  return s;
}

}  // namespace

Eigen::VectorXd BetaDraw::fitted(const MosaicModel& model) const {
  Eigen::VectorXd f = model.basis_matrix() * theta;
  for (Eigen::Index r = 0; r < f.size(); ++r) {
    f(r) += mu(static_cast<Eigen::Index>(model.design().patient_of[static_cast<std::size_t>(r)]));
  }
  f += psi;
  return f;
}

BetaDraw beta_posterior_mean(const VarianceState& state, const MosaicModel& model) {
  const VarianceState s = checked_state(state, model);
  const LowRankFactor factor = model.factorize(s);
  BetaDraw out{Eigen::VectorXd::Zero(model.num_patients()), Eigen::VectorXd::Zero(model.num_coefficients()),
               Eigen::VectorXd::Zero(model.num_observations())};
  add_correction(out, s, model, factor.solve(model.data().outcomes()));
  return out;
}

BetaDraw recover_beta(const VarianceState& state, const MosaicModel& model, Rng& rng, BetaSampling mode) {
  const VarianceState s = checked_state(state, model);
  const LowRankFactor factor = model.factorize(s);
  if (mode == BetaSampling::joint) return joint_draw(s, model, factor, rng);

  BetaDraw out;
  out.mu = joint_draw(s, model, factor, rng).mu;
  out.theta = joint_draw(s, model, factor, rng).theta;
  out.psi = joint_draw(s, model, factor, rng).psi;
  return out;
}

void recenter(BetaDraw& beta, const MosaicModel& model) {
  if (!model.spatial()) return;
  const HmiDataset& data = model.data();
  for (std::size_t i = 0; i < data.num_patients(); ++i) {
    const auto o = static_cast<Eigen::Index>(data.offset(i));
    const auto n = static_cast<Eigen::Index>(data.size(i));
    const double m = beta.psi.segment(o, n).mean();
    beta.psi.segment(o, n).array() -= m;
    beta.mu(static_cast<Eigen::Index>(i)) += m;
  }
}

VarianceState PosteriorDraws::state(Eigen::Index m) const {
  return VarianceState{variances(m, 0), variances(m, 1), variances(m, 2), variances(m, 3)};
}

BetaDraw PosteriorDraws::beta(Eigen::Index m) const {
  return BetaDraw{mu.row(m).transpose(), theta.row(m).transpose(), psi.row(m).transpose()};
}

Eigen::MatrixXd PosteriorDraws::fitted(const MosaicModel& model) const {
  Eigen::MatrixXd f = theta * model.basis_matrix().transpose() + psi;
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    f.col(r) += mu.col(static_cast<Eigen::Index>(model.design().patient_of[static_cast<std::size_t>(r)]));
  }
  return f;
}

PosteriorDraws recover_posterior(const Eigen::MatrixXd& variances, const MosaicModel& model,
                                 std::uint64_t seed, BetaSampling mode, long thin) {
  if (thin < 1) throw ConfigError("beta thinning must be at least 1");
  if (variances.cols() != 4) throw ConfigError("variance draws must have 4 columns");
  const Eigen::Index total = variances.rows();
  const Eigen::Index m = (total + thin - 1) / thin;

  PosteriorDraws out;
  out.seed = seed;
  out.variances.resize(m, 4);
  out.mu.resize(m, model.num_patients());
  out.theta.resize(m, model.num_coefficients());
  out.psi.resize(m, model.num_observations());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = k * thin;
    out.variances.row(k) = variances.row(src);
    Rng rng = make_rng(seed, "posterior", "beta", static_cast<std::uint64_t>(src));
    BetaDraw beta = recover_beta(out.state(k), model, rng, mode);
    recenter(beta, model);
    out.mu.row(k) = beta.mu.transpose();
    out.theta.row(k) = beta.theta.transpose();
    out.psi.row(k) = beta.psi.transpose();
  }
  return out;
}

Eigen::VectorXd curve_grid(const SplineBasis& basis, Eigen::Index grid_size) {
  if (grid_size < 2) throw ConfigError("curve grid needs at least 2 points");
  return Eigen::VectorXd::LinSpaced(grid_size, basis.lower, basis.upper);
}

Eigen::MatrixXd evaluate_global_curve(const PosteriorDraws& draws, const MosaicModel& model,
                                      std::size_t basis_index, const Eigen::VectorXd& grid) {
  if (basis_index >= model.bases().size()) throw ConfigError("basis index out of range");
  const SplineBasis& basis = model.bases()[basis_index];
  const double tol = 1e-10 * std::max(1.0, basis.upper - basis.lower);
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (!(grid(g) >= basis.lower - tol && grid(g) <= basis.upper + tol)) {
      throw ConfigError("curve grid point outside the observed covariate range");
    }
  }
  const Eigen::MatrixXd rows = basis.evaluate(grid);
  const Eigen::MatrixXd theta = draws.theta.middleCols(model.coefficient_offset(basis_index), basis.size());
  return theta * rows.transpose();
}

VarianceDecomposition pve(const PosteriorDraws& draws, const MosaicModel& model) {
  const Eigen::Index m = draws.size();
  if (m < 2) throw ConfigError("PVE needs at least two draws");
  auto trace_of = [m](const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    return (x.rowwise() - mean).array().square().sum() / static_cast<double>(m - 1);
  };
  Eigen::MatrixXd zmu(m, model.num_observations());
  for (Eigen::Index r = 0; r < zmu.cols(); ++r) {
    zmu.col(r) = draws.mu.col(static_cast<Eigen::Index>(model.design().patient_of[static_cast<std::size_t>(r)]));
  }
  const double tx = trace_of(draws.theta * model.basis_matrix().transpose());
  const double tz = trace_of(zmu);
  const double tp = model.spatial() ? trace_of(draws.psi) : 0.0;
  const double te = static_cast<double>(model.num_observations()) * draws.variances.col(3).mean();
  const double total = tx + tz + tp + te;
  return {100.0 * tx / total, 100.0 * tz / total, 100.0 * tp / total, 100.0 * te / total};
}

Eigen::MatrixXd pointwise_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& fitted,
                                         const Eigen::VectorXd& sigma2_y) {
  if (fitted.cols() != y.size() || fitted.rows() != sigma2_y.size()) {
    throw ConfigError("pointwise log-likelihood dimension mismatch");
  }
  const double log2pi = std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd ll(fitted.rows(), fitted.cols());
  for (Eigen::Index m = 0; m < fitted.rows(); ++m) {
    const double v = sigma2_y(m);
    ll.row(m) = -0.5 * (log2pi + std::log(v) + (y.transpose() - fitted.row(m)).array().square() / v);
  }
  for (Eigen::Index m = 0; m < ll.rows(); ++m) {
    for (Eigen::Index n = 0; n < ll.cols(); ++n) {
      if (!std::isfinite(ll(m, n))) {
        throw NumericalError("non-finite log-likelihood at draw " + std::to_string(m) + ", observation " +
                             std::to_string(n));
      }
    }
  }
  return ll;
}

Waic waic(const Eigen::MatrixXd& log_lik) {
  const Eigen::Index m = log_lik.rows();
  if (m < 1) throw ConfigError("WAIC needs at least one draw");
  Waic out;
  for (Eigen::Index n = 0; n < log_lik.cols(); ++n) {
    const auto col = log_lik.col(n);
    const double peak = col.maxCoeff();
    out.lppd += peak + std::log((col.array() - peak).exp().mean());
    if (m > 1) out.p_waic += (col.array() - col.mean()).square().sum() / static_cast<double>(m - 1);
  }
  out.waic = -2.0 * (out.lppd - out.p_waic);
  return out;
}

Dic dic(const Eigen::VectorXd& y, const Eigen::MatrixXd& fitted, const Eigen::VectorXd& sigma2_y) {
  const Eigen::MatrixXd ll = pointwise_log_likelihood(y, fitted, sigma2_y);
  Dic out;
  out.mean_deviance = -2.0 * ll.rowwise().sum().mean();
  const Eigen::MatrixXd mean_fit = fitted.colwise().mean();
  const Eigen::VectorXd mean_var = Eigen::VectorXd::Constant(1, sigma2_y.mean());
  out.deviance_at_mean = -2.0 * pointwise_log_likelihood(y, mean_fit, mean_var).sum();
  out.p_d = out.mean_deviance - out.deviance_at_mean;
  out.dic = out.mean_deviance + out.p_d;
  return out;
}

}  // namespace mosaic
