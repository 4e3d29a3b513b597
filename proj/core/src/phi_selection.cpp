#include "mosaic/phi_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "mosaic/errors.hpp"
#include "mosaic/kernel.hpp"

namespace mosaic {

void PhiGrid::validate() const {
  if (values.empty()) throw ConfigError("phi grid is empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("phi grid values must be finite and >= 0");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("cannot parse phi grid '" + text + "'");
    }
  };
  std::vector<std::string> parts;
  const char sep = text.find(',') != std::string::npos ? ',' : ':';
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);

  std::vector<double> out;
  if (sep == ',' || parts.size() == 1) {
    for (const auto& p : parts) out.push_back(number(p));
  } else if (parts.size() == 3) {
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0)) throw ConfigError("phi grid step must be positive");
    if (stop < start) throw ConfigError("phi grid stop is below start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    throw ConfigError("phi grid must be start:stop:step, a comma list or a single value");
  }
  return out;
}

OlsFit ols_residuals(const HmiDataset& data, const std::vector<SplineBasis>& bases, bool patient_effects) {
  const auto n = static_cast<Eigen::Index>(data.num_observations());
  std::vector<Eigen::VectorXd> columns;
  OlsFit fit;
  if (patient_effects) {
    for (std::size_t i = 0; i < data.num_patients(); ++i) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      c.segment(static_cast<Eigen::Index>(data.offset(i)), static_cast<Eigen::Index>(data.size(i))).setOnes();
      columns.push_back(std::move(c));
      fit.column_names.push_back("patient:" + data.patient_ids()[i]);
    }
  } else {
    columns.push_back(Eigen::VectorXd::Ones(n));
    fit.column_names.emplace_back("intercept");
  }
  for (const SplineBasis& b : bases) {
    const Eigen::Index first = b.kind == BasisKind::spline ? 1 : 0;
    for (Eigen::Index k = first; k < b.size(); ++k) {
      columns.push_back(b.design.col(k));
      fit.column_names.push_back(data.covariate_names()[b.covariate_index] + "[" + std::to_string(k) + "]");
    }
  }
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = columns[j];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    std::string names;
    for (Eigen::Index j = qr.rank(); j < x.cols(); ++j) {
      if (!names.empty()) names += ", ";
      names += fit.column_names[static_cast<std::size_t>(qr.colsPermutation().indices()(j))];
    }
    throw DataError("regression design is rank deficient; cannot estimate: " + names);
  }
  fit.coefficients = qr.solve(data.outcomes());
  fit.residuals = data.outcomes() - x * fit.coefficients;
  return fit;
}

TrainTestSplit stratified_split(const HmiDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
  const std::size_t n = data.num_observations();
  const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "phi_selection", "split");
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> remaining(data.patient_sizes().begin(), data.patient_sizes().end());
  std::vector<char> is_test(n, 0);
  std::size_t taken = 0;
  for (std::size_t r : order) {
    if (taken == wanted) break;
    const std::size_t p = data.patient_of(r);
    if (remaining[p] <= 1) continue;
    --remaining[p];
    is_test[r] = 1;
    ++taken;
  }
  TrainTestSplit out;
  for (std::size_t r = 0; r < n; ++r) (is_test[r] ? out.test : out.train).push_back(r);
  return out;
}

ChainConfig PhiSelectionOptions::default_chain() {
  ChainConfig c;
  c.total = 10000;
  c.adapt = 5000;
  c.burn_in = 7500;
  return c;
}

namespace {

// Per-patient pieces of the train/test conditional at one decay value,
// expressed in the eigenbasis of each training kernel block.
class SplitKernel {
 public:
  SplitKernel(const HmiDataset& data, const Eigen::VectorXd& residuals, const TrainTestSplit& split, double phi) {
    const std::size_t np = data.num_patients();
    std::vector<std::vector<std::size_t>> train(np), test(np);
    for (std::size_t r : split.train) train[data.patient_of(r)].push_back(r);
    for (std::size_t r : split.test) test[data.patient_of(r)].push_back(r);
    test_size_ = static_cast<Eigen::Index>(split.test.size());
    std::vector<Eigen::Index> test_pos(data.num_observations(), -1);
    for (std::size_t k = 0; k < split.test.size(); ++k) test_pos[split.test[k]] = static_cast<Eigen::Index>(k);

    auto gather = [&](const std::vector<std::size_t>& rows) {
      Eigen::MatrixX2d s(static_cast<Eigen::Index>(rows.size()), 2);
      for (std::size_t k = 0; k < rows.size(); ++k) s.row(static_cast<Eigen::Index>(k)) = data.centroids().row(static_cast<Eigen::Index>(rows[k]));
      return s;
    };
    for (std::size_t p = 0; p < np; ++p) {
      if (train[p].empty() && test[p].empty()) continue;
      Block b;
      for (std::size_t r : test[p]) b.test_index.push_back(test_pos[r]);
      if (!train[p].empty()) {
        const Eigen::MatrixX2d s_train = gather(train[p]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross_kernel(s_train, s_train, phi));
        if (eig.info() != Eigen::Success) throw NumericalError("kernel eigendecomposition failed");
        b.lambda = eig.eigenvalues().cwiseMax(0.0);
        Eigen::VectorXd r(static_cast<Eigen::Index>(train[p].size()));
        for (std::size_t k = 0; k < train[p].size(); ++k) r(static_cast<Eigen::Index>(k)) = residuals(static_cast<Eigen::Index>(train[p][k]));
        b.rotated = eig.eigenvectors().transpose() * r;
        if (!test[p].empty()) b.cross = cross_kernel(gather(test[p]), s_train, phi) * eig.eigenvectors();
      } else {
        b.cross.resize(static_cast<Eigen::Index>(test[p].size()), 0);
      }
      blocks_.push_back(std::move(b));
    }
  }

  double log_likelihood(double sigma2_y, double tau2) const {
    double out = 0.0;
    Eigen::Index n = 0;
    for (const Block& b : blocks_) {
      const Eigen::ArrayXd d = tau2 * b.lambda.array() + sigma2_y;
      out -= 0.5 * (d.log().sum() + (b.rotated.array().square() / d).sum());
      n += b.lambda.size();
    }
    return out - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  }

  void conditional(double sigma2_y, double tau2, Eigen::VectorXd& mean, Eigen::VectorXd& var) const {
    mean.setZero(test_size_);
    var.setConstant(test_size_, sigma2_y + tau2);
    for (const Block& b : blocks_) {
      if (b.test_index.empty() || b.lambda.size() == 0) continue;
      const Eigen::ArrayXd inv_d = 1.0 / (tau2 * b.lambda.array() + sigma2_y);
      const Eigen::VectorXd m = tau2 * (b.cross * (b.rotated.array() * inv_d).matrix());
      const Eigen::VectorXd shrink = (b.cross.array().square().rowwise() * inv_d.transpose()).rowwise().sum();
      for (std::size_t k = 0; k < b.test_index.size(); ++k) {
        const auto t = static_cast<Eigen::Index>(k);
        mean(b.test_index[k]) = m(t);
        var(b.test_index[k]) = std::max(sigma2_y + tau2 - tau2 * tau2 * shrink(t), sigma2_y);
      }
    }
  }

 private:
  struct Block {
    std::vector<Eigen::Index> test_index;
    Eigen::VectorXd lambda;
    Eigen::VectorXd rotated;
    Eigen::MatrixXd cross;  // C(test, train) Q
  };
  std::vector<Block> blocks_;
  Eigen::Index test_size_ = 0;
};

}  // namespace

Eigen::VectorXd conditional_residual_mean(const HmiDataset& data, const Eigen::VectorXd& residuals,
                                          const TrainTestSplit& split, double phi, double tau2,
                                          double sigma2_y) {
  const SplitKernel kernel(data, residuals, split, phi);
  Eigen::VectorXd mean, var;
  kernel.conditional(sigma2_y, tau2, mean, var);
  return mean;
}

PhiScore score_phi(const HmiDataset& data, const Eigen::VectorXd& residuals, const TrainTestSplit& split,
                   double phi, PhiCriterion criterion, const PhiSelectionOptions& options,
                   const ChainConfig& chain) {
  if (split.test.empty()) throw ConfigError("phi selection needs at least one test row");
  const SplitKernel kernel(data, residuals, split, phi);

  LogDensity target = [&](const Eigen::VectorXd& eta) {
    const double s2y = std::exp(eta(0));
    const double t2 = std::exp(eta(1));
    if (!(std::isfinite(s2y) && std::isfinite(t2) && s2y > 0.0 && t2 > 0.0)) {
      return -std::numeric_limits<double>::infinity();
    }
    const double lp = kernel.log_likelihood(s2y, t2) +
                      inverse_gamma_log_density(s2y, options.sigma2_y_prior.shape, options.sigma2_y_prior.rate) +
                      inverse_gamma_log_density(t2, options.tau2_prior.shape, options.tau2_prior.rate) + eta(0) +
                      eta(1);
    return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
  };

  double var_train = 0.0;
  {
    Eigen::VectorXd r(static_cast<Eigen::Index>(split.train.size()));
    for (std::size_t k = 0; k < split.train.size(); ++k) r(static_cast<Eigen::Index>(k)) = residuals(static_cast<Eigen::Index>(split.train[k]));
    var_train = r.size() > 1 ? (r.array() - r.mean()).square().sum() / static_cast<double>(r.size() - 1) : 1.0;
  }
  const double start = std::max(var_train / 2.0, 1e-8);
  Eigen::VectorXd initial(2);
  initial << std::log(start), std::log(start);
  const ChainResult res = run_chain(chain, target, initial);

  const auto nt = static_cast<Eigen::Index>(split.test.size());
  const Eigen::Index m = res.draws.rows();
  Eigen::VectorXd y_test(nt);
  for (Eigen::Index k = 0; k < nt; ++k) y_test(k) = residuals(static_cast<Eigen::Index>(split.test[static_cast<std::size_t>(k)]));

  Eigen::VectorXd mean_sum = Eigen::VectorXd::Zero(nt);
  Eigen::MatrixXd log_dens(m, nt);
  Eigen::VectorXd mean, var;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index d = 0; d < m; ++d) {
    kernel.conditional(std::exp(res.draws(d, 0)), std::exp(res.draws(d, 1)), mean, var);
    mean_sum += mean;
    log_dens.row(d) = (-0.5 * (log2pi + var.array().log() + (y_test - mean).array().square() / var.array())).transpose();
  }

  PhiScore out;
  out.acceptance_rate = res.acceptance_rate;
  out.mean_prediction = mean_sum / static_cast<double>(m);
  if (criterion == PhiCriterion::rmse) {
    out.score = std::sqrt((y_test - out.mean_prediction).squaredNorm() / static_cast<double>(nt));
  } else {
    double total = 0.0;
    for (Eigen::Index k = 0; k < nt; ++k) {
      const double peak = log_dens.col(k).maxCoeff();
      total += peak + std::log((log_dens.col(k).array() - peak).exp().mean());
    }
    out.score = -total / static_cast<double>(nt);
  }
  if (!std::isfinite(out.score)) throw NumericalError("non-finite phi score at phi = " + std::to_string(phi));
  return out;
}

std::size_t choose_phi(const std::vector<double>& phi, const std::vector<double>& score) {
  if (phi.empty() || phi.size() != score.size()) throw ConfigError("phi and score lists must be non-empty and aligned");
  const double best = *std::min_element(score.begin(), score.end());
  std::size_t out = phi.size();
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (score[k] > best + 1e-9) continue;
    if (out == phi.size() || phi[k] < phi[out]) out = k;
  }
  return out;
}

PhiSelectionReport select_phi(const HmiDataset& data, const std::vector<SplineBasis>& bases, const PhiGrid& grid,
                              const PhiSelectionOptions& options) {
  grid.validate();
  options.chain.validate();
  const OlsFit ols = ols_residuals(data, bases, options.patient_effects);

  PhiSelectionReport report;
  report.criterion = grid.criterion;
  report.split = stratified_split(data, grid.test_fraction, grid.seed);
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    ChainConfig chain = options.chain;
    chain.seed = derive_seed(grid.seed, "phi_selection", "chain", k);
    const PhiScore s = score_phi(data, ols.residuals, report.split, grid.values[k], grid.criterion, options, chain);
    report.phi.push_back(grid.values[k]);
    report.score.push_back(s.score);
    report.acceptance_rate.push_back(s.acceptance_rate);
  }

  report.best_index = choose_phi(report.phi, report.score);
  report.best_phi = report.phi[report.best_index];
  return report;
}

}  // namespace mosaic
