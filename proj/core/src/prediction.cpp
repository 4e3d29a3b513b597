#include "mosaic/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "mosaic/errors.hpp"
#include "mosaic/kernel.hpp"

namespace mosaic {

PredictionRequest PredictionRequest::from_dataset(const HmiDataset& data) {
  PredictionRequest req;
  req.covariates = data.covariates();
  req.centroids = data.centroids();
  req.patient_ids.reserve(data.num_observations());
  for (std::size_t r = 0; r < data.num_observations(); ++r) req.patient_ids.push_back(data.patient_ids()[data.patient_of(r)]);
  return req;
}

std::vector<std::size_t> PredictionRequest::training_patient(const MosaicModel& model) const {
  std::vector<std::size_t> out;
  out.reserve(patient_ids.size());
  for (const auto& id : patient_ids) out.push_back(model.data().find_patient(id));
  return out;
}

void PredictionRequest::validate(const MosaicModel& model) const {
  const Eigen::Index n = covariates.rows();
  if (centroids.rows() != n || static_cast<Eigen::Index>(patient_ids.size()) != n) {
    throw ConfigError("prediction request has inconsistent row counts");
  }
  if (covariates.cols() != static_cast<Eigen::Index>(model.data().num_covariates())) {
    throw ConfigError("prediction covariates do not match the training covariates");
  }
  std::map<std::string, std::vector<Eigen::Index>> by_patient;
  for (Eigen::Index r = 0; r < n; ++r) by_patient[patient_ids[static_cast<std::size_t>(r)]].push_back(r);
  for (const auto& [id, rows] : by_patient) {
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        if (centroids.row(rows[a]) == centroids.row(rows[b])) {
          throw DataError("duplicate prediction centroid for patient " + id);
        }
      }
    }
  }
}

namespace {

// Square root of a PSD matrix, tolerating rounding-level negative eigenvalues.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a, const std::string& patient) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("conditional covariance eigensolver failed for patient " + patient);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw NumericalError("spatial conditional covariance is not positive semi-definite for patient " + patient +
                         " (smallest eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

struct PatientPlan {
  std::string id;
  std::size_t train_patient = 0;  // == num_patients for a new patient
  std::vector<Eigen::Index> rows;
  Eigen::MatrixXd weights;  // C(test, train) C(train)^{-1}
  Eigen::MatrixXd root;     // conditional correlation square root
};

std::vector<PatientPlan> plan(const MosaicModel& model, const PredictionRequest& req) {
  const std::vector<std::size_t> owner = req.training_patient(model);
  std::map<std::string, std::size_t> index;
  std::vector<PatientPlan> out;
  for (Eigen::Index r = 0; r < req.size(); ++r) {
    const std::string& id = req.patient_ids[static_cast<std::size_t>(r)];
    auto [it, inserted] = index.emplace(id, out.size());
    if (inserted) out.push_back(PatientPlan{id, owner[static_cast<std::size_t>(r)], {}, {}, {}});
    out[it->second].rows.push_back(r);
  }
  if (!model.spatial()) return out;

  const HmiDataset& data = model.data();
  for (PatientPlan& p : out) {
    Eigen::MatrixX2d s_test(static_cast<Eigen::Index>(p.rows.size()), 2);
    for (std::size_t k = 0; k < p.rows.size(); ++k) s_test.row(static_cast<Eigen::Index>(k)) = req.centroids.row(p.rows[k]);
    const Eigen::MatrixXd c_tt = cross_kernel(s_test, s_test, model.phi());
    if (p.train_patient == data.num_patients()) {
      p.root = psd_sqrt(c_tt, p.id);
      continue;
    }
    const auto o = static_cast<Eigen::Index>(data.offset(p.train_patient));
    const auto n = static_cast<Eigen::Index>(data.size(p.train_patient));
    const Eigen::MatrixX2d s_train = data.centroids().middleRows(o, n);
    const Eigen::MatrixXd c_t = cross_kernel(s_test, s_train, model.phi());
    const JitteredCholesky chol = jittered_cholesky(cross_kernel(s_train, s_train, model.phi()), "training kernel block");
    p.weights = chol.llt.solve(c_t.transpose()).transpose();
    Eigen::MatrixXd cond = c_tt - p.weights * c_t.transpose();
    cond = 0.5 * (cond + cond.transpose());
    p.root = psd_sqrt(cond, p.id);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd predict(const PosteriorDraws& draws, const MosaicModel& model, const PredictionRequest& request,
                        std::uint64_t seed) {
  request.validate(model);
  const Eigen::Index n = request.size();
  const Eigen::Index m = draws.size();

  Eigen::MatrixXd fixed_rows = Eigen::MatrixXd::Zero(n, model.num_coefficients());
  for (std::size_t l = 0; l < model.bases().size(); ++l) {
    const SplineBasis& b = model.bases()[l];
    fixed_rows.middleCols(model.coefficient_offset(l), b.size()) = b.evaluate(request.covariates.col(static_cast<Eigen::Index>(b.covariate_index)));
  }
  const std::vector<PatientPlan> plans = plan(model, request);
  const HmiDataset& data = model.data();

  Eigen::MatrixXd out(m, n);
  for (Eigen::Index d = 0; d < m; ++d) {
    Rng rng = make_rng(seed, "prediction", "draw", static_cast<std::uint64_t>(d));
    const VarianceState s = draws.state(d);
    Eigen::VectorXd y = fixed_rows * draws.theta.row(d).transpose();
    for (const PatientPlan& p : plans) {
      const bool known = p.train_patient < data.num_patients();
      const auto k = static_cast<Eigen::Index>(p.rows.size());
      const double intercept = known ? draws.mu(d, static_cast<Eigen::Index>(p.train_patient))
                                     : std::sqrt(s.sigma2_z) * standard_normal(rng, 1)(0);
      Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
      if (model.spatial()) {
        w = std::sqrt(s.tau2) * (p.root * standard_normal(rng, p.root.cols()));
        if (known) {
          const auto o = static_cast<Eigen::Index>(data.offset(p.train_patient));
          w += p.weights * draws.psi.row(d).segment(o, p.weights.cols()).transpose();
        }
      }
      const Eigen::VectorXd noise = std::sqrt(s.sigma2_y) * standard_normal(rng, k);
      for (Eigen::Index j = 0; j < k; ++j) y(p.rows[static_cast<std::size_t>(j)]) += intercept + w(j) + noise(j);
    }
    if (!y.allFinite()) throw NumericalError("non-finite prediction at draw " + std::to_string(d));
    out.row(d) = y.transpose();
  }
  return out;
}

double mspe(const Eigen::VectorXd& y_test, const Eigen::MatrixXd& predictive) {
  if (predictive.cols() != y_test.size()) throw ConfigError("prediction and test sizes differ");
  if (predictive.size() == 0) throw ConfigError("no predictions");
  return (predictive.rowwise() - y_test.transpose()).array().square().mean();
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PredictiveSummary summarize_predictions(const Eigen::MatrixXd& predictive, double alpha) {
  if (predictive.rows() < 2) throw ConfigError("predictive intervals need at least two draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  PredictiveSummary out;
  const Eigen::Index n = predictive.cols();
  out.mean = predictive.colwise().mean().transpose();
  out.lower.resize(n);
  out.upper.resize(n);
  std::vector<double> col(static_cast<std::size_t>(predictive.rows()));
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd::Map(col.data(), predictive.rows()) = predictive.col(j);
    out.lower(j) = empirical_quantile(col, alpha / 2.0);
    out.upper(j) = empirical_quantile(col, 1.0 - alpha / 2.0);
  }
  return out;
}

double predictive_coverage(const Eigen::VectorXd& y_test, const Eigen::MatrixXd& predictive, double alpha) {
  if (predictive.cols() != y_test.size()) throw ConfigError("prediction and test sizes differ");
  if (y_test.size() == 0) throw ConfigError("no test rows");
  const PredictiveSummary s = summarize_predictions(predictive, alpha);
  Eigen::Index covered = 0;
  for (Eigen::Index j = 0; j < y_test.size(); ++j) {
    if (y_test(j) >= s.lower(j) && y_test(j) <= s.upper(j)) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(y_test.size());
}

}  // namespace mosaic
