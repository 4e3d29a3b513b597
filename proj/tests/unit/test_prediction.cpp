#include "doctest.h"
#include "fixtures.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/fit.hpp"
#include "mosaic/prediction.hpp"

using namespace mosaic;

namespace {

struct Toy {
  HmiDataset data;
  std::shared_ptr<MosaicModel> model;
  PosteriorDraws draws;
};

Toy toy(double tiny, Eigen::Index m = 50) {
  Rng rng(21);
  Toy t;
  t.data = fixtures::random_dataset(rng, {5, 6, 4});
  t.model = std::make_shared<MosaicModel>(t.data, std::vector<SplineBasis>{build_linear_basis(t.data, 0)}, 3.0);
  t.draws.variances.resize(m, 4);
  t.draws.variances.rowwise() = Eigen::RowVector4d(tiny, 1.0, tiny, tiny);
  t.draws.theta = Eigen::MatrixXd::Constant(m, 1, 2.0);
  t.draws.mu.resize(m, 3);
  t.draws.mu.rowwise() = Eigen::RowVector3d(10, 20, 30);
  t.draws.psi = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(t.data.num_observations()));
  for (Eigen::Index d = 0; d < m; ++d) t.draws.psi.row(d) = standard_normal(rng, t.draws.psi.cols()).transpose();
  return t;
}

PredictionRequest one_row(const std::string& id, double x, double sx, double sy) {
  PredictionRequest r;
  r.covariates = Eigen::MatrixXd::Constant(1, 1, x);
  r.centroids.resize(1, 2);
  r.centroids << sx, sy;
  r.patient_ids = {id};
  return r;
}

}  // namespace

TEST_SUITE("prediction") {

TEST_CASE("MSPE examples") {
  const Eigen::Vector3d y(1, 2, 3);
  Eigen::MatrixXd exact = y.transpose().replicate(4, 1);
  CHECK(mspe(y, exact) == 0.0);
  Eigen::MatrixXd off = y.transpose();
  off(0, 1) += 2.0;
  CHECK(mspe(y, off) == doctest::Approx(4.0 / 3.0));
  Eigen::MatrixXd one(1, 1);
  one << 3.0;
  CHECK(mspe(Eigen::VectorXd::Constant(1, 1.0), one) == 4.0);

  Rng rng(1);
  Eigen::MatrixXd p(5, 3);
  for (Eigen::Index d = 0; d < 5; ++d) p.row(d) = standard_normal(rng, 3).transpose();
  double per_draw = 0.0;
  for (Eigen::Index d = 0; d < 5; ++d) per_draw += (p.row(d) - y.transpose()).squaredNorm() / 3.0;
  CHECK(mspe(y, p) == doctest::Approx(per_draw / 5.0));
  Eigen::MatrixXd swapped = p;
  swapped.row(0).swap(swapped.row(4));
  CHECK(mspe(y, swapped) == doctest::Approx(mspe(y, p)));
}

TEST_CASE("quantiles and coverage") {
  CHECK(empirical_quantile({5, 1, 3, 2, 4}, 0.25) == 2.0);
  CHECK(empirical_quantile({1, 2}, 0.5) == 1.5);
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.9) == doctest::Approx(3.7));
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), ConfigError);

  Eigen::MatrixXd draws(101, 2);
  draws.col(0) = Eigen::VectorXd::LinSpaced(101, 0, 100);
  draws.col(1) = Eigen::VectorXd::LinSpaced(101, 0, 100);
  const auto s = summarize_predictions(draws, 0.1);
  CHECK(s.lower(0) == doctest::Approx(5.0));
  CHECK(s.upper(0) == doctest::Approx(95.0));
  CHECK(predictive_coverage(Eigen::Vector2d(50, 99), draws, 0.1) == 0.5);
  CHECK(predictive_coverage(Eigen::Vector2d(5, 95), draws, 0.1) == 1.0);
}

TEST_CASE("new patient with negligible variances predicts the covariate effect") {
  auto t = toy(1e-12);
  const auto pred = predict(t.draws, *t.model, one_row("new", 0.5, 0.3, 0.3), 4);
  CHECK(pred.col(0).mean() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("prediction at a training location reproduces psi") {
  auto t = toy(1e-12);
  const Eigen::Index row = 7;  // second patient
  const std::string id = t.data.patient_ids()[t.data.patient_of(row)];
  const double x = t.data.covariates()(row, 0);
  const auto req = one_row(id, x, t.data.centroids()(row, 0), t.data.centroids()(row, 1));
  const auto pred = predict(t.draws, *t.model, req, 5);
  for (Eigen::Index d = 0; d < t.draws.size(); ++d) {
    const double psi = t.draws.psi(d, row);
    const double expect = 2.0 * x + 20.0 + psi;
    CHECK(std::abs(pred(d, 0) - expect) <= 0.01 * std::max(std::abs(psi), 1e-3));
  }
}

TEST_CASE("new patients ignore training spatial effects") {
  auto t = toy(0.5);
  PredictionRequest req;
  req.covariates.resize(3, 1);
  req.covariates << 0.1, 0.2, -0.3;
  req.centroids.resize(3, 2);
  req.centroids << 0.1, 0.1, 0.5, 0.5, 0.2, 0.9;
  req.patient_ids = {"p0", "newbie", "newbie"};
  const auto a = predict(t.draws, *t.model, req, 9);
  PosteriorDraws shuffled = t.draws;
  shuffled.psi.rowwise().reverseInPlace();
  const auto b = predict(shuffled, *t.model, req, 9);
  CHECK(a.col(1) == b.col(1));
  CHECK(a.col(2) == b.col(2));
  CHECK(a.col(0) != b.col(0));
  CHECK(predict(t.draws, *t.model, req, 9) == a);
}

TEST_CASE("request validation") {
  auto t = toy(0.5);
  Rng rng(3);
  auto data = fixtures::random_dataset(rng, {6, 6});
  const MosaicModel spline(data, {build_spline_basis(data, 0, 3, 2)}, 1.0);
  PosteriorDraws d;
  d.variances = Eigen::MatrixXd::Ones(2, 4);
  d.theta = Eigen::MatrixXd::Zero(2, spline.num_coefficients());
  d.mu = Eigen::MatrixXd::Zero(2, 2);
  d.psi = Eigen::MatrixXd::Zero(2, 12);
  CHECK_THROWS_AS(predict(d, spline, one_row("p0", 99.0, 0.5, 0.5), 1), ConfigError);

  PredictionRequest dup;
  dup.covariates = Eigen::MatrixXd::Zero(2, 1);
  dup.centroids = Eigen::MatrixX2d::Constant(2, 2, 0.4);
  dup.patient_ids = {"x", "x"};
  CHECK_THROWS_AS(predict(t.draws, *t.model, dup, 1), DataError);
  dup.patient_ids = {"x", "y"};
  CHECK_NOTHROW(predict(t.draws, *t.model, dup, 1));
}

TEST_CASE("in-sample predictions centre on the fitted values") {
  Rng rng(30);
  const auto data = fixtures::random_dataset(rng, {10, 12, 9});
  FitOptions o;
  o.phi = 2.0;
  o.bases = {BasisSpec{BasisKind::linear}};
  o.chain.total = 3000;
  o.chain.adapt = 1500;
  o.chain.burn_in = 1500;
  const auto fit = fit_model(data, o);
  const auto req = PredictionRequest::from_dataset(fit.model().data());
  const Eigen::MatrixXd pred = predict(fit.posterior, fit.model(), req, 2);
  const Eigen::MatrixXd fitted = fit.posterior.fitted(fit.model());
  const double m = static_cast<double>(pred.rows());
  int inside = 0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const Eigen::VectorXd diff = pred.col(c) - fitted.col(c);
    const double mcse = std::sqrt((diff.array() - diff.mean()).square().sum() / (m - 1) / m);
    if (std::abs(diff.mean()) <= 3.0 * mcse) ++inside;
  }
  CHECK(inside >= static_cast<int>(0.95 * static_cast<double>(pred.cols())));
}

}
