#include "mosaic/basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

namespace {

double quantile7(std::vector<double> v, double prob) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void check_index(const HmiDataset& data, std::size_t covariate_index) {
  if (covariate_index >= data.num_covariates()) {
    throw ConfigError("covariate index " + std::to_string(covariate_index) + " out of range (p = " +
                      std::to_string(data.num_covariates()) + ")");
  }
}

}  // namespace

Eigen::RowVectorXd bspline_row(const Eigen::VectorXd& knots, int degree, double x) {
  const Eigen::Index m = knots.size();
  const Eigen::Index k = m - degree - 1;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k);

  // Knot span: t[j] <= x < t[j+1], with the right boundary folded into the last span.
  Eigen::Index span = degree;
  if (x >= knots(k)) {
    span = k - 1;
  } else {
    while (span < k - 1 && x >= knots(span + 1)) ++span;
  }

  std::vector<double> basis(static_cast<std::size_t>(degree) + 1, 0.0);
  std::vector<double> left(basis.size()), right(basis.size());
  basis[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[static_cast<std::size_t>(j)] = x - knots(span + 1 - j);
    right[static_cast<std::size_t>(j)] = knots(span + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r) + 1] + left[static_cast<std::size_t>(j - r)];
      const double temp = denom != 0.0 ? basis[static_cast<std::size_t>(r)] / denom : 0.0;
      basis[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r) + 1] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    basis[static_cast<std::size_t>(j)] = saved;
  }
  for (int j = 0; j <= degree; ++j) row(span - degree + j) = basis[static_cast<std::size_t>(j)];
  return row;
}

Eigen::MatrixXd SplineBasis::evaluate(const Eigen::VectorXd& x) const {
  const double tol = 1e-10 * std::max(1.0, upper - lower);
  if (kind == BasisKind::linear) return x;

  Eigen::MatrixXd out(x.size(), size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= lower - tol && x(i) <= upper + tol)) {
      throw ConfigError("spline evaluation at " + csv::format(x(i)) + " outside the training range [" +
                        csv::format(lower) + ", " + csv::format(upper) + "]");
    }
    out.row(i) = bspline_row(knots, degree, std::clamp(x(i), lower, upper));
  }
  return out;
}

SplineBasis build_linear_basis(const HmiDataset& data, std::size_t covariate_index) {
  check_index(data, covariate_index);
  SplineBasis basis;
  basis.covariate_index = covariate_index;
  basis.kind = BasisKind::linear;
  basis.degree = 1;
  const auto col = data.covariates().col(static_cast<Eigen::Index>(covariate_index));
  basis.design = col;
  basis.penalty = Eigen::MatrixXd::Identity(1, 1);
  basis.lower = col.minCoeff();
  basis.upper = col.maxCoeff();
  return basis;
}

SplineBasis build_spline_basis(const HmiDataset& data, std::size_t covariate_index, int n_knots,
                               int degree, KnotPlacement placement) {
  check_index(data, covariate_index);
  if (n_knots < 2) throw ConfigError("spline basis needs at least 2 knots");
  if (degree < 1) throw ConfigError("spline degree must be at least 1");

  const Eigen::VectorXd x = data.covariates().col(static_cast<Eigen::Index>(covariate_index));
  const std::set<double> distinct(x.data(), x.data() + x.size());
  if (static_cast<int>(distinct.size()) < degree + 1) {
    throw DataError("covariate '" + data.covariate_names()[covariate_index] + "' has " +
                    std::to_string(distinct.size()) + " distinct values; degree " +
                    std::to_string(degree) + " spline needs at least " + std::to_string(degree + 1));
  }

  SplineBasis basis;
  basis.covariate_index = covariate_index;
  basis.kind = BasisKind::spline;
  basis.degree = degree;
  basis.lower = x.minCoeff();
  basis.upper = x.maxCoeff();

  Eigen::VectorXd breaks(n_knots);
  if (placement == KnotPlacement::uniform) {
    breaks = Eigen::VectorXd::LinSpaced(n_knots, basis.lower, basis.upper);
  } else {
    std::vector<double> values(x.data(), x.data() + x.size());
    for (int k = 0; k < n_knots; ++k) {
      breaks(k) = quantile7(values, static_cast<double>(k) / static_cast<double>(n_knots - 1));
    }
  }
  for (int k = 1; k < n_knots; ++k) {
    if (!(breaks(k) > breaks(k - 1))) {
      throw DataError("knots for covariate '" + data.covariate_names()[covariate_index] +
                      "' are not strictly increasing");
    }
  }

  const int n_total = n_knots + 2 * degree;
  basis.knots.resize(n_total);
  for (int j = 0; j < degree; ++j) {
    basis.knots(j) = breaks(0);
    basis.knots(n_total - 1 - j) = breaks(n_knots - 1);
  }
  basis.knots.segment(degree, n_knots) = breaks;

  const Eigen::Index k = n_knots + degree - 1;
  basis.design.resize(x.size(), k);
  for (Eigen::Index i = 0; i < x.size(); ++i) basis.design.row(i) = bspline_row(basis.knots, degree, x(i));

  if (k < 3) {
    throw ConfigError("spline basis of dimension " + std::to_string(k) +
                      " is too small for a second-difference penalty");
  }
  basis.penalty = second_difference_penalty(k).penalty;
  return basis;
}

SplineBasis build_basis(const HmiDataset& data, std::size_t covariate_index, const BasisSpec& spec) {
  if (spec.kind == BasisKind::linear) return build_linear_basis(data, covariate_index);
  return build_spline_basis(data, covariate_index, spec.n_knots, spec.degree, spec.placement);
}

SecondDifferenceOperator second_difference_penalty(Eigen::Index k) {
  if (k < 3) throw ConfigError("second-difference operator needs K >= 3, got " + std::to_string(k));
  SecondDifferenceOperator op;
  op.d = Eigen::MatrixXd::Zero(k - 2, k);
  for (Eigen::Index r = 0; r < k - 2; ++r) {
    op.d(r, r) = 1.0;
    op.d(r, r + 1) = -2.0;
    op.d(r, r + 2) = 1.0;
  }
  op.penalty = op.d.transpose() * op.d;
  return op;
}

Eigen::MatrixXd CoefficientPrior::covariance(double sigma2_x) const {
  const double scale = scaled_by_sigma_x ? sigma2_x : 1.0;
  return scale * factor * factor.transpose();
}

CoefficientPrior coefficient_prior(const SplineBasis& basis, const PriorOptions& options) {
  CoefficientPrior prior;
  if (basis.kind == BasisKind::linear) {
    prior.factor = Eigen::MatrixXd::Identity(basis.size(), basis.size()) * std::sqrt(options.linear_variance);
    prior.scaled_by_sigma_x = false;
    return prior;
  }

  prior.scaled_by_sigma_x = true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis.penalty);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double tol = 1e-9 * lambda.cwiseAbs().maxCoeff();
  Eigen::VectorXd scale(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (options.penalty_role == PenaltyRole::precision) {
      scale(i) = lambda(i) > tol ? 1.0 / std::sqrt(lambda(i)) : std::sqrt(options.null_variance_factor);
    } else {
      scale(i) = lambda(i) > tol ? std::sqrt(lambda(i)) : 0.0;
    }
  }
  prior.factor = eig.eigenvectors() * scale.asDiagonal();
  return prior;
}

}  // namespace mosaic
