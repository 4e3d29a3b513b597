#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mosaic/data.hpp"

namespace mosaic {

enum class BasisKind { linear, spline };
enum class KnotPlacement { uniform, quantile };

/// How the spline penalty enters the coefficient prior.
///
/// `precision`: theta ~ N(0, sigma_x^2 (D'D)^+) with the two null directions of
/// D'D given variance `null_variance_factor * sigma_x^2`.
/// `covariance`: theta ~ N(0, sigma_x^2 D'D) taken literally.
enum class PenaltyRole { precision, covariance };

/// Basis expansion of one covariate for the global effect g(x).
struct SplineBasis {
  std::size_t covariate_index = 0;
  BasisKind kind = BasisKind::linear;
  int degree = 1;
  /// Full knot vector, boundary knots repeated degree + 1 times (spline kind only).
  Eigen::VectorXd knots;
  /// N x K evaluation at the training covariate values.
  Eigen::MatrixXd design;
  /// K x K penalty: identity for linear, D'D for spline.
  Eigen::MatrixXd penalty;
  /// Observed covariate range; evaluation outside it is refused.
  double lower = 0.0;
  double upper = 0.0;

  Eigen::Index size() const { return design.cols(); }

  /// Basis rows at arbitrary covariate values within [lower, upper].
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

struct BasisSpec {
  BasisKind kind = BasisKind::linear;
  int n_knots = 5;
  int degree = 3;
  KnotPlacement placement = KnotPlacement::uniform;
};

SplineBasis build_linear_basis(const HmiDataset& data, std::size_t covariate_index);

/// Cubic (by default) B-spline basis with `n_knots` knots over the covariate
/// range, giving n_knots + degree - 1 functions and penalty D'D.
SplineBasis build_spline_basis(const HmiDataset& data, std::size_t covariate_index, int n_knots,
                               int degree = 3, KnotPlacement placement = KnotPlacement::uniform);

SplineBasis build_basis(const HmiDataset& data, std::size_t covariate_index, const BasisSpec& spec);

/// Cox-de Boor evaluation of all B-splines of `degree` on `knots` at `x`.
Eigen::RowVectorXd bspline_row(const Eigen::VectorXd& knots, int degree, double x);

struct SecondDifferenceOperator {
  Eigen::MatrixXd d;        // (K - 2) x K
  Eigen::MatrixXd penalty;  // D'D
};

SecondDifferenceOperator second_difference_penalty(Eigen::Index k);

/// Prior of one basis block: theta_l ~ N(0, scale * factor * factor'), where
/// scale is sigma_x^2 when `scaled_by_sigma_x`, else 1.
struct CoefficientPrior {
  Eigen::MatrixXd factor;
  bool scaled_by_sigma_x = false;

  Eigen::MatrixXd covariance(double sigma2_x) const;
};

struct PriorOptions {
  PenaltyRole penalty_role = PenaltyRole::precision;
  /// Variance of linear coefficients ("large value, minimal shrinkage").
  double linear_variance = 1e6;
  /// Null-space variance multiplier for the spline precision prior.
  double null_variance_factor = 1e6;
};

CoefficientPrior coefficient_prior(const SplineBasis& basis, const PriorOptions& options = {});

}  // namespace mosaic
