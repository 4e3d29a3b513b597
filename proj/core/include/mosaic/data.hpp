#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mosaic {

/// One field of view: its patient, centroid, covariates and outcome.
struct FovObservation {
  std::string patient_id;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  Eigen::VectorXd covariates;
  double outcome = 0.0;
};

/// Two-resolution dataset: fields of view nested within patients.
///
/// Rows are stored grouped by patient. Patients appear in the order of their
/// first row in the input and rows keep their relative input order within a
/// patient, so row `r` of every matrix belongs to patient `patient_of(r)` and
/// the rows of patient `i` are `[offset(i), offset(i) + size(i))`.
///
/// Instances are immutable once built.
class HmiDataset {
 public:
  HmiDataset() = default;

  /// Groups, validates and stores the observations.
  ///
  /// Throws DataError on inconsistent covariate length, non-finite values or
  /// two identical centroids within one patient.
  static HmiDataset from_observations(const std::vector<FovObservation>& rows,
                                      std::vector<std::string> covariate_names);

  std::size_t num_patients() const { return patient_ids_.size(); }
  std::size_t num_observations() const { return static_cast<std::size_t>(outcomes_.size()); }
  std::size_t num_covariates() const { return covariate_names_.size(); }

  const std::vector<std::string>& patient_ids() const { return patient_ids_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  std::span<const std::size_t> patient_sizes() const { return sizes_; }
  std::size_t offset(std::size_t patient) const { return offsets_[patient]; }
  std::size_t size(std::size_t patient) const { return sizes_[patient]; }
  std::size_t patient_of(std::size_t row) const { return patient_of_[row]; }
  /// Index of the row in the original input (before grouping).
  std::size_t source_row(std::size_t row) const { return source_rows_[row]; }
  /// Patient index for an id, or num_patients() when absent.
  std::size_t find_patient(const std::string& id) const;

  const Eigen::MatrixX2d& centroids() const { return centroids_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXd& outcomes() const { return outcomes_; }

  /// Dataset restricted to `rows` (indices into this dataset). Grouping and
  /// relative order are preserved.
  HmiDataset subset(std::span<const std::size_t> rows) const;
  HmiDataset with_covariates(const Eigen::MatrixXd& covariates) const;
  HmiDataset with_outcomes(const Eigen::VectorXd& outcomes) const;

  std::vector<FovObservation> observations() const;

 private:
  void rebuild_index();

  std::vector<std::string> covariate_names_;
  std::vector<std::string> patient_ids_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> patient_of_;
  std::vector<std::size_t> source_rows_;
  Eigen::MatrixX2d centroids_;
  Eigen::MatrixXd covariates_;
  Eigen::VectorXd outcomes_;
};

/// Column roles of an input table. An empty covariate list selects every
/// column not claimed by another role, in file order.
struct ColumnSchema {
  std::string patient_id = "patient_id";
  std::string sx = "sx";
  std::string sy = "sy";
  std::vector<std::string> covariates;
  std::string outcome = "y";
};

HmiDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema = {});

/// Writes the dataset with 17 significant digits so that load_dataset
/// reproduces every value exactly. Rows are written in grouped order.
void write_dataset(const HmiDataset& data, const std::filesystem::path& path,
                   const ColumnSchema& schema = {});

struct StandardizationRecord {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
  double apply(double x, std::size_t covariate) const { return (x - mean(covariate)) / sd(covariate); }
  double invert(double z, std::size_t covariate) const { return z * sd(covariate) + mean(covariate); }
};

struct StandardizedDataset {
  HmiDataset data;
  StandardizationRecord record;
};

/// Pooled z-scoring of every covariate column (sample sd, N - 1 denominator).
StandardizedDataset standardize_covariates(const HmiDataset& data);

/// Maps a Jensen-Shannon type distance in [0, 1] to a colocalization score in [0, 100].
double rescale_dimple(double distance);

/// Patient indicator design: row r has a single 1 in column patient_of(r).
struct PatientDesign {
  Eigen::MatrixXd z;
  std::vector<std::size_t> patient_of;
  std::vector<std::size_t> sizes;
};

PatientDesign build_patient_design(const HmiDataset& data);

}  // namespace mosaic
