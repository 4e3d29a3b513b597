#include "mosaic/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

HmiDataset HmiDataset::from_observations(const std::vector<FovObservation>& rows,
                                         std::vector<std::string> covariate_names) {
  if (rows.empty()) throw DataError("dataset has no observations");
  const std::size_t p = covariate_names.size();

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.patient_id.empty()) throw DataError("row " + std::to_string(r) + ": empty patient id");
    if (static_cast<std::size_t>(row.covariates.size()) != p) {
      throw DataError("row " + std::to_string(r) + ": expected " + std::to_string(p) +
                      " covariates, got " + std::to_string(row.covariates.size()));
    }
    if (!row.centroid.allFinite() || !row.covariates.allFinite() || !std::isfinite(row.outcome)) {
      throw DataError("row " + std::to_string(r) + ": non-finite value");
    }
    auto [it, inserted] = index.try_emplace(row.patient_id, ids.size());
    if (inserted) {
      ids.push_back(row.patient_id);
      members.emplace_back();
    }
    members[it->second].push_back(r);
  }

  HmiDataset data;
  data.covariate_names_ = std::move(covariate_names);
  data.patient_ids_ = ids;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.centroids_.resize(n, 2);
  data.covariates_.resize(n, static_cast<Eigen::Index>(p));
  data.outcomes_.resize(n);
  Eigen::Index out = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::map<std::pair<double, double>, std::size_t> seen;
    data.sizes_.push_back(members[i].size());
    for (std::size_t r : members[i]) {
      const auto& row = rows[r];
      auto [pos, fresh] = seen.try_emplace({row.centroid.x(), row.centroid.y()}, r);
      if (!fresh) {
        throw DataError("patient '" + ids[i] + "': rows " + std::to_string(pos->second) + " and " +
                        std::to_string(r) + " share the centroid (" +
                        csv::format(row.centroid.x()) + ", " + csv::format(row.centroid.y()) + ")");
      }
      data.centroids_.row(out) = row.centroid.transpose();
      if (p > 0) data.covariates_.row(out) = row.covariates.transpose();
      data.outcomes_(out) = row.outcome;
      data.source_rows_.push_back(r);
      ++out;
    }
  }
  data.rebuild_index();
  return data;
}

void HmiDataset::rebuild_index() {
  offsets_.assign(sizes_.size(), 0);
  patient_of_.clear();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    offsets_[i] = offset;
    offset += sizes_[i];
    patient_of_.insert(patient_of_.end(), sizes_[i], i);
  }
}

std::size_t HmiDataset::find_patient(const std::string& id) const {
  const auto it = std::find(patient_ids_.begin(), patient_ids_.end(), id);
  return static_cast<std::size_t>(it - patient_ids_.begin());
}

HmiDataset HmiDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw DataError("empty row subset");
  if (sorted.back() >= num_observations()) throw DataError("row subset out of range");

  HmiDataset out;
  out.covariate_names_ = covariate_names_;
  const auto n = static_cast<Eigen::Index>(sorted.size());
  out.centroids_.resize(n, 2);
  out.covariates_.resize(n, covariates_.cols());
  out.outcomes_.resize(n);
  std::size_t last_patient = num_patients();
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto r = static_cast<Eigen::Index>(sorted[static_cast<std::size_t>(k)]);
    const std::size_t patient = patient_of_[static_cast<std::size_t>(r)];
    if (patient != last_patient) {
      out.patient_ids_.push_back(patient_ids_[patient]);
      out.sizes_.push_back(0);
      last_patient = patient;
    }
    ++out.sizes_.back();
    out.centroids_.row(k) = centroids_.row(r);
    out.covariates_.row(k) = covariates_.row(r);
    out.outcomes_(k) = outcomes_(r);
    out.source_rows_.push_back(source_rows_[static_cast<std::size_t>(r)]);
  }
  out.rebuild_index();
  return out;
}

HmiDataset HmiDataset::with_covariates(const Eigen::MatrixXd& covariates) const {
  if (covariates.rows() != covariates_.rows() || covariates.cols() != covariates_.cols()) {
    throw DataError("covariate matrix shape mismatch");
  }
  HmiDataset out = *this;
  out.covariates_ = covariates;
  return out;
}

HmiDataset HmiDataset::with_outcomes(const Eigen::VectorXd& outcomes) const {
  if (outcomes.size() != outcomes_.size()) throw DataError("outcome vector length mismatch");
  HmiDataset out = *this;
  out.outcomes_ = outcomes;
  return out;
}

std::vector<FovObservation> HmiDataset::observations() const {
  std::vector<FovObservation> rows(num_observations());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto k = static_cast<Eigen::Index>(r);
    rows[r].patient_id = patient_ids_[patient_of_[r]];
    rows[r].centroid = centroids_.row(k).transpose();
    rows[r].covariates = covariates_.row(k).transpose();
    rows[r].outcome = outcomes_(k);
  }
  return rows;
}

HmiDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  const csv::Table table = csv::read(path);
  const std::size_t id_col = table.column(schema.patient_id);
  const std::size_t sx_col = table.column(schema.sx);
  const std::size_t sy_col = table.column(schema.sy);
  const std::size_t y_col = table.column(schema.outcome);

  std::vector<std::string> names = schema.covariates;
  if (names.empty()) {
    for (const auto& h : table.header) {
      if (h != schema.patient_id && h != schema.sx && h != schema.sy && h != schema.outcome) {
        names.push_back(h);
      }
    }
  }
  if (names.empty()) throw ConfigError("schema selects no covariate columns");
  std::vector<std::size_t> cov_cols;
  for (const auto& name : names) cov_cols.push_back(table.column(name));

  std::vector<FovObservation> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    FovObservation obs;
    obs.patient_id = cells[id_col];
    if (obs.patient_id.empty()) throw DataError("row " + std::to_string(r) + ": empty patient id");
    obs.centroid << csv::to_double(cells[sx_col], r, schema.sx),
        csv::to_double(cells[sy_col], r, schema.sy);
    obs.covariates.resize(static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 0; c < names.size(); ++c) {
      obs.covariates(static_cast<Eigen::Index>(c)) = csv::to_double(cells[cov_cols[c]], r, names[c]);
    }
    obs.outcome = csv::to_double(cells[y_col], r, schema.outcome);
    rows.push_back(std::move(obs));
  }
  return HmiDataset::from_observations(rows, names);
}

void write_dataset(const HmiDataset& data, const std::filesystem::path& path,
                   const ColumnSchema& schema) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  std::vector<std::string> header{schema.patient_id, schema.sx, schema.sy};
  for (const auto& name : data.covariate_names()) header.push_back(csv::escape(name));
  header.push_back(schema.outcome);
  csv::write_row(out, header);
  for (std::size_t r = 0; r < data.num_observations(); ++r) {
    const auto k = static_cast<Eigen::Index>(r);
    std::vector<std::string> cells{csv::escape(data.patient_ids()[data.patient_of(r)]),
                                   csv::format(data.centroids()(k, 0)),
                                   csv::format(data.centroids()(k, 1))};
    for (Eigen::Index c = 0; c < data.covariates().cols(); ++c) {
      cells.push_back(csv::format(data.covariates()(k, c)));
    }
    cells.push_back(csv::format(data.outcomes()(k)));
    csv::write_row(out, cells);
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Eigen::MatrixXd StandardizationRecord::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Eigen::MatrixXd StandardizationRecord::invert(const Eigen::MatrixXd& z) const {
  return (z.array().rowwise() * sd.transpose().array()).matrix().rowwise() + mean.transpose();
}

StandardizedDataset standardize_covariates(const HmiDataset& data) {
  const Eigen::MatrixXd& x = data.covariates();
  const auto n = x.rows();
  if (n < 2) throw DataError("standardization needs at least two observations");
  StandardizationRecord record;
  record.mean = x.colwise().mean().transpose();
  record.sd.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double ss = (x.col(c).array() - record.mean(c)).square().sum();
    record.sd(c) = std::sqrt(ss / static_cast<double>(n - 1));
    const double scale = std::max(1.0, std::abs(record.mean(c)));
    if (!(record.sd(c) > 1e-14 * scale)) {
      throw DataError("covariate '" + data.covariate_names()[static_cast<std::size_t>(c)] +
                      "' is constant and cannot be standardized");
    }
  }
  return {data.with_covariates(record.apply(x)), record};
}

double rescale_dimple(double distance) {
  if (!(distance >= 0.0 && distance <= 1.0)) {
    throw ConfigError("DIMPLE distance must lie in [0, 1], got " + csv::format(distance));
  }
  return 100.0 * (1.0 - distance);
}

PatientDesign build_patient_design(const HmiDataset& data) {
  PatientDesign design;
  const auto n = static_cast<Eigen::Index>(data.num_observations());
  const auto m = static_cast<Eigen::Index>(data.num_patients());
  design.z = Eigen::MatrixXd::Zero(n, m);
  design.patient_of.resize(data.num_observations());
  for (std::size_t r = 0; r < data.num_observations(); ++r) {
    design.patient_of[r] = data.patient_of(r);
    design.z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(data.patient_of(r))) = 1.0;
  }
  design.sizes.assign(data.patient_sizes().begin(), data.patient_sizes().end());
  return design;
}

}  // namespace mosaic
