#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gpdiag {

struct Location {
  std::array<double, 2> coords{};
  int dim = 1;
};

/// Regular-lattice tag. `dims` is {M} or {M1, M2}; lattice coordinates run
/// 1..M_k along each axis, and data coordinate c maps to 1 + (c - origin)/spacing.
/// `lattice_row[i]` is the position of observation i in lattice order (the
/// last axis varies fastest), which is the row order of the spectral basis.
struct GridTag {
  std::vector<int> dims;
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<std::size_t> lattice_row;

  std::size_t size() const;
  /// Data units per lattice step when the spacing is the same on every axis.
  std::optional<double> uniform_spacing() const;
};

struct Covariate {
  std::string name;
  Eigen::VectorXd values;
};

/// Observations, outcome and named covariate columns. Immutable once built;
/// the factory validates every invariant and detects regular grids.
class Dataset {
 public:
  static Dataset create(Eigen::MatrixXd coords, Eigen::VectorXd y, std::vector<Covariate> covariates,
                        std::vector<std::string> location_names = {}, std::string outcome_name = "y");

  std::size_t size() const { return static_cast<std::size_t>(y_.size()); }
  int dim() const { return static_cast<int>(coords_.cols()); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  Location location(std::size_t i) const;
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<Covariate>& covariates() const { return covariates_; }
  const Eigen::VectorXd& covariate(const std::string& name) const;
  bool has_covariate(const std::string& name) const;
  const std::optional<GridTag>& grid() const { return grid_; }
  bool is_grid() const { return grid_.has_value(); }
  const std::vector<std::string>& location_names() const { return location_names_; }
  const std::string& outcome_name() const { return outcome_name_; }

  /// Largest pairwise Euclidean distance.
  double extent() const;
  Eigen::MatrixXd distance_matrix() const;

  Dataset with_outcome(Eigen::VectorXd y) const;
  Dataset with_covariate(const std::string& name, Eigen::VectorXd values) const;

  /// Reorders a per-observation vector into lattice order (grid datasets only).
  Eigen::VectorXd to_lattice_order(const Eigen::VectorXd& values) const;
  Eigen::VectorXd from_lattice_order(const Eigen::VectorXd& values) const;

 private:
  Dataset() = default;

  Eigen::MatrixXd coords_;
  Eigen::VectorXd y_;
  std::vector<Covariate> covariates_;
  std::optional<GridTag> grid_;
  std::vector<std::string> location_names_;
  std::string outcome_name_;
};

/// Detects whether coordinates form a full regular lattice (any row order).
std::optional<GridTag> detect_grid(const Eigen::MatrixXd& coords, double tol = 1e-9);

/// Column roles for CSV ingestion. An unset covariate list binds every
/// remaining column as a covariate.
struct Schema {
  std::vector<std::string> locations;
  std::string outcome;
  std::optional<std::vector<std::string>> covariates;
};

Dataset ingest_csv(const std::string& path, const Schema& schema);
Dataset parse_csv(const std::string& text, const Schema& schema);
std::string to_csv(const Dataset& data);
void export_csv(const Dataset& data, const std::string& path);

/// Intercept plus named covariate columns.
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd X;

  Eigen::Index columns() const { return X.cols(); }
};

inline constexpr const char* kInterceptName = "(Intercept)";

DesignMatrix make_design(const Dataset& data, const std::vector<std::string>& covariates);
/// Validates a caller-built design (leading ones column, full column rank).
DesignMatrix make_design(std::vector<std::string> names, Eigen::MatrixXd X);

struct Standardized {
  Eigen::VectorXd values;
  double mean = 0.0;
  double sd = 1.0;
};

/// Centers and scales by the sample standard deviation (denominator n - 1).
Standardized standardize(const Eigen::VectorXd& column);
Eigen::VectorXd destandardize(const Standardized& s);

}  // namespace gpdiag
