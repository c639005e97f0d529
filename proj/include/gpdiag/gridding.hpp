#pragma once

#include "gpdiag/dataset.hpp"
#include "gpdiag/reml.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gpdiag {

/// Target lattice for IDW smoothing. The observation bounding box [lo, hi] is
/// mapped affinely onto [1, M1] x [1, M2]; distances are taken in those units.
struct GridSpec {
  int M1 = 0;
  int M2 = 0;
  double lambda = 7.0;
  std::optional<double> covariate_lambda;  // defaults to lambda
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  void validate() const;
  /// Data units per lattice step on each axis.
  std::array<double, 2> step() const;
};

/// Fills lo/hi from the dataset's bounding box.
GridSpec make_grid_spec(const Dataset& data, int M1, int M2, double lambda);

Eigen::MatrixXd rescale_to_grid(const Eigen::MatrixXd& coords, const GridSpec& spec);

/// IDW pseudo-data at every lattice point (lattice order). A lattice point
/// within 1e-9 of an observation takes that observation's value exactly.
Eigen::VectorXd idw_smooth(const Dataset& data, const GridSpec& spec, const Eigen::VectorXd& column,
                           std::optional<double> lambda = {});

struct GriddedData {
  Dataset data;  // lattice coordinates 1..M1 x 1..M2, grid-tagged
  GridSpec spec;
  /// Data units per lattice step, used to report rho in data units; the
  /// geometric mean of the two axis steps.
  double unit = 1.0;
};

/// Smooths the outcome (lambda) and every covariate (covariate_lambda) to the grid.
GriddedData grid_dataset(const Dataset& data, const GridSpec& spec);

struct GridSuggestion {
  int M1 = 0;
  int M2 = 0;
  double size_factor = 1.0;
  std::vector<double> lambdas{5.0, 7.0, 9.0};
};

/// Even (M1, M2) with M1/M2 near the bounding-box aspect ratio at sizes
/// {0.5, 0.75, 1.0, 1.25} times the observation count; minimum 4 x 4.
std::vector<GridSuggestion> suggest_grid(const Dataset& data);

struct LambdaCalibration {
  double best_lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> loss;  // sum of squared relative differences from the raw fit
  std::vector<VarianceParams> gridded;  // rho in data units
  VarianceParams raw;
};

/// Chooses the lambda whose gridded exact fit is closest to the raw exact fit.
LambdaCalibration calibrate_lambda(const Dataset& data, const DesignMatrix& raw_design, int M1, int M2,
                                   const std::vector<double>& lambdas, const FitOptions& options);

struct SweepConfig {
  int n_points = 400;
  VarianceParams truth{12.0, 5.0, 0.1, Smoothness::half};
  std::vector<int> sizes{12, 16, 20};
  std::vector<double> lambdas{5.0, 10.0, 100.0};
  std::vector<double> blank_fractions{0.0};
  int replicates = 5;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
  int threads = 0;
};

struct SweepCell {
  int M = 0;           // 0 for the raw-data fit
  double lambda = 0.0; // 0 for the raw-data fit
  double blank_fraction = 0.0;
  std::string method;  // exact_raw, exact_grid, approx_grid
  int n_ok = 0;
  int n_failed = 0;
  Eigen::Vector3d mean_log10 = Eigen::Vector3d::Zero();  // sigma_s2, sigma_e2, rho
  Eigen::Vector3d se_log10 = Eigen::Vector3d::Zero();
  std::vector<std::string> errors;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepCell> cells;
  const SweepCell& raw(double blank_fraction) const;
  const SweepCell& cell(int M, double lambda, double blank_fraction, const std::string& method) const;
};

/// Simulates replicates at fixed uniform locations in the unit square and
/// compares exact fits on raw data with exact and approximate fits on IDW
/// pseudo-data for every (M, lambda, blank fraction).
SweepReport idw_sweep(const SweepConfig& config);
std::string sweep_csv(const SweepReport& report);

}  // namespace gpdiag
