#pragma once

#include "gpdiag/covariance.hpp"
#include "gpdiag/dataset.hpp"
#include "gpdiag/reml.hpp"
#include "gpdiag/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gpdiag {

/// Lattice coordinates 1..M (1-D) or {1..M1} x {1..M2} with the last axis fastest.
Eigen::MatrixXd lattice_coords(const std::vector<int>& dims);

/// Draws GP-plus-noise vectors at fixed locations; the Cholesky factor of
/// sigma_s2 K is computed once and reused across draws.
class GpSampler {
 public:
  GpSampler(const Eigen::MatrixXd& coords, const VarianceParams& truth);
  Eigen::VectorXd draw(Rng& rng) const;
  Eigen::VectorXd draw_process(Rng& rng) const;  // GP part only

 private:
  VarianceParams truth_;
  Eigen::MatrixXd L_;  // empty when sigma_s2 == 0
  Eigen::Index n_;
};

struct SimConfig {
  std::vector<int> dims{200};
  VarianceParams truth{2.0, 5.0, 5.0, Smoothness::half};
  std::function<double(const Location&)> mean_fn;  // optional fixed-effect surface
  std::uint64_t seed = 1;
  int replicates = 1;
};

/// Replicate r uses the stream (seed, r).
Dataset simulate_gp(const SimConfig& config, int replicate = 0);

struct Contamination {
  enum class Kind { none, outlier, mean_shift, range_change };
  Kind kind = Kind::none;
  int position = 100;  // outlier: 1-based index
  double value = 18.0;
  int start = 101;     // mean_shift / range_change: 1-based first index
  int length = 100;
  double amount = 5.0;
  double rho = 16.67;

  static Contamination outlier(int position, double value);
  static Contamination mean_shift(int start, int length, double amount);
  static Contamination range_change(int start, int length, double rho);
  std::string label() const;
};

/// Indices refer to lattice order for grid data and row order otherwise. A
/// range change replaces the span with a fresh draw (GP with the new range
/// plus noise) using `truth`'s variances and smoothness.
Dataset contaminate(const Dataset& data, const Contamination& c, const VarianceParams& truth, Rng& rng);

struct ExperimentConfig {
  std::vector<VarianceParams> truths;
  int M = 200;
  std::vector<Contamination> contaminations;  // applied to the same base draw; "none" is always run
  std::vector<Method> methods{Method::exact, Method::approximate};
  int replicates = 20;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
  int threads = 0;
};

/// The eight standard truth combinations: sigma_s2 in {2, 10}, sigma_e2 in {5, 0.1}, rho in {5, 16.67}.
std::vector<VarianceParams> standard_truths();
/// Named presets: "table2" (outlier), "mean_shift", "range_change".
ExperimentConfig experiment_preset(const std::string& name, int replicates, std::uint64_t seed);

struct ExperimentCell {
  VarianceParams truth;
  std::string contamination;
  Method method = Method::exact;
  int n_ok = 0;
  int n_failed = 0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();  // sigma_s2, sigma_e2, rho
  Eigen::Vector3d se = Eigen::Vector3d::Zero();    // Monte Carlo standard errors
  std::vector<Eigen::Vector3d> estimates;          // per successful replicate
};

struct ExperimentTable {
  std::vector<ExperimentCell> cells;
  const ExperimentCell& find(const VarianceParams& truth, const std::string& contamination, Method method) const;
};

ExperimentTable run_experiment(const ExperimentConfig& config);
std::string experiment_csv(const ExperimentTable& table);

struct TrendOutlierDemo {
  Dataset data;             // outcome plus covariates "ns_trend" and "outliers"
  VarianceParams truth;
  std::vector<std::size_t> outlier_rows;
};

/// 20 x 20 grid, truth (12, 5, rho = 5), nu = 1/2, plus a north-south linear
/// trend (rising by `trend_rise` across the grid) and 12 added at ten random sites.
TrendOutlierDemo appendix_g_demo(std::uint64_t seed, double trend_rise = 6.0);

/// Uniform points in the unit square with an optional blank wedge (fraction 0, 1/8 or 1/4).
Eigen::MatrixXd uniform_square(int n, Rng& rng);
std::vector<std::size_t> outside_blank_wedge(const Eigen::MatrixXd& coords, double blank_fraction);

}  // namespace gpdiag
