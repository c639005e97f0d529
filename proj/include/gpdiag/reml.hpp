#pragma once

#include "gpdiag/basis.hpp"
#include "gpdiag/covariance.hpp"
#include "gpdiag/dataset.hpp"
#include "gpdiag/optimizer.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace gpdiag {

enum class Method { exact, approximate };
std::string to_string(Method m);
Method method_from_string(const std::string& text);

/// Log restricted likelihood of the exact model, additive constant omitted.
/// Works from a Cholesky factor of V and a QR of L^{-1} X; no explicit inverse.
double exact_rl(const Dataset& data, const DesignMatrix& design, const VarianceParams& params);
double exact_rl(const Eigen::MatrixXd& distances, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                const VarianceParams& params);
/// The same objective for a caller-supplied covariance matrix.
double restricted_loglik(const Eigen::MatrixXd& V, const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

/// -0.5 sum_j [log(s2 a_j + e2) + v_j^2 / (s2 a_j + e2)], constant omitted.
double approx_rl(const Eigen::VectorXd& v_sq, const Eigen::VectorXd& a, const VarianceParams& params);

struct GlsResult {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov;
  Eigen::VectorXd se;
  Eigen::VectorXd p_value;  // two-sided Wald, normal reference
};

GlsResult gls_beta(const Eigen::VectorXd& y, const DesignMatrix& design, const Eigen::MatrixXd& V);
GlsResult gls_beta(const Dataset& data, const DesignMatrix& design, const CovarianceMatrices& V);

struct ParameterBounds {
  double variance_lower = 1e-6;
  double variance_upper = 1e6;
  double range_lower_factor = 1e-2;  // times the largest pairwise distance
  double range_upper_factor = 1e2;
};

struct FitOptions {
  Method method = Method::exact;
  Smoothness nu = Smoothness::half;
  OptimizerConfig optimizer;
  ParameterBounds bounds;
  std::string basis_cache_dir;  // empty = build the basis in memory
};

struct FitResult {
  Method method = Method::exact;
  Smoothness nu = Smoothness::half;
  VarianceParams params;             // rho in data units
  std::optional<double> rho_lattice; // approximate fits: rho in lattice steps
  double objective = 0.0;
  GlsResult beta;
  std::optional<Eigen::VectorXd> v_sq;
  std::string basis_id;
  bool converged = false;
  int n_starts = 0;
  std::vector<std::string> warnings;
  std::vector<StartRecord> trace;  // search space: log sigma_s2, log sigma_e2, log rho
};

/// Maximizes the exact or approximate restricted likelihood over
/// (sigma_s2, sigma_e2, rho) on the log scale. Approximate fits require grid
/// data: X is regressed out first and v is computed from the residuals.
FitResult fit(const Dataset& data, const DesignMatrix& design, const FitOptions& options);

/// Builds the spectral basis for a grid dataset, through the cache when configured.
SpectralBasis basis_for(const Dataset& grid_data, const std::string& cache_dir = {});

/// Spectral-domain quantities of a grid fit: v_j^2 of the residuals and
/// a_j at the fitted range in lattice units.
struct SpectralView {
  Eigen::VectorXd v_sq;
  Eigen::VectorXd a;
  VarianceParams lattice_params;  // rho in lattice steps
};
SpectralView spectral_view(const SpectralBasis& basis, const Dataset& grid_data, const DesignMatrix& design,
                           const FitResult& fit);

/// Covariance implied by a fit, in observation order: the exact-model V, or for
/// approximate fits the spectral approximation mapped back from lattice order.
Eigen::MatrixXd fitted_covariance(const Dataset& data, const FitResult& fit, const SpectralBasis* basis = nullptr);

}  // namespace gpdiag
