#pragma once

#include "gpdiag/dataset.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>

namespace gpdiag {

class SpectralBasis;

/// Matérn smoothness. Only the closed-form members of the family are supported.
enum class Smoothness { half, three_halves, five_halves, infinite };

double nu_value(Smoothness nu);  // +inf for Smoothness::infinite
Smoothness smoothness_from_value(double nu);
Smoothness smoothness_from_string(const std::string& text);
std::string to_string(Smoothness nu);

struct VarianceParams {
  double sigma_s2 = 1.0;
  double sigma_e2 = 1.0;
  double rho = 1.0;
  Smoothness nu = Smoothness::half;

  void validate() const;
};

/// K(d; rho, nu). nu = 1/2 is exp(-sqrt(2) d / rho); nu = 3/2, 5/2 use the
/// sqrt(2 nu) d / rho argument; nu = inf is exp(-d^2 / (2 rho^2)).
double correlation(double d, double rho, Smoothness nu);

/// Spectral density at frequency omega (cycles per unit spacing).
double spectral_density_1d(double omega, double rho, Smoothness nu);
double spectral_density_2d(std::array<double, 2> omega, double rho, Smoothness nu);
/// Density as a function of squared frequency norm, for dimension 1 or 2.
double spectral_density(double omega_sq, int dim, double rho, Smoothness nu);

/// a_j(rho) = phi(omega_{m(j)}; rho, nu) over the basis columns.
Eigen::VectorXd a_sequence(const SpectralBasis& basis, double rho, Smoothness nu);

struct CovarianceMatrices {
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd R_diag;  // R = Diag(R_diag)
  Eigen::MatrixXd V;
};

/// Fills the correlation matrix K(D; rho, nu) from a distance matrix.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& distances, double rho, Smoothness nu);

CovarianceMatrices build_V(const Dataset& data, const VarianceParams& params);
CovarianceMatrices build_V(const Eigen::MatrixXd& distances, const VarianceParams& params);

/// Cholesky factor of a covariance matrix. When the plain factorization fails
/// the jitter ladder 1e-10, 1e-8, 1e-6 (times the mean diagonal) is added to
/// the diagonal before retrying.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
JitteredCholesky factor_with_jitter(Eigen::MatrixXd A);

/// Z G Z' + sigma_e2 I with G = sigma_s2 Diag(a_j / c_j), so that the
/// projected covariance is exactly sigma_s2 Diag(a_j) + sigma_e2 I.
Eigen::MatrixXd approx_covariance(const SpectralBasis& basis, const VarianceParams& params);

/// 0.5 log[det(P Sigma P + R) / det(Sigma + R)] - M + trace[(P Sigma P + R)^{-1} (Sigma + R)].
double kl_projection_distance(const Eigen::MatrixXd& Sigma, const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

}  // namespace gpdiag
