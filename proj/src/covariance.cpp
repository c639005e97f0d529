#include "gpdiag/covariance.hpp"

#include "gpdiag/basis.hpp"
#include "gpdiag/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gpdiag {

double nu_value(Smoothness nu) {
  switch (nu) {
    case Smoothness::half: return 0.5;
    case Smoothness::three_halves: return 1.5;
    case Smoothness::five_halves: return 2.5;
    case Smoothness::infinite: return std::numeric_limits<double>::infinity();
  }
  return 0.5;
}

Smoothness smoothness_from_value(double nu) {
  if (std::isinf(nu) && nu > 0) return Smoothness::infinite;
  if (nu == 0.5) return Smoothness::half;
  if (nu == 1.5) return Smoothness::three_halves;
  if (nu == 2.5) return Smoothness::five_halves;
  fail(ErrorKind::parameter, "unsupported smoothness nu=" + std::to_string(nu) + " (use 0.5, 1.5, 2.5 or inf)");
}

Smoothness smoothness_from_string(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf") return Smoothness::infinite;
  if (text == "0.5" || text == "1/2") return Smoothness::half;
  if (text == "1.5" || text == "3/2") return Smoothness::three_halves;
  if (text == "2.5" || text == "5/2") return Smoothness::five_halves;
  fail(ErrorKind::parameter, "unsupported smoothness '" + text + "' (use 0.5, 1.5, 2.5 or inf)");
}

std::string to_string(Smoothness nu) {
  switch (nu) {
    case Smoothness::half: return "0.5";
    case Smoothness::three_halves: return "1.5";
    case Smoothness::five_halves: return "2.5";
    case Smoothness::infinite: return "inf";
  }
  return "0.5";
}

void VarianceParams::validate() const {
  auto non_negative = [](double v, const char* name) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      fail(ErrorKind::parameter, std::string(name) + " must be finite and >= 0 (got " + std::to_string(v) + ")");
    }
  };
  non_negative(sigma_s2, "sigma_s2");
  non_negative(sigma_e2, "sigma_e2");
  if (!(sigma_s2 + sigma_e2 > 0.0)) fail(ErrorKind::parameter, "sigma_s2 + sigma_e2 must be > 0");
  if (!(std::isfinite(rho) && rho > 0.0)) {
    fail(ErrorKind::parameter, "rho must be finite and > 0 (got " + std::to_string(rho) + ")");
  }
}

double correlation(double d, double rho, Smoothness nu) {
  if (d < 0.0) fail(ErrorKind::parameter, "distance must be non-negative");
  switch (nu) {
    case Smoothness::half: return std::exp(-std::numbers::sqrt2 * d / rho);
    case Smoothness::three_halves: {
      const double x = std::sqrt(3.0) * d / rho;
      return (1.0 + x) * std::exp(-x);
    }
    case Smoothness::five_halves: {
      const double x = std::sqrt(5.0) * d / rho;
      return (1.0 + x + x * x / 3.0) * std::exp(-x);
    }
    case Smoothness::infinite: return std::exp(-d * d / (2.0 * rho * rho));
  }
  return 0.0;
}

double spectral_density(double omega_sq, int dim, double rho, Smoothness nu) {
  if (dim != 1 && dim != 2) fail(ErrorKind::dimension, "spectral density needs dimension 1 or 2");
  const double pi = std::numbers::pi;
  const double D = dim;
  if (nu == Smoothness::infinite) {
    return std::pow(std::sqrt(pi) * rho / 2.0, D) * std::exp(-pi * pi * rho * rho * omega_sq / 4.0);
  }
  const double n = nu_value(nu);
  const double pr = pi * rho;
  const double log_c = std::lgamma(n + D / 2.0) + n * std::log(4.0 * n) - (D / 2.0) * std::log(pi) - std::lgamma(n) -
                       2.0 * n * std::log(pr);
  return std::exp(log_c) * std::pow(4.0 * n / (pr * pr) + omega_sq, -(n + D / 2.0));
}

double spectral_density_1d(double omega, double rho, Smoothness nu) { return spectral_density(omega * omega, 1, rho, nu); }

double spectral_density_2d(std::array<double, 2> omega, double rho, Smoothness nu) {
  return spectral_density(omega[0] * omega[0] + omega[1] * omega[1], 2, rho, nu);
}

Eigen::VectorXd a_sequence(const SpectralBasis& basis, double rho, Smoothness nu) {
  Eigen::VectorXd a(basis.cols());
  for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = spectral_density(basis.omega_sq(j), basis.dim(), rho, nu);
  return a;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& distances, double rho, Smoothness nu) {
  if (distances.rows() != distances.cols()) fail(ErrorKind::dimension, "distance matrix must be square");
  const Eigen::Index n = distances.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      K(i, j) = correlation(distances(i, j), rho, nu);
      K(j, i) = K(i, j);
    }
  }
  return K;
}

CovarianceMatrices build_V(const Eigen::MatrixXd& distances, const VarianceParams& params) {
  params.validate();
  CovarianceMatrices m;
  m.Sigma = params.sigma_s2 * correlation_matrix(distances, params.rho, params.nu);
  m.R_diag = Eigen::VectorXd::Constant(distances.rows(), params.sigma_e2);
  m.V = m.Sigma;
  m.V.diagonal() += m.R_diag;
  return m;
}

CovarianceMatrices build_V(const Dataset& data, const VarianceParams& params) {
  return build_V(data.distance_matrix(), params);
}

JitteredCholesky factor_with_jitter(Eigen::MatrixXd A) {
  if (A.rows() != A.cols()) fail(ErrorKind::dimension, "matrix to factor must be square");
  const double scale = A.diagonal().mean();
  JitteredCholesky out;
  for (double eps : {0.0, 1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd B = A;
    if (eps > 0.0) B.diagonal().array() += eps * scale;
    out.llt.compute(B);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = eps * scale;
      return out;
    }
  }
  fail(ErrorKind::numerical, "covariance matrix is not positive definite even after jitter");
}

Eigen::MatrixXd approx_covariance(const SpectralBasis& basis, const VarianceParams& params) {
  params.validate();
  const Eigen::VectorXd g = params.sigma_s2 * a_sequence(basis, params.rho, params.nu).cwiseQuotient(basis.ztz_diag());
  Eigen::MatrixXd V = basis.Z() * g.asDiagonal() * basis.Z().transpose();
  V.diagonal().array() += params.sigma_e2;
  return V;
}

double kl_projection_distance(const Eigen::MatrixXd& Sigma, const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  const Eigen::Index M = Sigma.rows();
  if (Sigma.cols() != M || R.rows() != M || R.cols() != M || P.rows() != M || P.cols() != M) {
    fail(ErrorKind::dimension, "KL distance needs square matrices of equal size");
  }
  const Eigen::MatrixXd A = P * Sigma * P + R;
  const Eigen::MatrixXd B = Sigma + R;
  const auto la = factor_with_jitter(A);
  const auto lb = factor_with_jitter(B);
  const double logdet_a = 2.0 * la.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_b = 2.0 * lb.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace = la.llt.solve(B).trace();
  return 0.5 * (logdet_a - logdet_b) - static_cast<double>(M) + trace;
}

}  // namespace gpdiag
