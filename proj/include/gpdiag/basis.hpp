#pragma once

#include "gpdiag/dataset.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace gpdiag {

/// Metadata for one column of Z.
struct BasisColumn {
  std::array<int, 2> m{};          // frequency indices (m1, m2); m2 = 0 in 1-D
  std::array<int, 2> k{};          // signed frequency numerators: omega_a = k_a / M_a
  std::array<double, 2> omega{};   // cycles per unit spacing, in [-1/2, 1/2]
  bool sine = false;               // -2 sin(...) column rather than cos
  int block = 0;                   // 1-D: 0; 2-D: P1..P7 as 1..7
};

/// Spectral design matrix for an equally spaced 1-D series or 2-D grid, with
/// columns orthogonal to each other and to the ones vector. Columns are kept in
/// canonical order: non-increasing spectral density, ties broken by
/// (omega'omega, omega1, omega2, cos before sin).
class SpectralBasis {
 public:
  const Eigen::MatrixXd& Z() const { return Z_; }
  const Eigen::VectorXd& ztz_diag() const { return ztz_; }
  const std::vector<BasisColumn>& columns() const { return columns_; }
  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return static_cast<int>(dims_.size()); }
  Eigen::Index rows() const { return Z_.rows(); }
  Eigen::Index cols() const { return Z_.cols(); }
  std::string id() const;
  /// Widths of the construction blocks P1..P7 (2-D) or {M-1} (1-D).
  const std::vector<int>& block_widths() const { return block_widths_; }

  /// Squared frequency norm times (M1 M2)^2, exact in integers.
  long long omega_sq_key(Eigen::Index j) const;
  double omega_sq(Eigen::Index j) const;

  SpectralBasis permuted(const std::vector<Eigen::Index>& order) const;

 private:
  friend SpectralBasis build_basis_1d(int M);
  friend SpectralBasis build_basis_2d(int M1, int M2);
  friend SpectralBasis basis_from_cache(const std::string& path);

  Eigen::MatrixXd Z_;
  Eigen::VectorXd ztz_;
  std::vector<BasisColumn> columns_;
  std::vector<int> dims_;
  std::vector<int> block_widths_;
};

SpectralBasis build_basis_1d(int M);
SpectralBasis build_basis_2d(int M1, int M2);
/// Builds the basis matching a grid tag's dimensions.
SpectralBasis build_basis(const GridTag& grid);

/// Spectral density as a function of frequency and range.
using SpectralDensityFamily = std::function<double(std::array<double, 2> omega, double rho)>;

/// Returns the permutation putting columns into canonical order and checks
/// that the density is non-increasing along it at rho in {1, 5, 20}.
std::vector<Eigen::Index> canonical_order(const SpectralBasis& basis, const SpectralDensityFamily& density);
SpectralBasis order_columns(const SpectralBasis& basis, const SpectralDensityFamily& density);

struct SpectralProjection {
  Eigen::VectorXd v;
  Eigen::VectorXd v_sq;
  std::string basis_id;
};

/// v = (Z'Z)^{-1/2} Z' data, with data in lattice order.
SpectralProjection project(const SpectralBasis& basis, const Eigen::VectorXd& data);
/// Projects a per-observation vector of a grid dataset.
SpectralProjection project(const SpectralBasis& basis, const Dataset& grid_data, const Eigen::VectorXd& values);

/// On-disk cache of Z: a 16-byte header (magic "GPZB", version, M1, M2 as
/// little-endian uint32, M2 = 0 for 1-D) followed by row-major float64 data.
void save_basis_cache(const SpectralBasis& basis, const std::string& path);
SpectralBasis basis_from_cache(const std::string& path);
/// Loads `dir/basis_M1xM2.bin` if present, otherwise builds and writes it.
SpectralBasis load_or_build_basis(const std::string& dir, const std::vector<int>& dims);

}  // namespace gpdiag
