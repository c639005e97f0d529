#pragma once

#include "gpdiag/basis.hpp"
#include "gpdiag/dataset.hpp"
#include "gpdiag/reml.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace gpdiag {

struct VjEntry {
  int j = 0;  // 1-based column index in canonical order
  double v_sq = 0.0;
  double fitted = 0.0;  // sigma_s2 a_j(rho) + sigma_e2
};

/// Frequency-index band [first, last], width 100, for colouring plots.
struct IndexBand {
  int first = 0;
  int last = 0;
};

struct VjSquaredSeries {
  std::vector<VjEntry> entries;
  std::vector<IndexBand> bands;
  std::string params_ref;
};

VjSquaredSeries vj_squared_series(const Eigen::VectorXd& v_sq, const Eigen::VectorXd& a,
                                  const VarianceParams& lattice_params, const std::string& params_ref = {});
VjSquaredSeries vj_squared_series(const SpectralView& view, const std::string& params_ref = {});

std::vector<IndexBand> index_bands(int count, int width = 100);

struct OriginRegression {
  double slope = 0.0;
  double se = 0.0;
  double p_value = 1.0;  // two-sided t with n - 1 degrees of freedom
  Eigen::VectorXd cook;
  std::vector<std::string> warnings;
};

/// Least squares through the origin with Cook's distances
/// D_i = r_i^2 h_i / (s^2 (1 - h_i)^2), h_i = x_i^2 / sum x^2, s^2 = RSS / (n - 1).
/// A point with h_i = 1 gets D_i = +inf and a warning.
OriginRegression regress_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd cooks_distances(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

enum class Domain { observation, spectral };
std::string to_string(Domain d);
Domain domain_from_string(const std::string& text);

struct AvpPoint {
  int id = 0;  // 1-based observation row, or 1-based j
  double x = 0.0;
  double y = 0.0;
  double cook = 0.0;
};

struct AvpResult {
  Domain domain = Domain::observation;
  std::string covariate_name;
  std::vector<AvpPoint> points;
  double slope = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  std::vector<std::string> warnings;

  /// Ids of the k points with the largest Cook's distances, largest first.
  std::vector<int> top_cook(int k = 5) const;
};

/// Whitened added variable plot: P V^{-1/2} y against P V^{-1/2} C, with the
/// symmetric inverse square root of V and P the residual projector of V^{-1/2} X.
/// The candidate is standardized first.
AvpResult avp_observation(const Dataset& data, const DesignMatrix& design, const Covariate& candidate,
                          const Eigen::MatrixXd& V);

/// Spectral added variable plot: D v* against D v*_C with
/// D = Diag(1 / sqrt(sigma_s2 a_j + sigma_e2)). Candidate standardized first.
AvpResult avp_spectral(const Dataset& grid_data, const SpectralBasis& basis, const DesignMatrix& design,
                       const Covariate& candidate, const SpectralView& view);

struct CandidateRank {
  std::string name;
  double slope = 0.0;
  double p_value = 1.0;
  std::vector<int> top_cook;
  std::optional<bool> covers_focus;  // focus_j among the top five Cook's distances
};

/// Orders candidates by ascending p-value (stable for ties).
std::vector<CandidateRank> rank_candidates(const std::vector<AvpResult>& avps, std::optional<int> focus_j = {});

}  // namespace gpdiag
