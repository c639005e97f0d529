#include "gpdiag/diagnostics.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/projection.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gpdiag {

std::vector<IndexBand> index_bands(int count, int width) {
  std::vector<IndexBand> out;
  for (int first = 1; first <= count; first += width) out.push_back({first, std::min(count, first + width - 1)});
  return out;
}

VjSquaredSeries vj_squared_series(const Eigen::VectorXd& v_sq, const Eigen::VectorXd& a,
                                  const VarianceParams& lattice_params, const std::string& params_ref) {
  if (v_sq.size() != a.size()) fail(ErrorKind::dimension, "v_sq and a_j lengths differ");
  VjSquaredSeries s;
  s.params_ref = params_ref;
  for (Eigen::Index j = 0; j < v_sq.size(); ++j) {
    const double fitted = lattice_params.sigma_s2 * a(j) + lattice_params.sigma_e2;
    if (!(fitted > 0.0)) fail(ErrorKind::domain, "fitted v_j^2 mean must be positive");
    s.entries.push_back({static_cast<int>(j + 1), v_sq(j), fitted});
  }
  s.bands = index_bands(static_cast<int>(v_sq.size()));
  return s;
}

VjSquaredSeries vj_squared_series(const SpectralView& view, const std::string& params_ref) {
  return vj_squared_series(view.v_sq, view.a, view.lattice_params, params_ref);
}

OriginRegression regress_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  if (y.size() != n) fail(ErrorKind::dimension, "x and y lengths differ");
  if (n < 3) fail(ErrorKind::precondition, "regression through the origin needs at least 3 points");
  const double sxx = x.squaredNorm();
  if (!(sxx > 0.0)) fail(ErrorKind::rank, "all x values are zero");
  OriginRegression r;
  r.slope = x.dot(y) / sxx;
  const Eigen::VectorXd resid = y - r.slope * x;
  const double s2 = resid.squaredNorm() / static_cast<double>(n - 1);
  r.se = std::sqrt(s2 / sxx);
  if (r.se > 0.0) {
    const boost::math::students_t dist(static_cast<double>(n - 1));
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.slope / r.se)));
  } else {
    r.p_value = 0.0;
  }
  r.cook.resize(n);
  bool degenerate = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = x(i) * x(i) / sxx;
    if (h >= 1.0 - 1e-12) {
      r.cook(i) = std::numeric_limits<double>::infinity();
      degenerate = true;
    } else if (s2 > 0.0) {
      r.cook(i) = resid(i) * resid(i) * h / (s2 * (1.0 - h) * (1.0 - h));
    } else {
      r.cook(i) = 0.0;
    }
  }
  if (degenerate) r.warnings.push_back("influence-degenerate: a single point carries all leverage");
  return r;
}

Eigen::VectorXd cooks_distances(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return regress_through_origin(x, y).cook;
}

std::string to_string(Domain d) { return d == Domain::observation ? "observation" : "spectral"; }

Domain domain_from_string(const std::string& text) {
  if (text == "observation") return Domain::observation;
  if (text == "spectral") return Domain::spectral;
  fail(ErrorKind::parameter, "unknown domain '" + text + "' (use observation or spectral)");
}

std::vector<int> AvpResult::top_cook(int k) const {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return points[a].cook > points[b].cook; });
  std::vector<int> out;
  for (std::size_t i = 0; i < idx.size() && static_cast<int>(i) < k; ++i) out.push_back(points[idx[i]].id);
  return out;
}

namespace {

void check_candidate(const DesignMatrix& design, const Covariate& candidate, Eigen::Index n) {
  if (candidate.values.size() != n) fail(ErrorKind::dimension, "candidate length does not match dataset size");
  if (std::find(design.names.begin(), design.names.end(), candidate.name) != design.names.end()) {
    fail(ErrorKind::precondition, "candidate '" + candidate.name + "' is already in model");
  }
}

AvpResult assemble(Domain domain, const std::string& name, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   double input_norm) {
  if (!(x.norm() > 1e-8 * input_norm)) {
    fail(ErrorKind::rank, "candidate '" + name + "' is collinear with the design");
  }
  const OriginRegression r = regress_through_origin(x, y);
  AvpResult out;
  out.domain = domain;
  out.covariate_name = name;
  out.slope = r.slope;
  out.se = r.se;
  out.p_value = r.p_value;
  out.warnings = r.warnings;
  out.points.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out.points.push_back({static_cast<int>(i + 1), x(i), y(i), r.cook(i)});
  return out;
}

}  // namespace

AvpResult avp_observation(const Dataset& data, const DesignMatrix& design, const Covariate& candidate,
                          const Eigen::MatrixXd& V) {
  const auto n = static_cast<Eigen::Index>(data.size());
  check_candidate(design, candidate, n);
  if (V.rows() != n || V.cols() != n) fail(ErrorKind::dimension, "V does not match dataset size");
  const Eigen::VectorXd c = standardize(candidate.values).values;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V);
  if (eig.info() != Eigen::Success) fail(ErrorKind::numerical, "eigendecomposition of V failed");
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) fail(ErrorKind::numerical, "V is not positive definite");
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  const Eigen::MatrixXd W = Q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();

  DesignMatrix whitened{design.names, W * design.X};
  const Eigen::VectorXd wc = W * c;
  const Eigen::VectorXd x = residualize(wc, whitened).y_star;
  const Eigen::VectorXd y = residualize(W * data.y(), whitened).y_star;
  return assemble(Domain::observation, candidate.name, x, y, wc.norm());
}

AvpResult avp_spectral(const Dataset& grid_data, const SpectralBasis& basis, const DesignMatrix& design,
                       const Covariate& candidate, const SpectralView& view) {
  if (!grid_data.is_grid()) fail(ErrorKind::precondition, "requires grid (run `grid` first)");
  const auto n = static_cast<Eigen::Index>(grid_data.size());
  check_candidate(design, candidate, n);
  const Eigen::VectorXd c = standardize(candidate.values).values;
  const Eigen::VectorXd v_star = project(basis, grid_data, residualize(grid_data.y(), design).y_star).v;
  const Eigen::VectorXd vc_star = project(basis, grid_data, residualize(c, design).y_star).v;
  const auto& p = view.lattice_params;
  const Eigen::VectorXd d = (p.sigma_s2 * view.a.array() + p.sigma_e2).rsqrt().matrix();
  return assemble(Domain::spectral, candidate.name, d.cwiseProduct(vc_star), d.cwiseProduct(v_star),
                  project(basis, grid_data, c).v.cwiseProduct(d).norm());
}

std::vector<CandidateRank> rank_candidates(const std::vector<AvpResult>& avps, std::optional<int> focus_j) {
  std::vector<CandidateRank> out;
  for (const auto& a : avps) {
    CandidateRank r;
    r.name = a.covariate_name;
    r.slope = a.slope;
    r.p_value = a.p_value;
    r.top_cook = a.top_cook(5);
    if (focus_j) r.covers_focus = std::find(r.top_cook.begin(), r.top_cook.end(), *focus_j) != r.top_cook.end();
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const CandidateRank& a, const CandidateRank& b) { return a.p_value < b.p_value; });
  return out;
}

}  // namespace gpdiag
