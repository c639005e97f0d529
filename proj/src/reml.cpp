#include "gpdiag/reml.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/projection.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gpdiag {

std::string to_string(Method m) { return m == Method::exact ? "exact" : "approximate"; }

Method method_from_string(const std::string& text) {
  if (text == "exact") return Method::exact;
  if (text == "approximate" || text == "approx") return Method::approximate;
  fail(ErrorKind::parameter, "unknown method '" + text + "' (use exact or approximate)");
}

namespace {

std::string describe(const VarianceParams& p) {
  std::ostringstream s;
  s << "(sigma_s2=" << p.sigma_s2 << ", sigma_e2=" << p.sigma_e2 << ", rho=" << p.rho << ")";
  return s.str();
}

// Lower triangle of V only; LLT reads nothing else.
void fill_V_lower(Eigen::MatrixXd& V, const Eigen::MatrixXd& D, const VarianceParams& p) {
  const Eigen::Index n = D.rows();
  V.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    V(j, j) = p.sigma_s2 + p.sigma_e2;
    for (Eigen::Index i = j + 1; i < n; ++i) V(i, j) = p.sigma_s2 * correlation(D(i, j), p.rho, p.nu);
  }
}

double rl_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const auto L = llt.matrixL();
  const double logdet_v = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::MatrixXd W = L.solve(X);
  const Eigen::VectorXd z = L.solve(y);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  const Eigen::VectorXd r = qr.matrixQR().diagonal().head(X.cols()).cwiseAbs();
  if (!(r.minCoeff() > 1e-12 * std::max(1.0, r.maxCoeff()))) {
    fail(ErrorKind::numerical, "X'V^{-1}X is singular");
  }
  const double logdet_xvx = 2.0 * r.array().log().sum();
  const Eigen::VectorXd qz = qr.householderQ().transpose() * z;
  const double quad = qz.tail(qz.size() - X.cols()).squaredNorm();
  return -0.5 * (logdet_v + logdet_xvx + quad);
}

}  // namespace

double restricted_loglik(const Eigen::MatrixXd& V, const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  if (V.rows() != y.size() || V.cols() != y.size() || X.rows() != y.size()) {
    fail(ErrorKind::dimension, "restricted likelihood inputs do not conform");
  }
  const auto f = factor_with_jitter(V);
  return rl_from_factor(f.llt, y, X);
}

double exact_rl(const Eigen::MatrixXd& distances, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                const VarianceParams& params) {
  params.validate();
  if (distances.rows() != y.size() || X.rows() != y.size()) fail(ErrorKind::dimension, "exact_rl inputs do not conform");
  Eigen::MatrixXd V;
  fill_V_lower(V, distances, params);
  try {
    const auto f = factor_with_jitter(std::move(V));
    return rl_from_factor(f.llt, y, X);
  } catch (const Error& e) {
    fail(ErrorKind::numerical, std::string(e.what()) + " at " + describe(params));
  }
}

double exact_rl(const Dataset& data, const DesignMatrix& design, const VarianceParams& params) {
  return exact_rl(data.distance_matrix(), data.y(), design.X, params);
}

double approx_rl(const Eigen::VectorXd& v_sq, const Eigen::VectorXd& a, const VarianceParams& params) {
  if (v_sq.size() != a.size()) fail(ErrorKind::dimension, "v_sq and a_j lengths differ");
  double total = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double m = params.sigma_s2 * a(j) + params.sigma_e2;
    if (!(m > 0.0)) fail(ErrorKind::domain, "sigma_s2 a_j + sigma_e2 must be positive at " + describe(params));
    total += std::log(m) + v_sq(j) / m;
  }
  return -0.5 * total;
}

GlsResult gls_beta(const Eigen::VectorXd& y, const DesignMatrix& design, const Eigen::MatrixXd& V) {
  const auto& X = design.X;
  if (V.rows() != y.size() || X.rows() != y.size()) fail(ErrorKind::dimension, "GLS inputs do not conform");
  const auto f = factor_with_jitter(V);
  const auto L = f.llt.matrixL();
  const Eigen::MatrixXd W = L.solve(X);
  const Eigen::VectorXd z = L.solve(y);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd rd = R.diagonal().cwiseAbs();
  if (!(rd.minCoeff() > 1e-10 * rd.maxCoeff())) fail(ErrorKind::rank, "X'V^{-1}X is rank deficient");
  const Eigen::VectorXd qz = (qr.householderQ().transpose() * z).head(p);
  GlsResult g;
  g.names = design.names;
  g.beta = R.triangularView<Eigen::Upper>().solve(qz);
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  g.cov = Rinv * Rinv.transpose();
  g.se = g.cov.diagonal().cwiseSqrt();
  g.p_value.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) g.p_value(k) = std::erfc(std::abs(g.beta(k) / g.se(k)) / std::sqrt(2.0));
  return g;
}

GlsResult gls_beta(const Dataset& data, const DesignMatrix& design, const CovarianceMatrices& V) {
  return gls_beta(data.y(), design, V.V);
}

SpectralBasis basis_for(const Dataset& grid_data, const std::string& cache_dir) {
  if (!grid_data.is_grid()) fail(ErrorKind::precondition, "requires grid (run `grid` first)");
  const auto& dims = grid_data.grid()->dims;
  return cache_dir.empty() ? build_basis(*grid_data.grid()) : load_or_build_basis(cache_dir, dims);
}

namespace {

double lattice_extent(const GridTag& g) {
  double s = 0.0;
  for (int M : g.dims) s += static_cast<double>(M - 1) * (M - 1);
  return std::sqrt(s);
}

void note_bounds(FitResult& r, const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  static const char* names[] = {"sigma_s2", "sigma_e2", "rho"};
  for (int k = 0; k < 3; ++k) {
    if (x(k) - lo(k) < 1e-6) r.warnings.push_back(std::string(names[k]) + " is at its lower bound");
    if (hi(k) - x(k) < 1e-6) r.warnings.push_back(std::string(names[k]) + " is at its upper bound");
  }
}

}  // namespace

FitResult fit(const Dataset& data, const DesignMatrix& design, const FitOptions& options) {
  if (design.X.rows() != static_cast<Eigen::Index>(data.size())) {
    fail(ErrorKind::dimension, "design rows do not match dataset size");
  }
  const auto& b = options.bounds;
  if (!(b.variance_lower > 0 && b.variance_lower < b.variance_upper && b.range_lower_factor > 0 &&
        b.range_lower_factor < b.range_upper_factor)) {
    fail(ErrorKind::parameter, "invalid parameter bounds");
  }
  FitResult r;
  r.method = options.method;
  r.nu = options.nu;
  r.n_starts = options.optimizer.starts;

  const ResidualProjection res = residualize(data.y(), design);

  std::optional<SpectralBasis> basis;
  double extent;
  double unit = 1.0;  // data units per lattice step
  if (options.method == Method::approximate) {
    if (!data.is_grid()) fail(ErrorKind::precondition, "approximate method requires grid (run `grid` first)");
    basis = basis_for(data, options.basis_cache_dir);
    extent = lattice_extent(*data.grid());
    if (auto s = data.grid()->uniform_spacing()) {
      unit = *s;
    } else {
      r.warnings.push_back("grid spacing differs between axes; rho is reported in lattice steps");
    }
  } else {
    extent = data.extent();
    if (!(extent > 0)) fail(ErrorKind::validation, "exact fit needs at least two distinct locations");
  }

  Eigen::VectorXd lo(3), hi(3);
  lo << std::log(b.variance_lower), std::log(b.variance_lower), std::log(b.range_lower_factor * extent);
  hi << std::log(b.variance_upper), std::log(b.variance_upper), std::log(b.range_upper_factor * extent);
  auto to_params = [&](const Eigen::VectorXd& x) {
    return VarianceParams{std::exp(x(0)), std::exp(x(1)), std::exp(x(2)), options.nu};
  };

  Objective objective;
  Eigen::MatrixXd D;
  Eigen::VectorXd v_sq;
  if (options.method == Method::approximate) {
    v_sq = project(*basis, data, res.y_star).v_sq;
    objective = [&](const Eigen::VectorXd& x) {
      const VarianceParams p = to_params(x);
      return approx_rl(v_sq, a_sequence(*basis, p.rho, p.nu), p);
    };
    r.v_sq = v_sq;
    r.basis_id = basis->id();
  } else {
    D = data.distance_matrix();
    objective = [&](const Eigen::VectorXd& x) { return exact_rl(D, data.y(), design.X, to_params(x)); };
    if (data.is_grid()) {
      try {
        const auto bg = basis_for(data, options.basis_cache_dir);
        r.v_sq = project(bg, data, res.y_star).v_sq;
        r.basis_id = bg.id();
      } catch (const Error&) {
        // Lattices with an odd side have no spectral basis; the fit itself is unaffected.
      }
    }
  }

  Eigen::VectorXd best;
  if (res.y_star.norm() <= 1e-12 * std::max(1.0, data.y().norm())) {
    best = lo;
    best(2) = 0.5 * (lo(2) + hi(2));
    r.objective = objective(best);
    r.converged = true;
    r.n_starts = 0;
    r.warnings.push_back("degenerate data: the outcome has no variation after removing fixed effects");
  } else {
    const OptimizationResult opt = maximize(objective, lo, hi, options.optimizer);
    best = opt.x;
    r.objective = opt.value;
    r.converged = opt.converged;
    r.trace = opt.trace;
    note_bounds(r, best, lo, hi);
  }

  const VarianceParams fitted = to_params(best);
  r.params = fitted;
  if (options.method == Method::approximate) {
    r.rho_lattice = fitted.rho;
    r.params.rho = fitted.rho * unit;
  }
  r.beta = gls_beta(data.y(), design, fitted_covariance(data, r, basis ? &*basis : nullptr));
  return r;
}

Eigen::MatrixXd fitted_covariance(const Dataset& data, const FitResult& fit, const SpectralBasis* basis) {
  if (fit.method == Method::exact) return build_V(data, fit.params).V;
  std::optional<SpectralBasis> own;
  if (!basis) {
    own = basis_for(data);
    basis = &*own;
  }
  VarianceParams lp = fit.params;
  lp.rho = fit.rho_lattice.value_or(fit.params.rho);
  const Eigen::MatrixXd Vl = approx_covariance(*basis, lp);
  const auto& row = data.grid()->lattice_row;
  const Eigen::Index n = Vl.rows();
  Eigen::MatrixXd V(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      V(i, k) = Vl(static_cast<Eigen::Index>(row[static_cast<std::size_t>(i)]), static_cast<Eigen::Index>(row[static_cast<std::size_t>(k)]));
  return V;
}

SpectralView spectral_view(const SpectralBasis& basis, const Dataset& grid_data, const DesignMatrix& design,
                           const FitResult& fit) {
  if (!grid_data.is_grid()) fail(ErrorKind::precondition, "requires grid (run `grid` first)");
  SpectralView sv;
  sv.v_sq = project(basis, grid_data, residualize(grid_data.y(), design).y_star).v_sq;
  sv.lattice_params = fit.params;
  if (fit.rho_lattice) {
    sv.lattice_params.rho = *fit.rho_lattice;
  } else {
    const auto s = grid_data.grid()->uniform_spacing();
    if (!s) fail(ErrorKind::precondition, "spectral view of an exact fit needs equal spacing on every axis");
    sv.lattice_params.rho = fit.params.rho / *s;
  }
  sv.a = a_sequence(basis, sv.lattice_params.rho, fit.nu);
  return sv;
}

}  // namespace gpdiag
