#include "gpdiag/gridding.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/parallel.hpp"
#include "gpdiag/rng.hpp"
#include "gpdiag/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gpdiag {

void GridSpec::validate() const {
  if (M1 < 4 || M2 < 4 || M1 % 2 != 0 || M2 % 2 != 0) {
    fail(ErrorKind::dimension, "grid dimensions must be even and >= 4 (got " + std::to_string(M1) + " x " +
                                   std::to_string(M2) + ")");
  }
  if (!(lambda > 0.0) || (covariate_lambda && !(*covariate_lambda > 0.0))) {
    fail(ErrorKind::parameter, "IDW power lambda must be > 0");
  }
  for (int a = 0; a < 2; ++a) {
    if (!(hi[static_cast<std::size_t>(a)] > lo[static_cast<std::size_t>(a)])) {
      fail(ErrorKind::validation, "observation bounding box is degenerate along axis " + std::to_string(a + 1));
    }
  }
}

std::array<double, 2> GridSpec::step() const { return {(hi[0] - lo[0]) / (M1 - 1), (hi[1] - lo[1]) / (M2 - 1)}; }

GridSpec make_grid_spec(const Dataset& data, int M1, int M2, double lambda) {
  if (data.dim() != 2) fail(ErrorKind::precondition, "gridding needs 2-D locations");
  GridSpec s;
  s.M1 = M1;
  s.M2 = M2;
  s.lambda = lambda;
  for (int a = 0; a < 2; ++a) {
    s.lo[static_cast<std::size_t>(a)] = data.coords().col(a).minCoeff();
    s.hi[static_cast<std::size_t>(a)] = data.coords().col(a).maxCoeff();
  }
  return s;
}

Eigen::MatrixXd rescale_to_grid(const Eigen::MatrixXd& coords, const GridSpec& spec) {
  Eigen::MatrixXd out(coords.rows(), 2);
  const std::array<int, 2> M{spec.M1, spec.M2};
  for (int a = 0; a < 2; ++a) {
    const auto k = static_cast<std::size_t>(a);
    out.col(a) = ((coords.col(a).array() - spec.lo[k]) * ((M[k] - 1) / (spec.hi[k] - spec.lo[k])) + 1.0).matrix();
  }
  return out;
}

Eigen::VectorXd idw_smooth(const Dataset& data, const GridSpec& spec, const Eigen::VectorXd& column,
                           std::optional<double> lambda) {
  spec.validate();
  if (data.size() == 0) fail(ErrorKind::precondition, "IDW needs at least one observation");
  if (data.dim() != 2) fail(ErrorKind::precondition, "gridding needs 2-D locations");
  if (column.size() != static_cast<Eigen::Index>(data.size())) fail(ErrorKind::dimension, "column length mismatch");
  const double lam = lambda.value_or(spec.lambda);
  if (!(lam > 0.0)) fail(ErrorKind::parameter, "IDW power lambda must be > 0");
  const Eigen::MatrixXd s = rescale_to_grid(data.coords(), spec);
  const Eigen::Index n = s.rows();
  Eigen::VectorXd out(static_cast<Eigen::Index>(spec.M1) * spec.M2);
  Eigen::VectorXd logd(n);
  for (int g1 = 1; g1 <= spec.M1; ++g1) {
    for (int g2 = 1; g2 <= spec.M2; ++g2) {
      const Eigen::Index row = static_cast<Eigen::Index>(g1 - 1) * spec.M2 + (g2 - 1);
      Eigen::Index nearest = 0;
      double dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < n; ++k) {
        const double d = std::hypot(s(k, 0) - g1, s(k, 1) - g2);
        logd(k) = std::log(d);
        if (d < dmin) dmin = d, nearest = k;
      }
      if (dmin < 1e-9) {
        out(row) = column(nearest);
        continue;
      }
      // Weights d^-lambda scaled by dmin^lambda so large powers stay finite.
      const double logmin = std::log(dmin);
      double num = 0.0, den = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double w = std::exp(-lam * (logd(k) - logmin));
        num += w * column(k);
        den += w;
      }
      out(row) = num / den;
    }
  }
  return out;
}

GriddedData grid_dataset(const Dataset& data, const GridSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd coords = lattice_coords({spec.M1, spec.M2});
  Eigen::VectorXd y = idw_smooth(data, spec, data.y());
  std::vector<Covariate> covs;
  for (const auto& c : data.covariates()) {
    covs.push_back({c.name, idw_smooth(data, spec, c.values, spec.covariate_lambda.value_or(spec.lambda))});
  }
  auto names = data.location_names();
  if (names.empty()) names = {"s1", "s2"};
  const auto st = spec.step();
  return GriddedData{Dataset::create(coords, std::move(y), std::move(covs), names, data.outcome_name()), spec,
                     std::sqrt(st[0] * st[1])};
}

namespace {
int round_even(double x) { return std::max(4, 2 * static_cast<int>(std::lround(x / 2.0))); }
}  // namespace

std::vector<GridSuggestion> suggest_grid(const Dataset& data) {
  if (data.dim() != 2) fail(ErrorKind::precondition, "grid suggestions need 2-D locations");
  const double w1 = data.coords().col(0).maxCoeff() - data.coords().col(0).minCoeff();
  const double w2 = data.coords().col(1).maxCoeff() - data.coords().col(1).minCoeff();
  const double aspect = (w1 > 0 && w2 > 0) ? w1 / w2 : 1.0;
  std::vector<GridSuggestion> out;
  for (double f : {0.5, 0.75, 1.0, 1.25}) {
    const double target = f * static_cast<double>(data.size());
    GridSuggestion g;
    g.M1 = round_even(std::sqrt(target * aspect));
    g.M2 = round_even(std::sqrt(target / aspect));
    g.size_factor = f;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const GridSuggestion& o) { return o.M1 == g.M1 && o.M2 == g.M2; });
    if (!seen) out.push_back(g);
  }
  return out;
}

namespace {

VarianceParams in_data_units(const FitResult& f, double unit) {
  VarianceParams p = f.params;
  p.rho = f.rho_lattice.value_or(f.params.rho) * unit;
  return p;
}

}  // namespace

LambdaCalibration calibrate_lambda(const Dataset& data, const DesignMatrix& raw_design, int M1, int M2,
                                   const std::vector<double>& lambdas, const FitOptions& options) {
  if (lambdas.empty()) fail(ErrorKind::parameter, "no lambda values to calibrate");
  FitOptions exact = options;
  exact.method = Method::exact;
  LambdaCalibration cal;
  cal.raw = fit(data, raw_design, exact).params;
  cal.lambdas = lambdas;
  double best = std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    const GriddedData g = grid_dataset(data, make_grid_spec(data, M1, M2, lam));
    const DesignMatrix gd = make_design(g.data, std::vector<std::string>(raw_design.names.begin() + 1, raw_design.names.end()));
    const VarianceParams p = in_data_units(fit(g.data, gd, exact), g.unit);
    auto rel = [](double a, double b) { return (a - b) / b; };
    const double loss = std::pow(rel(p.sigma_s2, cal.raw.sigma_s2), 2) + std::pow(rel(p.sigma_e2, cal.raw.sigma_e2), 2) +
                        std::pow(rel(p.rho, cal.raw.rho), 2);
    cal.loss.push_back(loss);
    cal.gridded.push_back(p);
    if (loss < best) best = loss, cal.best_lambda = lam;
  }
  return cal;
}

const SweepCell& SweepReport::raw(double blank_fraction) const { return cell(0, 0.0, blank_fraction, "exact_raw"); }

const SweepCell& SweepReport::cell(int M, double lambda, double blank_fraction, const std::string& method) const {
  for (const auto& c : cells)
    if (c.M == M && c.lambda == lambda && c.blank_fraction == blank_fraction && c.method == method) return c;
  fail(ErrorKind::validation, "no sweep cell for method '" + method + "'");
}

SweepReport idw_sweep(const SweepConfig& config) {
  if (config.replicates < 1) fail(ErrorKind::parameter, "replicates must be >= 1");
  Rng loc_rng(config.seed, 0x6c6f63);
  const Eigen::MatrixXd coords = uniform_square(config.n_points, loc_rng);
  const GpSampler sampler(coords, config.truth);

  // Cell layout: per blank fraction, the raw fit followed by (M, lambda, method).
  SweepReport report;
  report.config = config;
  for (double b : config.blank_fractions) {
    SweepCell raw;
    raw.blank_fraction = b;
    raw.method = "exact_raw";
    report.cells.push_back(raw);
    for (int M : config.sizes) {
      for (double lam : config.lambdas) {
        for (const char* m : {"exact_grid", "approx_grid"}) {
          SweepCell c;
          c.M = M;
          c.lambda = lam;
          c.blank_fraction = b;
          c.method = m;
          report.cells.push_back(c);
        }
      }
    }
  }
  const std::size_t ncell = report.cells.size();
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<std::optional<Eigen::Vector3d>> est(ncell * reps);
  std::vector<std::string> err(ncell * reps);

  OptimizerConfig opt = config.optimizer;
  opt.threads = 1;
  parallel_for(
      reps,
      [&](std::size_t r) {
        Rng rng(config.seed, 1000 + r);
        const Eigen::VectorXd y_all = sampler.draw(rng);
        std::size_t ci = 0;
        for (double b : config.blank_fractions) {
          const auto keep = outside_blank_wedge(coords, b);
          Eigen::MatrixXd c(static_cast<Eigen::Index>(keep.size()), 2);
          Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
          for (std::size_t i = 0; i < keep.size(); ++i) {
            c.row(static_cast<Eigen::Index>(i)) = coords.row(static_cast<Eigen::Index>(keep[i]));
            y(static_cast<Eigen::Index>(i)) = y_all(static_cast<Eigen::Index>(keep[i]));
          }
          const Dataset raw = Dataset::create(c, y, {}, {"s1", "s2"});
          auto run = [&](const Dataset& d, Method m, double unit) {
            FitOptions fo;
            fo.method = m;
            fo.nu = config.truth.nu;
            fo.optimizer = opt;
            try {
              const VarianceParams p = in_data_units(fit(d, make_design(d, {}), fo), unit);
              est[ci * reps + r] = Eigen::Vector3d(std::log10(p.sigma_s2), std::log10(p.sigma_e2), std::log10(p.rho));
            } catch (const Error& e) {
              err[ci * reps + r] = e.what();
            }
            ++ci;
          };
          run(raw, Method::exact, 1.0);
          for (int M : config.sizes) {
            for (double lam : config.lambdas) {
              const GriddedData g = grid_dataset(raw, make_grid_spec(raw, M, M, lam));
              run(g.data, Method::exact, g.unit);
              run(g.data, Method::approximate, g.unit);
            }
          }
        }
      },
      config.threads);

  for (std::size_t ci = 0; ci < ncell; ++ci) {
    auto& cell = report.cells[ci];
    std::vector<Eigen::Vector3d> ok;
    for (std::size_t r = 0; r < reps; ++r) {
      if (est[ci * reps + r]) {
        ok.push_back(*est[ci * reps + r]);
      } else {
        cell.errors.push_back(err[ci * reps + r]);
      }
    }
    cell.n_ok = static_cast<int>(ok.size());
    cell.n_failed = static_cast<int>(reps) - cell.n_ok;
    if (ok.empty()) continue;
    for (const auto& e : ok) cell.mean_log10 += e;
    cell.mean_log10 /= static_cast<double>(ok.size());
    if (ok.size() > 1) {
      Eigen::Vector3d ss = Eigen::Vector3d::Zero();
      for (const auto& e : ok) ss += (e - cell.mean_log10).cwiseAbs2();
      cell.se_log10 = (ss / static_cast<double>(ok.size() - 1)).cwiseSqrt() / std::sqrt(static_cast<double>(ok.size()));
    }
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "M,lambda,blank_fraction,method,n_ok,n_failed,mean_log10_sigma_s2,se_log10_sigma_s2,"
         "mean_log10_sigma_e2,se_log10_sigma_e2,mean_log10_rho,se_log10_rho\n";
  for (const auto& c : report.cells) {
    out << c.M << ',' << c.lambda << ',' << c.blank_fraction << ',' << c.method << ',' << c.n_ok << ',' << c.n_failed;
    for (int k = 0; k < 3; ++k) out << ',' << c.mean_log10(k) << ',' << c.se_log10(k);
    out << '\n';
  }
  return out.str();
}

}  // namespace gpdiag
