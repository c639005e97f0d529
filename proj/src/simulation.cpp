#include "gpdiag/simulation.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace gpdiag {

Eigen::MatrixXd lattice_coords(const std::vector<int>& dims) {
  if (dims.size() == 1) {
    Eigen::MatrixXd c(dims[0], 1);
    for (int k = 0; k < dims[0]; ++k) c(k, 0) = k + 1;
    return c;
  }
  if (dims.size() != 2) fail(ErrorKind::dimension, "lattice dims must have 1 or 2 entries");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(dims[0]) * dims[1], 2);
  for (int a = 0; a < dims[0]; ++a)
    for (int b = 0; b < dims[1]; ++b) c.row(static_cast<Eigen::Index>(a) * dims[1] + b) << a + 1, b + 1;
  return c;
}

GpSampler::GpSampler(const Eigen::MatrixXd& coords, const VarianceParams& truth) : truth_(truth), n_(coords.rows()) {
  truth.validate();
  if (truth.sigma_s2 > 0.0) {
    Eigen::MatrixXd D(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index k = 0; k < n_; ++k) D(i, k) = (coords.row(i) - coords.row(k)).norm();
    const auto f = factor_with_jitter(truth.sigma_s2 * correlation_matrix(D, truth.rho, truth.nu));
    L_ = f.llt.matrixL();
  }
}

Eigen::VectorXd GpSampler::draw_process(Rng& rng) const {
  std::normal_distribution<double> n01;
  Eigen::VectorXd z(n_);
  for (auto& x : z) x = n01(rng);
  if (L_.size() == 0) return Eigen::VectorXd::Zero(n_);
  return L_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd GpSampler::draw(Rng& rng) const {
  Eigen::VectorXd y = draw_process(rng);
  std::normal_distribution<double> n01;
  const double sd = std::sqrt(truth_.sigma_e2);
  for (auto& x : y) x += sd * n01(rng);
  return y;
}

Dataset simulate_gp(const SimConfig& config, int replicate) {
  const Eigen::MatrixXd coords = lattice_coords(config.dims);
  const GpSampler sampler(coords, config.truth);
  Rng rng(config.seed, static_cast<std::uint64_t>(replicate));
  Eigen::VectorXd y = sampler.draw(rng);
  if (config.mean_fn) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      Location loc;
      loc.dim = static_cast<int>(coords.cols());
      for (int a = 0; a < loc.dim; ++a) loc.coords[static_cast<std::size_t>(a)] = coords(i, a);
      y(i) += config.mean_fn(loc);
    }
  }
  return Dataset::create(coords, std::move(y), {});
}

Contamination Contamination::outlier(int position, double value) {
  Contamination c;
  c.kind = Kind::outlier;
  c.position = position;
  c.value = value;
  return c;
}

Contamination Contamination::mean_shift(int start, int length, double amount) {
  Contamination c;
  c.kind = Kind::mean_shift;
  c.start = start;
  c.length = length;
  c.amount = amount;
  return c;
}

Contamination Contamination::range_change(int start, int length, double rho) {
  Contamination c;
  c.kind = Kind::range_change;
  c.start = start;
  c.length = length;
  c.rho = rho;
  return c;
}

std::string Contamination::label() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::outlier: return "outlier";
    case Kind::mean_shift: return "mean_shift";
    case Kind::range_change: return "range_change";
  }
  return "none";
}

Dataset contaminate(const Dataset& data, const Contamination& c, const VarianceParams& truth, Rng& rng) {
  const auto n = static_cast<int>(data.size());
  Eigen::VectorXd y = data.is_grid() ? data.to_lattice_order(data.y()) : data.y();
  auto check_span = [&] {
    if (c.start < 1 || c.length < 0 || c.start - 1 + c.length > n) {
      fail(ErrorKind::validation, "contamination span [" + std::to_string(c.start) + ", " +
                                      std::to_string(c.start + c.length - 1) + "] is outside 1.." + std::to_string(n));
    }
  };
  switch (c.kind) {
    case Contamination::Kind::none: return data;
    case Contamination::Kind::outlier:
      if (c.position < 1 || c.position > n) fail(ErrorKind::validation, "outlier position outside the data");
      y(c.position - 1) = c.value;
      break;
    case Contamination::Kind::mean_shift:
      check_span();
      y.segment(c.start - 1, c.length).array() += c.amount;
      break;
    case Contamination::Kind::range_change: {
      check_span();
      if (c.length == 0) break;
      Eigen::MatrixXd coords(c.length, data.dim());
      const Eigen::MatrixXd all = data.is_grid() ? lattice_coords(data.grid()->dims) : data.coords();
      coords = all.middleRows(c.start - 1, c.length);
      VarianceParams p = truth;
      p.rho = c.rho;
      y.segment(c.start - 1, c.length) = GpSampler(coords, p).draw(rng);
      break;
    }
  }
  return data.with_outcome(data.is_grid() ? data.from_lattice_order(y) : y);
}

std::vector<VarianceParams> standard_truths() {
  std::vector<VarianceParams> out;
  for (double s2 : {2.0, 10.0})
    for (double e2 : {5.0, 0.1})
      for (double rho : {5.0, 16.67}) out.push_back({s2, e2, rho, Smoothness::half});
  return out;
}

ExperimentConfig experiment_preset(const std::string& name, int replicates, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.replicates = replicates;
  cfg.seed = seed;
  cfg.truths = standard_truths();
  if (name == "table2") {
    cfg.contaminations = {Contamination::outlier(100, 18.0)};
  } else if (name == "mean_shift") {
    cfg.contaminations = {Contamination::mean_shift(101, 100, 5.0)};
  } else if (name == "range_change") {
    // The second half is redrawn with the longer standard range.
    cfg.contaminations = {Contamination::range_change(101, 100, 16.67)};
  } else {
    fail(ErrorKind::parameter, "unknown preset '" + name + "' (use table2, mean_shift or range_change)");
  }
  return cfg;
}

const ExperimentCell& ExperimentTable::find(const VarianceParams& truth, const std::string& contamination,
                                            Method method) const {
  for (const auto& c : cells) {
    if (c.truth.sigma_s2 == truth.sigma_s2 && c.truth.sigma_e2 == truth.sigma_e2 && c.truth.rho == truth.rho &&
        c.contamination == contamination && c.method == method) {
      return c;
    }
  }
  fail(ErrorKind::validation, "no experiment cell for contamination '" + contamination + "'");
}

ExperimentTable run_experiment(const ExperimentConfig& config) {
  if (config.replicates < 1) fail(ErrorKind::parameter, "replicates must be >= 1");
  std::vector<Contamination> variants{Contamination{}};
  for (const auto& c : config.contaminations)
    if (c.kind != Contamination::Kind::none) variants.push_back(c);

  const std::size_t nt = config.truths.size(), nv = variants.size(), nm = config.methods.size();
  const auto reps = static_cast<std::size_t>(config.replicates);
  // results[((t * reps + r) * nv + v) * nm + m]
  std::vector<std::optional<Eigen::Vector3d>> results(nt * reps * nv * nm);

  std::vector<GpSampler> samplers;
  const Eigen::MatrixXd coords = lattice_coords({config.M});
  for (const auto& t : config.truths) samplers.emplace_back(coords, t);

  OptimizerConfig opt = config.optimizer;
  opt.threads = 1;
  parallel_for(
      nt * reps,
      [&](std::size_t job) {
        const std::size_t t = job / reps, r = job % reps;
        VarianceParams truth = config.truths[t];
        Rng rng(config.seed, (static_cast<std::uint64_t>(t) << 32) | r);
        const Dataset base = Dataset::create(coords, samplers[t].draw(rng), {});
        const DesignMatrix design = make_design(base, {});
        for (std::size_t v = 0; v < nv; ++v) {
          Contamination c = variants[v];
          // A range change swaps the two preset ranges so each truth is contaminated by the other.
          if (c.kind == Contamination::Kind::range_change && truth.rho == c.rho) c.rho = 5.0;
          Rng crng(config.seed ^ 0x636f6e74616d696eULL, (static_cast<std::uint64_t>(t) << 32) | r);
          const Dataset d = contaminate(base, c, truth, crng);
          for (std::size_t m = 0; m < nm; ++m) {
            FitOptions fo;
            fo.method = config.methods[m];
            fo.nu = truth.nu;
            fo.optimizer = opt;
            try {
              const FitResult f = fit(d, design, fo);
              results[((t * reps + r) * nv + v) * nm + m] =
                  Eigen::Vector3d(f.params.sigma_s2, f.params.sigma_e2, f.params.rho);
            } catch (const Error&) {
              // Counted as a failed replicate below.
            }
          }
        }
      },
      config.threads);

  ExperimentTable table;
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t m = 0; m < nm; ++m) {
        ExperimentCell cell;
        cell.truth = config.truths[t];
        cell.contamination = variants[v].label();
        cell.method = config.methods[m];
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& e = results[((t * reps + r) * nv + v) * nm + m];
          if (e) {
            cell.estimates.push_back(*e);
            ++cell.n_ok;
          } else {
            ++cell.n_failed;
          }
        }
        if (cell.n_ok > 0) {
          for (const auto& e : cell.estimates) cell.mean += e;
          cell.mean /= cell.n_ok;
          if (cell.n_ok > 1) {
            Eigen::Vector3d ss = Eigen::Vector3d::Zero();
            for (const auto& e : cell.estimates) ss += (e - cell.mean).cwiseAbs2();
            cell.se = (ss / (cell.n_ok - 1)).cwiseSqrt() / std::sqrt(static_cast<double>(cell.n_ok));
          }
        }
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

std::string experiment_csv(const ExperimentTable& table) {
  std::ostringstream out;
  out.precision(10);
  out << "true_sigma_s2,true_sigma_e2,true_rho,contamination,method,n_ok,n_failed,"
         "mean_sigma_s2,se_sigma_s2,mean_sigma_e2,se_sigma_e2,mean_rho,se_rho\n";
  for (const auto& c : table.cells) {
    out << c.truth.sigma_s2 << ',' << c.truth.sigma_e2 << ',' << c.truth.rho << ',' << c.contamination << ','
        << to_string(c.method) << ',' << c.n_ok << ',' << c.n_failed;
    for (int k = 0; k < 3; ++k) out << ',' << c.mean(k) << ',' << c.se(k);
    out << '\n';
  }
  return out.str();
}

TrendOutlierDemo appendix_g_demo(std::uint64_t seed, double trend_rise) {
  const VarianceParams truth{12.0, 5.0, 5.0, Smoothness::half};
  const Eigen::MatrixXd coords = lattice_coords({20, 20});
  Rng rng(seed, 0x47);
  Eigen::VectorXd y = GpSampler(coords, truth).draw(rng);

  // North-south runs along the second lattice axis.
  Eigen::VectorXd trend(coords.rows());
  for (Eigen::Index i = 0; i < trend.size(); ++i) trend(i) = trend_rise * (coords(i, 1) - 1.0) / 19.0;
  trend.array() -= trend.mean();

  std::vector<std::size_t> rows(static_cast<std::size_t>(coords.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < 10; ++i) std::swap(rows[i], rows[i + rng() % (rows.size() - i)]);
  rows.resize(10);
  std::sort(rows.begin(), rows.end());
  Eigen::VectorXd outliers = Eigen::VectorXd::Zero(coords.rows());
  for (auto r : rows) outliers(static_cast<Eigen::Index>(r)) = 1.0;

  y += trend + 12.0 * outliers;
  return TrendOutlierDemo{
      Dataset::create(coords, std::move(y), {{"ns_trend", trend}, {"outliers", outliers}}, {"s1", "s2"}, "y"), truth,
      rows};
}

Eigen::MatrixXd uniform_square(int n, Rng& rng) {
  Eigen::MatrixXd c(n, 2);
  for (int i = 0; i < n; ++i) c.row(i) << rng.uniform(), rng.uniform();
  return c;
}

std::vector<std::size_t> outside_blank_wedge(const Eigen::MatrixXd& coords, double blank_fraction) {
  std::vector<std::size_t> keep;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double s1 = coords(i, 0), s2 = coords(i, 1);
    bool blank = false;
    if (blank_fraction == 0.125) {
      blank = s2 > -2 * s1 + 1.5 && s2 > 2 * s1 - 0.5;
    } else if (blank_fraction == 0.25) {
      blank = s2 > -s1 + 1 && s2 > s1;
    } else if (blank_fraction != 0.0) {
      fail(ErrorKind::parameter, "blank fraction must be 0, 1/8 or 1/4");
    }
    if (!blank) keep.push_back(static_cast<std::size_t>(i));
  }
  return keep;
}

}  // namespace gpdiag
