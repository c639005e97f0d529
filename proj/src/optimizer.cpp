#include "gpdiag/optimizer.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/parallel.hpp"
#include "gpdiag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gpdiag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x) {
  try {
    const double v = f(x);
    return std::isnan(v) ? kNegInf : v;
  } catch (const Error&) {
    return kNegInf;
  }
}

}  // namespace

StartRecord nelder_mead(const Objective& f, const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, const OptimizerConfig& cfg) {
  const Eigen::Index d = start.size();
  auto clamp = [&](Eigen::VectorXd x) { return Eigen::VectorXd(x.cwiseMax(lower).cwiseMin(upper)); };

  StartRecord rec;
  rec.start = clamp(start);
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d + 1), rec.start);
  std::vector<double> val(static_cast<std::size_t>(d + 1));
  for (Eigen::Index k = 0; k < d; ++k) {
    const double step = cfg.initial_step * (upper(k) - lower(k));
    auto& p = pts[static_cast<std::size_t>(k + 1)];
    // Step away from whichever bound is nearer so the vertex stays distinct.
    p(k) += (p(k) + step <= upper(k)) ? step : -step;
    p = clamp(p);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = safe_eval(f, pts[i]);
  rec.evaluations = static_cast<int>(pts.size());

  std::vector<std::size_t> idx(pts.size());
  auto sort_vertices = [&] {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
  };

  for (rec.iterations = 0; rec.iterations < cfg.max_iterations; ++rec.iterations) {
    sort_vertices();
    const auto& best = pts[idx.front()];
    double diameter = 0.0;
    for (std::size_t i = 1; i < idx.size(); ++i) diameter = std::max(diameter, (pts[idx[i]] - best).cwiseAbs().maxCoeff());
    if (diameter < cfg.tolerance) {
      rec.converged = true;
      break;
    }
    const std::size_t worst = idx.back();
    const std::size_t second = idx[idx.size() - 2];
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) centroid += pts[idx[i]];
    centroid /= static_cast<double>(d);

    auto trial = [&](double coef) {
      Eigen::VectorXd x = clamp(centroid + coef * (pts[worst] - centroid));
      ++rec.evaluations;
      return std::pair{x, safe_eval(f, x)};
    };

    auto [xr, fr] = trial(-1.0);
    if (fr > val[idx.front()]) {
      auto [xe, fe] = trial(-2.0);
      if (fe > fr) {
        pts[worst] = xe, val[worst] = fe;
      } else {
        pts[worst] = xr, val[worst] = fr;
      }
      continue;
    }
    if (fr > val[second]) {
      pts[worst] = xr, val[worst] = fr;
      continue;
    }
    // Outside contraction when the reflection beat the worst point, inside otherwise.
    auto [xc, fc] = fr > val[worst] ? trial(-0.5) : trial(0.5);
    if (fc > std::max(fr, val[worst])) {
      pts[worst] = xc, val[worst] = fc;
      continue;
    }
    const Eigen::VectorXd b = pts[idx.front()];
    for (std::size_t i = 1; i < idx.size(); ++i) {
      pts[idx[i]] = clamp(b + 0.5 * (pts[idx[i]] - b));
      val[idx[i]] = safe_eval(f, pts[idx[i]]);
      ++rec.evaluations;
    }
  }
  sort_vertices();
  rec.end = pts[idx.front()];
  rec.value = val[idx.front()];
  return rec;
}

Eigen::MatrixXd latin_hypercube(int n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::uint64_t seed) {
  const Eigen::Index d = lower.size();
  Eigen::MatrixXd out(n, d);
  Rng rng(seed, 0x4c4853);
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
    for (int i = 0; i < n; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
      out(i, k) = lower(k) + u * (upper(k) - lower(k));
    }
  }
  return out;
}

OptimizationResult maximize(const Objective& f, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const OptimizerConfig& cfg) {
  if (lower.size() != upper.size() || lower.size() == 0) fail(ErrorKind::dimension, "bad optimizer bounds");
  if (!((upper - lower).array() > 0).all()) fail(ErrorKind::parameter, "optimizer bounds must satisfy lower < upper");
  if (cfg.starts < 1) fail(ErrorKind::parameter, "optimizer needs at least one start");

  const Eigen::MatrixXd starts = latin_hypercube(cfg.starts, lower, upper, cfg.seed);
  std::vector<StartRecord> trace(static_cast<std::size_t>(cfg.starts));
  parallel_for(
      trace.size(),
      [&](std::size_t i) { trace[i] = nelder_mead(f, starts.row(static_cast<Eigen::Index>(i)).transpose(), lower, upper, cfg); },
      cfg.threads);

  auto best = std::max_element(trace.begin(), trace.end(),
                               [](const StartRecord& a, const StartRecord& b) { return a.value < b.value; });
  if (!std::isfinite(best->value)) {
    fail(ErrorKind::optimization, "none of the " + std::to_string(trace.size()) +
                                      " optimizer starts reached a finite objective value");
  }
  OptimizationResult out;
  out.x = best->end;
  out.value = best->value;
  out.converged = best->converged;
  if (cfg.polish) {
    OptimizerConfig pc = cfg;
    pc.initial_step = cfg.initial_step * 0.5;
    StartRecord p = nelder_mead(f, out.x, lower, upper, pc);
    p.polish = true;
    if (p.value >= out.value) {
      out.x = p.end;
      out.value = p.value;
      out.converged = p.converged;
    }
    trace.push_back(std::move(p));
  }
  out.trace = std::move(trace);
  return out;
}

}  // namespace gpdiag
