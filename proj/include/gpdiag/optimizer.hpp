#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gpdiag {

struct OptimizerConfig {
  int starts = 8;
  int max_iterations = 500;
  double tolerance = 1e-8;     // simplex diameter (max-norm) in the search space
  double initial_step = 0.1;   // initial simplex edge as a fraction of each bound width
  bool polish = true;          // restart once from the best point with a fresh simplex
  std::uint64_t seed = 20140701;
  int threads = 0;             // 0 = thread_cap()
};

struct StartRecord {
  Eigen::VectorXd start;
  Eigen::VectorXd end;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool polish = false;
};

struct OptimizationResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  std::vector<StartRecord> trace;
};

/// Objective to maximize. Returning -inf or NaN, or throwing gpdiag::Error,
/// marks a point infeasible.
using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Bounded Nelder-Mead from one start. Trial points are clamped to the box.
StartRecord nelder_mead(const Objective& f, const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, const OptimizerConfig& cfg);

/// Latin-hypercube sample of n points in the box; row i is start i.
Eigen::MatrixXd latin_hypercube(int n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::uint64_t seed);

/// Multi-start maximization; returns the best over all starts (and the polish run).
/// Throws ErrorKind::optimization when no start reaches a finite value.
OptimizationResult maximize(const Objective& f, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const OptimizerConfig& cfg);

}  // namespace gpdiag
