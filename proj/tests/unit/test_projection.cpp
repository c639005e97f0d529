#include "test_util.hpp"

#include "gpdiag/projection.hpp"
#include "gpdiag/simulation.hpp"

#include <random>

using namespace gpdiag;
using gpdiag::test::kind_of;

TEST_CASE("residuals are orthogonal to the design") {
  std::mt19937 gen(2);
  std::normal_distribution<double> N;
  const int n = 30;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) X(i, 0) = 1, X(i, 1) = N(gen), X(i, 2) = i, y(i) = N(gen);
  const auto r = residualize(y, make_design({"(Intercept)", "u", "t"}, X));
  CHECK(r.projector_rank == 3);
  CHECK(r.design_ref == "(Intercept)+u+t");
  CHECK((X.transpose() * r.y_star).norm() < 1e-10);
  // Idempotent.
  CHECK((residualize(r.y_star, make_design({"(Intercept)", "u", "t"}, X)).y_star - r.y_star).norm() < 1e-10);
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd X(6, 2);
  X.col(0).setOnes();
  X.col(1).setConstant(2.0);
  DesignMatrix d{{"(Intercept)", "two"}, X};
  CHECK(kind_of([&] { residualize(Eigen::VectorXd::Ones(6), d); }) == ErrorKind::rank);
}

TEST_CASE("v reduction on a 1-D lattice") {
  SimConfig cfg;
  cfg.dims = {64};
  const Dataset d = simulate_gp(cfg);
  const SpectralBasis basis = build_basis_1d(64);
  // The basis omits the constant, so removing the intercept leaves v unchanged.
  const auto r = v_reduction(basis, d, make_design(d, {}), d.y());
  CHECK(r.delta.norm() < 1e-9);
  // A linear trend moves low frequencies most.
  const Dataset t = d.with_covariate("trend", Eigen::VectorXd::LinSpaced(64, -1, 1));
  const auto rt = v_reduction(basis, t, make_design(t, {"trend"}), t.y());
  CHECK((rt.v - rt.v_star - rt.delta).norm() < 1e-12);
  Eigen::Index jmax;
  rt.delta.cwiseAbs().maxCoeff(&jmax);
  CHECK(jmax < 4);
}
