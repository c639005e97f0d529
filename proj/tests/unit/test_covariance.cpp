#include "doctest.h"

#include "gpdiag/basis.hpp"
#include "gpdiag/covariance.hpp"
#include "gpdiag/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gpdiag;

namespace {
constexpr double kPi = std::numbers::pi;
const Smoothness kAll[] = {Smoothness::half, Smoothness::three_halves, Smoothness::five_halves, Smoothness::infinite};
}  // namespace

TEST_CASE("correlation values") {
  for (auto nu : kAll) CHECK(correlation(0.0, 3.0, nu) == 1.0);
  CHECK(correlation(5.0, 5.0, Smoothness::half) == doctest::Approx(std::exp(-std::sqrt(2.0))));
  CHECK(correlation(5.0, 5.0, Smoothness::half) == doctest::Approx(0.24312).epsilon(1e-5));
  CHECK(correlation(1.0, 2.0, Smoothness::three_halves) ==
        doctest::Approx((1 + std::sqrt(3.0) / 2) * std::exp(-std::sqrt(3.0) / 2)));
  const double x = std::sqrt(5.0) / 2;
  CHECK(correlation(1.0, 2.0, Smoothness::five_halves) == doctest::Approx((1 + x + x * x / 3) * std::exp(-x)));
  CHECK(correlation(2.0, 2.0, Smoothness::infinite) == doctest::Approx(std::exp(-0.5)));
  for (auto nu : kAll) {
    double prev = 1.0;
    for (double d = 0.1; d < 30; d += 0.1) {
      const double c = correlation(d, 4.0, nu);
      CHECK(c <= prev);
      prev = c;
    }
  }
  CHECK_THROWS_AS(smoothness_from_value(1.0), Error);
  CHECK(smoothness_from_string("inf") == Smoothness::infinite);
  CHECK(to_string(Smoothness::five_halves) == "2.5");
}

TEST_CASE("1-D spectral density") {
  CHECK(spectral_density_1d(0.0, 5.0, Smoothness::half) == doctest::Approx(5.0 / std::sqrt(2.0)));
  CHECK(spectral_density_1d(0.0, 5.0, Smoothness::half) == doctest::Approx(3.5355).epsilon(1e-4));
  const double rho = 5.0;
  const double w = std::sqrt(2.0) / (kPi * rho);
  CHECK(spectral_density_1d(w, rho, Smoothness::half) ==
        doctest::Approx(0.5 * spectral_density_1d(0.0, rho, Smoothness::half)));
  // Closed form of the exponential case, at arbitrary frequencies.
  for (double om : {0.01, 0.1, 0.33, 0.5}) {
    const double expect = rho / std::sqrt(2.0) / (1 + std::pow(kPi * rho, 2) * om * om / 2);
    CHECK(spectral_density_1d(om, rho, Smoothness::half) == doctest::Approx(expect).epsilon(1e-13));
  }
  for (auto nu : kAll) {
    double prev = spectral_density_1d(0.0, rho, nu);
    for (double om = 0.005; om <= 0.5; om += 0.005) {
      const double v = spectral_density_1d(om, rho, nu);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("2-D spectral density") {
  CHECK(spectral_density_2d({0.0, 0.0}, 2.0, Smoothness::half) == doctest::Approx(kPi));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 20; ++i) {
    const double a = u(gen), b = u(gen);
    for (auto nu : kAll) {
      const double v = spectral_density_2d({a, b}, 3.0, nu);
      CHECK(spectral_density_2d({b, a}, 3.0, nu) == doctest::Approx(v).epsilon(1e-14));
      CHECK(spectral_density_2d({-a, b}, 3.0, nu) == doctest::Approx(v).epsilon(1e-14));
    }
  }
  const double rho = 5.0;
  const double base = std::pow(kPi * rho, 2) / 2;
  // Choose x so that 1 + base x = 2^(2/3); the density then halves.
  const double xq = (std::pow(2.0, 2.0 / 3.0) - 1.0) / base;
  CHECK(spectral_density_2d({std::sqrt(xq), 0.0}, rho, Smoothness::half) ==
        doctest::Approx(0.5 * spectral_density_2d({0.0, 0.0}, rho, Smoothness::half)));
  CHECK(spectral_density_2d({0.1, 0.2}, rho, Smoothness::half) ==
        doctest::Approx(kPi * rho * rho / 4 * std::pow(1 + base * 0.05, -1.5)));
}

TEST_CASE("a_sequence") {
  const auto b = build_basis_1d(200);
  const Eigen::VectorXd a5 = a_sequence(b, 5.0, Smoothness::half);
  const Eigen::VectorXd a16 = a_sequence(b, 16.67, Smoothness::half);
  CHECK(a16(0) > a5(0));
  CHECK(a16(100) / a16(0) < a5(100) / a5(0));
  CHECK(a5(0) == a5(1));
  const auto b2 = build_basis_2d(4, 4);
  const Eigen::VectorXd a2 = a_sequence(b2, 2.0, Smoothness::half);
  for (Eigen::Index j = 0; j < a2.size(); ++j) {
    const auto& c = b2.columns()[j];
    const double w1 = c.m[0] <= 2 ? c.m[0] / 4.0 : (c.m[0] - 4) / 4.0;
    const double w2 = c.m[1] <= 2 ? c.m[1] / 4.0 : (c.m[1] - 4) / 4.0;
    const double expect = kPi * 4 / 4 * std::pow(1 + std::pow(2 * kPi, 2) * (w1 * w1 + w2 * w2) / 2, -1.5);
    CHECK(a2(j) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("build_V against a double loop") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  Eigen::MatrixXd c(50, 2);
  for (Eigen::Index i = 0; i < 50; ++i) c.row(i) << u(gen), u(gen);
  const Dataset d = Dataset::create(c, Eigen::VectorXd::Zero(50), {});
  const VarianceParams p{2.0, 5.0, 5.0, Smoothness::half};
  const auto m = build_V(d, p);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double dist = (c.row(i) - c.row(j)).norm();
      const double expect = 2.0 * std::exp(-std::sqrt(2.0) * dist / 5.0) + (i == j ? 5.0 : 0.0);
      CHECK(std::abs(m.V(i, j) - expect) < 1e-12);
    }
  }
  CHECK(m.V.isApprox(m.V.transpose(), 0.0));
  // Scaling distances and range together leaves Sigma unchanged.
  const auto scaled = build_V(d.distance_matrix() * 3.0, VarianceParams{2.0, 5.0, 15.0, Smoothness::half});
  CHECK((scaled.Sigma - m.Sigma).cwiseAbs().maxCoeff() < 1e-12);

  const Dataset one = Dataset::create(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1), {});
  CHECK(build_V(one, p).V(0, 0) == doctest::Approx(7.0));
  CHECK_THROWS_AS(VarianceParams({-1.0, 1.0, 1.0, Smoothness::half}).validate(), Error);
}

TEST_CASE("jitter ladder") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(5, 5);  // rank one
  const auto f = factor_with_jitter(A);
  CHECK(f.jitter > 0.0);
  CHECK(f.jitter <= 1e-6);
  CHECK_THROWS_AS(factor_with_jitter(-Eigen::MatrixXd::Identity(3, 3)), Error);
}

TEST_CASE("approximate covariance reproduces Cov(v)") {
  const auto b = build_basis_2d(6, 8);
  const VarianceParams p{2.0, 5.0, 3.0, Smoothness::half};
  const Eigen::MatrixXd Va = approx_covariance(b, p);
  const Eigen::VectorXd s = b.ztz_diag().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd proj = s.asDiagonal() * b.Z().transpose() * Va * b.Z() * s.asDiagonal();
  const Eigen::VectorXd expect = (2.0 * a_sequence(b, 3.0, Smoothness::half).array() + 5.0).matrix();
  CHECK((proj - Eigen::MatrixXd(expect.asDiagonal())).cwiseAbs().maxCoeff() < 1e-10);
  // The GP part vanishes as sigma_s2 does.
  const Eigen::MatrixXd tiny = approx_covariance(b, VarianceParams{1e-300, 5.0, 3.0, Smoothness::half});
  CHECK((tiny - 5.0 * Eigen::MatrixXd::Identity(48, 48)).cwiseAbs().maxCoeff() < 1e-250);
}

TEST_CASE("approximate covariance improves with M") {
  const VarianceParams p{2.0, 5.0, 5.0, Smoothness::half};
  auto err = [&](int M) {
    const Eigen::MatrixXd Va = approx_covariance(build_basis_1d(M), p);
    double worst = 0;
    for (int lag = 1; lag < 20; ++lag) {
      const double exact = 2.0 * correlation(lag, 5.0, Smoothness::half);
      worst = std::max(worst, std::abs(Va(M / 2, M / 2 + lag) - exact));
    }
    return worst;
  };
  CHECK(err(200) < err(100));
}

TEST_CASE("KL projection distance") {
  const int M = 100;
  Eigen::MatrixXd D(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) D(i, j) = std::abs(i - j);
  const auto cm = build_V(D, VarianceParams{2.0, 5.0, 5.0, Smoothness::half});
  const Eigen::MatrixXd R = cm.R_diag.asDiagonal();
  CHECK(std::abs(kl_projection_distance(cm.Sigma, R, Eigen::MatrixXd::Identity(M, M))) < 1e-9);
  CHECK(std::abs(kl_projection_distance(Eigen::MatrixXd::Zero(M, M), R, Eigen::MatrixXd::Identity(M, M) * 0.0)) < 1e-9);

  auto residual_projector = [](int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(n, 2);
    X.col(0).setOnes();
    for (int i = 0; i < n; ++i) X(i, 1) = n01(gen);
    const Eigen::MatrixXd H = X * (X.transpose() * X).inverse() * X.transpose();
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n) - H);
  };
  const double kl100 = kl_projection_distance(cm.Sigma, R, residual_projector(M, 1));
  CHECK(kl100 > 0.0);
  Eigen::MatrixXd D2(200, 200);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) D2(i, j) = std::abs(i - j);
  const auto cm2 = build_V(D2, VarianceParams{2.0, 5.0, 5.0, Smoothness::half});
  const double kl200 =
      kl_projection_distance(cm2.Sigma, Eigen::MatrixXd(cm2.R_diag.asDiagonal()), residual_projector(200, 1));
  MESSAGE("KL distance M=100: " << kl100 << ", M=200: " << kl200);
  CHECK(kl200 < kl100);
}
