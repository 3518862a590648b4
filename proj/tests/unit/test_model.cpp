#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/model.hpp"

using namespace recall_dyn;

TEST_CASE("network config validation") {
  CHECK_NOTHROW(NetworkConfig{6, 3, 1.0 / 54, 97.0 / 54}.validate());
  CHECK_THROWS_AS((NetworkConfig{0, 3, 0.5, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NetworkConfig{2, 1, 0.5, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NetworkConfig{2, 3, 1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NetworkConfig{2, 3, 0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NetworkConfig{2, 3, 0.5, 0.0}.validate()), ConfigError);
  CHECK(NetworkConfig{6, 3, 0.5, 1.0}.critical_mu1() == doctest::Approx(4.5));
}

TEST_CASE("weight matrix construction") {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(4, 4);
  E(0, 1) = 1.0;
  CHECK_THROWS_AS(WeightMatrix(2, 2, E), StructureError);
  CHECK_THROWS_AS(WeightMatrix(2, 2, Eigen::MatrixXd::Zero(3, 3)), DimensionError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 4);
  bad(0, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(WeightMatrix(2, 2, bad), StructureError);
  const WeightMatrix Z = WeightMatrix::zeros(2, 3);
  CHECK_THROWS_AS(Z.check_dims(NetworkConfig{3, 2, 0.5, 1.0}), DimensionError);
}

TEST_CASE("assumption checks") {
  std::mt19937_64 rng(7);
  const WeightMatrix W(3, 3, oracle::random_structured(3, 3, rng));
  CHECK(validate_assumptions(W).all_pass());
  CHECK_NOTHROW(require_assumptions(W));

  Eigen::MatrixXd asym = W.entries();
  asym(0, 3) += 0.1;
  const auto r1 = validate_assumptions(WeightMatrix(3, 3, asym));
  CHECK_FALSE(r1.symmetric);
  CHECK(r1.symmetry_violation == doctest::Approx(0.1));
  CHECK_THROWS_AS(require_assumptions(WeightMatrix(3, 3, asym)), StructureError);

  // Symmetric perturbation that breaks constant block row sums.
  Eigen::MatrixXd rows = W.entries();
  rows(0, 3) += 0.1;
  rows(3, 0) += 0.1;
  const auto r2 = validate_assumptions(WeightMatrix(3, 3, rows));
  CHECK(r2.symmetric);
  CHECK_FALSE(r2.constant_block_rows);
}

TEST_CASE("right-hand side matches the scalar form") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N(0.0, 1.0);
  const NetworkConfig cfg{3, 4, 0.2, 1.3};
  const WeightMatrix W(3, 4, oracle::random_structured(3, 4, rng));
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(cfg.state_dim());
    for (auto& v : x) v = N(rng);
    const StateVector d = rhs_original(StateVector::from_stacked(x), W, cfg);
    const Eigen::VectorXd ref = oracle::scalar_rhs(x, W.entries(), cfg.n, cfg.m, cfg.alpha, cfg.g_bar_a);
    CHECK((d.stacked() - ref).norm() < 1e-12);
  }
}

TEST_CASE("trivial equilibrium is a root and the shifted field vanishes at the origin") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 4, m = 2 + t % 3;
    const NetworkConfig cfg{n, m, 0.1 + 0.05 * t, 0.5 + t};
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng));
    const StateVector x0 = trivial_equilibrium(W, cfg);
    CHECK(rhs_original(x0, W, cfg).stacked().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rhs_shifted(StateVector::zeros(cfg.units()), W, cfg).stacked().cwiseAbs().maxCoeff() == 0.0);
    CHECK(x0.a.cwiseAbs().maxCoeff() == doctest::Approx(cfg.g_bar_a / (cfg.alpha * m)));
  }
}

TEST_CASE("analytic Jacobian agrees with central differences") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 3, m = 2 + t % 4;
    const NetworkConfig cfg{n, m, 0.25, 1.5};
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng, 2.0));
    Eigen::VectorXd xb(cfg.state_dim());
    for (auto& v : xb) v = N(rng);
    const StateVector bar = StateVector::from_stacked(xb);
    const Eigen::MatrixXd J = jacobian_shifted(bar, W, cfg);
    const Eigen::VectorXd x = xb + trivial_equilibrium(W, cfg).stacked();
    const Eigen::MatrixXd Jfd = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& y) { return oracle::scalar_rhs(y, W.entries(), n, m, cfg.alpha, cfg.g_bar_a); },
        x);
    CHECK((J - Jfd).norm() / std::max(1.0, Jfd.norm()) < 1e-7);
  }
}
