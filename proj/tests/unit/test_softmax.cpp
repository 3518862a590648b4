#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

using namespace recall_dyn;

TEST_CASE("softmax matches the naive formula and sums to one per hypercolumn") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkConfig cfg{3, 4, 0.3, 1.0};
    Eigen::VectorXd s(cfg.units());
    for (auto& x : s) x = N(rng);
    const Eigen::VectorXd o = softmax_output(s, cfg);
    CHECK((o - oracle::naive_softmax(s, cfg.n, cfg.m)).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < cfg.n; ++i) CHECK(o.segment(i * cfg.m, cfg.m).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("softmax is invariant under per-block shifts and stable for large inputs") {
  const NetworkConfig cfg{2, 3, 0.3, 1.0};
  Eigen::VectorXd s(6);
  s << 1, 2, 3, -1, 0, 1;
  Eigen::VectorXd shifted = s;
  shifted.head(3).array() += 800.0;
  shifted.tail(3).array() -= 800.0;
  CHECK((softmax_output(s, cfg) - softmax_output(shifted, cfg)).norm() < 1e-14);
  CHECK(softmax_output(shifted, cfg).allFinite());
}

TEST_CASE("softmax rejects bad input") {
  const NetworkConfig cfg{2, 3, 0.3, 1.0};
  CHECK_THROWS_AS(softmax_output(Eigen::VectorXd::Zero(5), cfg), DimensionError);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(6);
  s(2) = std::nan("");
  CHECK_THROWS_AS(softmax_output(s, cfg), InvalidStateError);
}

TEST_CASE("lambda matrix") {
  const NetworkConfig cfg2{1, 2, 0.3, 1.0};
  Eigen::MatrixXd expect(2, 2);
  expect << 0.25, -0.25, -0.25, 0.25;
  CHECK((lambda_matrix(cfg2) - expect).norm() < 1e-15);

  const NetworkConfig cfg{3, 4, 0.3, 1.0};
  const Eigen::MatrixXd L = lambda_matrix(cfg);
  CHECK((L * Eigen::VectorXd::Ones(12)).norm() < 1e-15);
  CHECK((L - softmax_jacobian(Eigen::VectorXd::Constant(12, 0.25), cfg)).norm() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.block(0, 0, 4, 4));
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-14));
  for (int k = 1; k < 4; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(0.25));
}

TEST_CASE("softmax derivatives agree with finite differences of the naive softmax") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  const NetworkConfig cfg{2, 4, 0.3, 1.0};
  const int u = cfg.units();
  auto rand_vec = [&] {
    Eigen::VectorXd v(u);
    for (auto& x : v) x = N(rng);
    return v;
  };
  auto f = [&](const Eigen::VectorXd& s) { return oracle::naive_softmax(s, cfg.n, cfg.m); };
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd s = rand_vec(), a = rand_vec(), b = rand_vec(), c = rand_vec();
    const Eigen::VectorXd o = softmax_output(s, cfg);

    const double h = 1e-5;
    const Eigen::VectorXd d1 = (f(s + h * a) - f(s - h * a)) / (2 * h);
    CHECK((softmax_jacobian(o, cfg) * a - d1).norm() < 1e-8);
    Eigen::MatrixXd V(u, 2);
    V << a, b;
    CHECK((softmax_jacobian_apply(o, V, cfg) - softmax_jacobian(o, cfg) * V).norm() < 1e-14);

    // Mixed second difference: D2f[a,b] ~ (f(s+ha+hb) - f(s+ha-hb) - f(s-ha+hb) + f(s-ha-hb)) / 4h^2
    const double h2 = 1e-4;
    const Eigen::VectorXd d2 = (f(s + h2 * a + h2 * b) - f(s + h2 * a - h2 * b) -
                                f(s - h2 * a + h2 * b) + f(s - h2 * a - h2 * b)) /
                               (4 * h2 * h2);
    CHECK((softmax_second_derivative(o, a, b, cfg) - d2).norm() < 1e-6);

    // Third derivative as the directional derivative of the second.
    const double h3 = 1e-5;
    const Eigen::VectorXd d3 = (softmax_second_derivative(softmax_output(s + h3 * c, cfg), a, b, cfg) -
                                softmax_second_derivative(softmax_output(s - h3 * c, cfg), a, b, cfg)) /
                               (2 * h3);
    CHECK((softmax_third_derivative(o, a, b, c, cfg) - d3).norm() < 1e-8);
    // Symmetric in its arguments.
    CHECK((softmax_third_derivative(o, a, b, c, cfg) - softmax_third_derivative(o, c, a, b, cfg)).norm() <
          1e-14);
  }
}

TEST_CASE("shifted nonlinearity satisfies the energy inequality") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.01, 20.0);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const NetworkConfig cfg{1 + trial % 4, 2 + trial % 5, 0.3, 1.0};
    Eigen::VectorXd s(cfg.units());
    const double k = scale(rng);
    for (auto& x : s) x = k * N(rng);
    const Eigen::VectorXd fb = shifted_nonlinearity(s, cfg);
    CHECK(s.dot(fb) - 2.0 * fb.squaredNorm() >= -1e-12);
    for (int i = 0; i < cfg.n; ++i) CHECK(std::abs(fb.segment(i * cfg.m, cfg.m).sum()) < 1e-14);
  }
}
