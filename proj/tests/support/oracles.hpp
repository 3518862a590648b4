#pragma once

// Independent reference implementations used only by the tests. None of these
// call into the library's numerics; they are written directly from the model
// equations in scalar form.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/learning.hpp"
#include "recall_dyn/model.hpp"

namespace oracle {

using recall_dyn::NetworkConfig;
using recall_dyn::WeightMatrix;

/// Softmax per hypercolumn with plain exp/sum, no max subtraction.
inline Eigen::VectorXd naive_softmax(const Eigen::VectorXd& s, int n, int m) {
  Eigen::VectorXd o(n * m);
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < m; ++j) z += std::exp(s(i * m + j));
    for (int j = 0; j < m; ++j) o(i * m + j) = std::exp(s(i * m + j)) / z;
  }
  return o;
}

/// Right-hand side written unit by unit with explicit loops; x = [s; a].
inline Eigen::VectorXd scalar_rhs(const Eigen::VectorXd& x, const Eigen::MatrixXd& W, int n, int m,
                                  double alpha, double g) {
  const int u = n * m;
  const Eigen::VectorXd o = naive_softmax(x.head(u), n, m);
  Eigen::VectorXd dx(2 * u);
  for (int a = 0; a < u; ++a) {
    double drive = 0.0;
    for (int b = 0; b < u; ++b) drive += W(a, b) * o(b);
    dx(a) = drive - x(a) - x(u + a);
    dx(u + a) = g * o(a) - alpha * x(u + a);
  }
  return dx;
}

/// Central-difference Jacobian of `f` at x.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

/// Softmax Jacobian at uniform outputs (1/m each), entry by entry.
inline Eigen::MatrixXd uniform_softmax_jacobian(int n, int m) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        L(i * m + j, i * m + k) = (j == k ? 1.0 / m : 0.0) - 1.0 / (m * m);
      }
    }
  }
  return L;
}

/// Linearization at the trivial equilibrium.
inline Eigen::MatrixXd dense_h(const Eigen::MatrixXd& W, int n, int m, double alpha, double g) {
  const int u = n * m;
  const Eigen::MatrixXd L = uniform_softmax_jacobian(n, m);
  Eigen::MatrixXd H(2 * u, 2 * u);
  H << W * L - Eigen::MatrixXd::Identity(u, u), -Eigen::MatrixXd::Identity(u, u), g * L,
      -alpha * Eigen::MatrixXd::Identity(u, u);
  return H;
}

inline Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues();
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3)). Returns assignment[row] = column.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

/// Largest |a_i - b_sigma(i)| under the optimal matching of two multisets.
inline double matched_max_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::MatrixXd cost(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) cost(i, j) = std::abs(a(i) - b(j));
  }
  const auto match = hungarian(cost);
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) worst = std::max(worst, cost(i, match[i]));
  return worst;
}

/// Random weights satisfying the three structural assumptions:
/// W_ik = C Z_ik C + (lambda_ik / m) 1 1^T with C the centering projector,
/// Z_ki = Z_ik^T and lambda symmetric; diagonal blocks are zero.
inline Eigen::MatrixXd random_structured(int n, int m, std::mt19937_64& rng, double scale = 1.0,
                                         double lambda_scale = 1.0) {
  std::normal_distribution<double> N(0.0, 1.0);
  const Eigen::MatrixXd C =
      Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      Eigen::MatrixXd Z(m, m);
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) Z(a, b) = scale * N(rng);
      }
      const double lam = lambda_scale * N(rng);
      const Eigen::MatrixXd B = C * Z * C + Eigen::MatrixXd::Constant(m, m, lam / m);
      W.block(i * m, k * m, m, m) = B;
      W.block(k * m, i * m, m, m) = B.transpose();
    }
  }
  return W;
}

/// Hand-enumerated single-pattern block for hypercolumns i != k with active
/// minicolumns zi, zk (one-based): +1 co-active, -1/(m-2) if exactly one of
/// the pair is active, 0 if neither.
inline Eigen::MatrixXd enumerated_block(int zi, int zk, int m) {
  Eigen::MatrixXd B(m, m);
  for (int j = 1; j <= m; ++j) {
    for (int l = 1; l <= m; ++l) {
      const bool a = (j == zi), b = (l == zk);
      B(j - 1, l - 1) = (a && b) ? 1.0 : (a != b ? -1.0 / (m - 2) : 0.0);
    }
  }
  return B;
}

inline std::vector<recall_dyn::Pattern> reference_patterns() {
  return {{{1, 1, 1, 1, 1, 1}}, {{2, 2, 2, 1, 1, 1}}, {{2, 2, 3, 1, 3, 2}}};
}

inline NetworkConfig reference_config(double g = 97.0 / 54.0) { return {6, 3, 1.0 / 54.0, g}; }

inline WeightMatrix reference_weights(double mu1, double g = 97.0 / 54.0) {
  const NetworkConfig cfg = reference_config(g);
  return recall_dyn::learn_weights({reference_patterns(), mu1, 6, 3, recall_dyn::LearningRule::standard},
                                   cfg);
}

struct HopfCase {
  WeightMatrix W;
  NetworkConfig cfg;
};

/// Random structured network with g_bar_a above m alpha^2 and a positive,
/// well-separated leading mu1. The Hopf routines rescale W themselves.
inline HopfCase random_hopf_case(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  while (true) {
    const Eigen::MatrixXd E = random_structured(n, m, rng, 1.0 + 2.0 * U(rng));
    const WeightMatrix W(n, m, E);
    const double alpha = 0.02 + 0.4 * U(rng);
    const double g = m * alpha * alpha * (1.5 + 20.0 * U(rng)) + 0.2 * U(rng);
    const NetworkConfig cfg{n, m, alpha, g};
    Eigen::EigenSolver<Eigen::MatrixXd> ev(m * E * uniform_softmax_jacobian(n, m), false);
    Eigen::VectorXd mu = ev.eigenvalues().real();
    std::sort(mu.data(), mu.data() + mu.size(), std::greater<>());
    if (mu(0) > 0.1 && mu(0) - mu(1) > 0.05 * mu(0)) return {W, cfg};
  }
}

}  // namespace oracle
