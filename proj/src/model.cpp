#include "recall_dyn/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

void NetworkConfig::validate() const {
  if (n < 1) throw ConfigError(fmt::format("n must be >= 1 (got {})", n));
  if (m < 2) throw ConfigError(fmt::format("m must be >= 2 (got {})", m));
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 1) (got {})", alpha));
  }
  if (!(g_bar_a > 0.0) || !std::isfinite(g_bar_a)) {
    throw ConfigError(fmt::format("g_bar_a must be positive (got {})", g_bar_a));
  }
}

Eigen::VectorXd StateVector::stacked() const {
  Eigen::VectorXd x(s.size() + a.size());
  x << s, a;
  return x;
}

StateVector StateVector::from_stacked(const Eigen::VectorXd& x) {
  const Eigen::Index half = x.size() / 2;
  return {x.head(half), x.tail(half)};
}

WeightMatrix::WeightMatrix(int n, int m, Eigen::MatrixXd entries)
    : n_(n), m_(m), entries_(std::move(entries)) {
  if (n < 1 || m < 2) throw DimensionError(fmt::format("invalid dimensions n={}, m={}", n, m));
  if (entries_.rows() != n * m || entries_.cols() != n * m) {
    throw DimensionError(fmt::format("weight matrix is {}x{}, expected {}x{}", entries_.rows(),
                                     entries_.cols(), n * m, n * m));
  }
  if (!entries_.allFinite()) throw StructureError("weight matrix contains non-finite entries");
  for (int i = 0; i < n; ++i) {
    const double worst = entries_.block(i * m, i * m, m, m).cwiseAbs().maxCoeff();
    if (worst != 0.0) {
      throw StructureError(fmt::format(
          "diagonal block W_{{{0},{0}}} must be zero (max |entry| = {1:.3g})", i + 1, worst));
    }
  }
}

WeightMatrix WeightMatrix::zeros(int n, int m) {
  return {n, m, Eigen::MatrixXd::Zero(n * m, n * m)};
}

Eigen::MatrixXd WeightMatrix::row_sum_matrix() const {
  Eigen::MatrixXd F(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) F(i, k) = entries_.row(i * m_).segment(k * m_, m_).sum();
  return F;
}

void WeightMatrix::check_dims(const NetworkConfig& cfg) const {
  if (cfg.n != n_ || cfg.m != m_) {
    throw DimensionError(fmt::format("weight matrix has (n, m) = ({}, {}) but config has ({}, {})",
                                     n_, m_, cfg.n, cfg.m));
  }
}

AssumptionReport validate_assumptions(const WeightMatrix& W, double tolerance) {
  const auto& E = W.entries();
  const int n = W.n();
  const int m = W.m();
  AssumptionReport rep;
  rep.tolerance = tolerance * std::max(1.0, E.cwiseAbs().maxCoeff());

  rep.symmetry_violation = (E - E.transpose()).cwiseAbs().maxCoeff();
  rep.symmetric = rep.symmetry_violation <= rep.tolerance;

  double worst_rows = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd sums = E.block(i * m, k * m, m, m).rowwise().sum();
      worst_rows = std::max(worst_rows, sums.maxCoeff() - sums.minCoeff());
    }
  }
  rep.row_sum_violation = worst_rows;
  rep.constant_block_rows = worst_rows <= rep.tolerance;

  const Eigen::MatrixXd F = W.row_sum_matrix();
  rep.row_sum_symmetry_violation = (F - F.transpose()).cwiseAbs().maxCoeff();
  rep.symmetric_row_sums = rep.row_sum_symmetry_violation <= rep.tolerance;
  if (rep.constant_block_rows) rep.F = F;
  return rep;
}

void require_assumptions(const WeightMatrix& W, double tolerance) {
  const AssumptionReport rep = validate_assumptions(W, tolerance);
  if (rep.all_pass()) return;
  std::string msg = "weight matrix violates the model assumptions:";
  if (!rep.symmetric) msg += fmt::format(" asymmetry {:.3g};", rep.symmetry_violation);
  if (!rep.constant_block_rows)
    msg += fmt::format(" non-constant block row sums {:.3g};", rep.row_sum_violation);
  if (!rep.symmetric_row_sums)
    msg += fmt::format(" lambda_ik != lambda_ki by {:.3g};", rep.row_sum_symmetry_violation);
  throw StructureError(msg);
}

namespace {

void check_state(const StateVector& x, const WeightMatrix& W, const NetworkConfig& cfg) {
  W.check_dims(cfg);
  if (x.s.size() != W.units() || x.a.size() != W.units()) {
    throw DimensionError(fmt::format("state has lengths ({}, {}), expected {}", x.s.size(),
                                     x.a.size(), W.units()));
  }
}

}  // namespace

StateVector rhs_original(const StateVector& state, const WeightMatrix& W,
                         const NetworkConfig& cfg) {
  check_state(state, W, cfg);
  const Eigen::VectorXd o = softmax_output(state.s, cfg);
  return {W.entries() * o - state.s - state.a, cfg.g_bar_a * o - cfg.alpha * state.a};
}

StateVector rhs_shifted(const StateVector& state_bar, const WeightMatrix& W,
                        const NetworkConfig& cfg) {
  check_state(state_bar, W, cfg);
  const Eigen::VectorXd fb = shifted_nonlinearity(state_bar.s, cfg);
  return {W.entries() * fb - state_bar.s - state_bar.a,
          cfg.g_bar_a * fb - cfg.alpha * state_bar.a};
}

Eigen::MatrixXd jacobian_shifted(const StateVector& state_bar, const WeightMatrix& W,
                                 const NetworkConfig& cfg) {
  check_state(state_bar, W, cfg);
  const int u = cfg.units();
  const Eigen::MatrixXd D = softmax_jacobian(softmax_output(state_bar.s, cfg), cfg);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(u, u);
  Eigen::MatrixXd J(2 * u, 2 * u);
  J << W.entries() * D - I, -I, cfg.g_bar_a * D, -cfg.alpha * I;
  return J;
}

StateVector trivial_equilibrium(const WeightMatrix& W, const NetworkConfig& cfg) {
  W.check_dims(cfg);
  require_assumptions(W);
  const int m = cfg.m;
  const Eigen::VectorXd c =
      (W.row_sum_matrix().rowwise().sum().array() - cfg.adaptation_gain()) / m;
  StateVector eq = StateVector::zeros(cfg.units());
  for (int i = 0; i < cfg.n; ++i) eq.s.segment(i * m, m).setConstant(c(i));
  eq.a.setConstant(cfg.adaptation_gain() / m);
  return eq;
}

}  // namespace recall_dyn
