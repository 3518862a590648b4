#pragma once

// Network definition for the free-recall attractor model:
//
//   s' = W f(s) - s - a
//   a' = g_bar_a f(s) - alpha a
//
// with f the per-hypercolumn softmax. States are flattened hypercolumn-major:
// unit (i, j) lives at index i*m + j (zero-based here, one-based in all file
// and CLI output).

#include <optional>

#include <Eigen/Dense>

namespace recall_dyn {

struct NetworkConfig {
  int n = 1;             // hypercolumns
  int m = 2;             // minicolumns per hypercolumn
  double alpha = 0.5;    // 1/tau, in (0, 1)
  double g_bar_a = 1.0;  // alpha * g_a, > 0

  /// Throws ConfigError when any field is outside its domain.
  void validate() const;

  int units() const { return n * m; }
  int state_dim() const { return 2 * n * m; }
  /// g_bar_a / alpha, the adaptation gain g_a.
  double adaptation_gain() const { return g_bar_a / alpha; }
  /// mu1 at which the leading eigenpair of the linearization crosses the
  /// imaginary axis: m (1 + alpha).
  double critical_mu1() const { return m * (1.0 + alpha); }
};

/// Minicolumn states s and adaptation levels a, each of length n*m. Also used
/// for time derivatives of the same shape.
struct StateVector {
  Eigen::VectorXd s;
  Eigen::VectorXd a;

  StateVector() = default;
  StateVector(Eigen::VectorXd s_, Eigen::VectorXd a_) : s(std::move(s_)), a(std::move(a_)) {}

  static StateVector zeros(int units) {
    return {Eigen::VectorXd::Zero(units), Eigen::VectorXd::Zero(units)};
  }
  /// Stacked [s; a].
  Eigen::VectorXd stacked() const;
  static StateVector from_stacked(const Eigen::VectorXd& x);

  bool all_finite() const { return s.allFinite() && a.allFinite(); }
};

/// Dense n*m x n*m connection matrix with zero diagonal blocks. Construction
/// rejects a nonzero diagonal block rather than silently zeroing it.
class WeightMatrix {
 public:
  WeightMatrix(int n, int m, Eigen::MatrixXd entries);

  static WeightMatrix zeros(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  int units() const { return n_ * m_; }
  const Eigen::MatrixXd& entries() const { return entries_; }

  /// Block W_{i,k} (zero-based hypercolumn indices).
  Eigen::MatrixXd block(int i, int k) const { return entries_.block(i * m_, k * m_, m_, m_); }

  /// n x n matrix of block row sums lambda_ik, read off the first row of each
  /// block. Only meaningful when the row sums are constant within blocks.
  Eigen::MatrixXd row_sum_matrix() const;

  /// Same network with every weight multiplied by `factor`.
  WeightMatrix scaled(double factor) const { return {n_, m_, entries_ * factor}; }

  /// Throws DimensionError unless this matrix matches `cfg`.
  void check_dims(const struct NetworkConfig& cfg) const;

 private:
  int n_;
  int m_;
  Eigen::MatrixXd entries_;
};

/// Result of checking the three structural assumptions on W.
struct AssumptionReport {
  bool symmetric = false;           // W = W^T
  bool constant_block_rows = false;  // each block has constant row sums
  bool symmetric_row_sums = false;   // lambda_ik = lambda_ki
  double symmetry_violation = 0.0;   // max |w_ab - w_ba|
  double row_sum_violation = 0.0;    // max over blocks of (max - min) row sum
  double row_sum_symmetry_violation = 0.0;
  double tolerance = 0.0;
  std::optional<Eigen::MatrixXd> F;  // lambda_ik, present when rows are constant

  bool all_pass() const { return symmetric && constant_block_rows && symmetric_row_sums; }
};

/// Default absolute tolerance for assumption checks, applied relative to
/// max(1, max |w|).
inline constexpr double kAssumptionTolerance = 1e-12;

AssumptionReport validate_assumptions(const WeightMatrix& W,
                                      double tolerance = kAssumptionTolerance);

/// Throws StructureError with the offending magnitudes unless all three
/// assumptions hold.
void require_assumptions(const WeightMatrix& W, double tolerance = kAssumptionTolerance);

/// s' and a' of the original model at `state`.
StateVector rhs_original(const StateVector& state, const WeightMatrix& W,
                         const NetworkConfig& cfg);

/// Right-hand side in coordinates shifted so the trivial equilibrium sits at
/// the origin; exactly zero at the origin.
StateVector rhs_shifted(const StateVector& state_bar, const WeightMatrix& W,
                        const NetworkConfig& cfg);

/// Analytic 2mn x 2mn Jacobian of rhs_shifted. Because the softmax is
/// invariant under per-block constant shifts this is also the Jacobian of
/// rhs_original at state_bar + (s0, a0).
Eigen::MatrixXd jacobian_shifted(const StateVector& state_bar, const WeightMatrix& W,
                                 const NetworkConfig& cfg);

/// Synchronized equilibrium (s0, a0): s0 = [c_1 1, ..., c_n 1] with
/// c_i = (sum_k lambda_ik - g_bar_a/alpha)/m and a0 = g_bar_a/(alpha m) 1.
StateVector trivial_equilibrium(const WeightMatrix& W, const NetworkConfig& cfg);

}  // namespace recall_dyn
