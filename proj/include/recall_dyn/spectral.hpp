#pragma once

// Closed-form spectral analysis of the linearization at the trivial
// equilibrium,
//
//   H = [ W Lambda - I    -I      ]
//       [ g_bar_a Lambda  -alpha I ].
//
// Under the structural assumptions W Lambda is symmetric, so an orthogonal P
// block-diagonalizes H into 2x2 blocks, one per eigenvalue mu_i of m W Lambda
// (first (m-1)n columns of P) or per block-constant direction (last n
// columns, spanned by e_k (x) 1_m).

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/model.hpp"

namespace recall_dyn {

struct SpectralReport {
  /// mu_1 >= ... >= mu_{(m-1)n}: eigenvalues of m W Lambda with the n
  /// structural zeros removed; followed by the eigenvalues of F (descending).
  Eigen::VectorXd mu;
  /// Eigenvalues of H as consecutive (nu_{i,+}, nu_{i,-}) pairs, i = 1..mn.
  Eigen::VectorXcd nu;
  /// Orthogonal basis; column i pairs with mu(i).
  Eigen::MatrixXd P;
  /// Leading eigenvector p_1 (sign fixed so its largest-magnitude entry is positive).
  Eigen::VectorXd p1;
  /// Block row-sum matrix F = (lambda_ik).
  Eigen::MatrixXd F;
  bool mu1_simple = false;
  double max_real_part = 0.0;
  /// (m-1)n, the number of non-structural modes.
  int leading = 0;

  double mu1() const { return mu(0); }
};

/// Builds P and the mu lists; fills nu and max_real_part via h_eigenvalues.
/// Throws StructureError when the assumptions fail.
SpectralReport lemma2_basis(const WeightMatrix& W, const NetworkConfig& cfg);

/// nu_{i,+-} from the closed-form 2x2 block eigenvalues: the quadratic
/// formula for i <= (m-1)n, (-alpha, -1) for the block-constant directions.
Eigen::VectorXcd h_eigenvalues(const SpectralReport& report, const NetworkConfig& cfg);

/// Closed-form eigenvalue pair for one mode with eigenvalue `mu` of m W Lambda.
std::pair<std::complex<double>, std::complex<double>> mode_eigenvalues(double mu,
                                                                        const NetworkConfig& cfg);

/// Dense linearization H at the trivial equilibrium.
Eigen::MatrixXd h_matrix(const WeightMatrix& W, const NetworkConfig& cfg);

/// Largest eigenvalue of the (symmetric) weight matrix.
double mu_max(const WeightMatrix& W);

/// Largest singular value of W.
double spectral_norm(const WeightMatrix& W);

/// Mode-coupling quantity sum_r (3/m (sum_t p_rt^2)^2 - sum_t p_rt^4) used by
/// the m >= 4 limit-cycle condition and the cubic Hopf term.
double quartic_margin(const Eigen::VectorXd& p1, const NetworkConfig& cfg);

/// W rescaled so that the leading eigenvalue of m W Lambda equals `target`.
/// Throws DegeneracyError if the current mu1 is not positive.
WeightMatrix rescale_to_mu1(const WeightMatrix& W, const NetworkConfig& cfg, double target);

/// Relative gap threshold for calling mu1 simple.
inline constexpr double kSimpleGap = 1e-8;

enum class Regime {
  global_equilibrium,
  local_equilibrium,
  hopf_limit_cycle,
  unclassified,
};

std::string to_string(Regime r);

struct ConditionCheck {
  std::string name;
  bool pass = false;
  /// Signed amount by which the inequality holds (positive) or fails.
  double margin = 0.0;
};

struct RegimeClassification {
  Regime regime = Regime::unclassified;
  /// Every table column whose conditions hold; `regime` is the first of them.
  std::vector<Regime> satisfied;
  std::vector<ConditionCheck> conditions;
  bool unique_equilibrium = false;

  const ConditionCheck& condition(const std::string& name) const;
};

/// Evaluates every row of the dynamics table with margins and picks the
/// first that applies, in the order global, local, limit cycle.
RegimeClassification classify_regime(const WeightMatrix& W, const NetworkConfig& cfg);

}  // namespace recall_dyn
