#pragma once

// Stability of the limit cycle born at mu1 = m (1 + alpha).
//
// The sign of the center-manifold coefficient d^3 V / dv1^3 (0) decides
// whether the bifurcating orbit attracts (negative: "vague attractor"). It is
// computed two independent ways:
//
//  * closed forms I1 + I2 + I3 in terms of the spectral data (p_1, mu_i, nu_i,
//    and the 2x2 conjugating blocks Q_i);
//  * the generic center-manifold algorithm: transform the shifted vector
//    field into the eigen-coordinates v, take exact second and third
//    derivatives of the softmax, solve for the quadratic center-manifold
//    coefficients g11, g12, g22, and evaluate the Marsden-McCracken formula.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/model.hpp"
#include "recall_dyn/spectral.hpp"

namespace recall_dyn {

struct HopfOptions {
  /// Extra rotation (radians) applied to the critical-plane basis Q_1. The
  /// coefficient is invariant under it.
  double q1_rotation = 0.0;
  /// Relative agreement required between the two coefficient routes.
  double agreement_tolerance = 1e-6;
};

/// Data of the coordinate change that brings the linearization at the
/// critical point to the form diag(R, H3bar) with R = [[0, w], [-w, 0]].
struct HopfSetup {
  NetworkConfig cfg;
  /// Weights rescaled so that mu1 = m (1 + alpha) exactly.
  WeightMatrix W;
  SpectralReport spectral;
  /// |lambda(0)| = sqrt(g_bar_a/m - alpha^2).
  double lambda0_abs = 0.0;
  /// Per-mode 2x2 linear blocks A_i in (x_i, y_i) coordinates, the conjugating
  /// Q_i, their inverses, and the resulting real normal forms Q_i^-1 A_i Q_i
  /// (rotation for i = 1, diag(nu+, nu-) or a real Jordan block otherwise).
  std::vector<Eigen::Matrix2d> A, Q, Q_inv, blocks;
  /// e_i = Q_i^-1 [mu_i; g_bar_a].
  std::vector<Eigen::Vector2d> e;
  /// u_i = (1/m) sum_rt p_{1,rt}^2 p_{i,rt}, zero for the block-constant modes.
  Eigen::VectorXd u;
  /// Block-diagonal linear part on the non-critical modes, size 2mn - 2.
  Eigen::MatrixXd H3bar;

  double mu1() const { return spectral.mu(0); }
  /// q_{1,1}^2 + q_{1,2}^2.
  double q1_row_norm2() const { return Q[0].row(0).squaredNorm(); }
  /// max_i || A_i Q_i - Q_i blocks_i ||, the conjugation residual.
  double conjugation_residual() const;
};

/// Builds the setup at the critical point. `W` is rescaled internally so that
/// mu1 hits m (1 + alpha) exactly.
/// Throws NotAtHopfError when g_bar_a <= m alpha^2, DegeneracyError when mu1 is
/// not simple or not positive, ResonanceError when some nu_i is 0 or +-2i|lambda(0)|.
HopfSetup hopf_setup(const WeightMatrix& W, const NetworkConfig& cfg,
                     const HopfOptions& options = {});

/// Pure cubic term.
double closed_form_I1(const HopfSetup& setup);
/// Center-manifold correction, summed over the non-critical modes with real
/// 2x2 block arithmetic. Throws DegeneracyError if some mu_i >= mu1 (i >= 2).
double closed_form_I2(const HopfSetup& setup);
/// Same sum evaluated with complex nu_{i,+-}; the imaginary part cancels.
double closed_form_I2_complex(const HopfSetup& setup);
/// Same sum built mode by mode from the inner products t^T H^-1 l,
/// t^T H (H^2 + 4w^2)^-1 l and t^T (H^2 + 4w^2)^-1 l.
double closed_form_I2_modewise(const HopfSetup& setup);
/// Quadratic-interaction term.
double closed_form_I3(const HopfSetup& setup);

/// The generic route, split by origin of each contribution. The three parts
/// correspond one-to-one to I1, I2 and I3.
struct CenterManifoldCoefficient {
  double third_derivative_term = 0.0;
  double center_manifold_term = 0.0;
  double quadratic_term = 0.0;
  double value() const { return third_derivative_term + center_manifold_term + quadratic_term; }
};

CenterManifoldCoefficient algorithm1_terms(const HopfSetup& setup);
double algorithm1_coefficient(const HopfSetup& setup);
double algorithm1_coefficient(const WeightMatrix& W, const NetworkConfig& cfg);

enum class HopfVerdict { vague_attractor, not_vague_attractor };
std::string to_string(HopfVerdict v);

struct HopfReport {
  double lambda0_abs = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  double total = 0.0;
  double numeric_total = 0.0;
  /// |numeric_total - total| / max(1, |total|).
  double agreement = 0.0;
  HopfVerdict verdict = HopfVerdict::not_vague_attractor;
  /// "a", "b", "c" when a sign shortcut applies, otherwise "numeric-only".
  std::string case_used;
};

HopfReport hopf_report(const WeightMatrix& W, const NetworkConfig& cfg,
                       const HopfOptions& options = {});

struct Theorem3Verdict {
  bool certified = false;
  std::string case_used;
  std::vector<std::string> reasons;
  std::optional<HopfReport> report;
};

/// Certifies an attracting limit cycle for mu1 slightly above m (1 + alpha):
/// mu1 simple, g_bar_a > m alpha^2, and a negative coefficient (from the
/// a/b/c shortcut when it applies, else from both routes agreeing).
Theorem3Verdict theorem3_verdict(const WeightMatrix& W, const NetworkConfig& cfg,
                                 const HopfOptions& options = {});

}  // namespace recall_dyn
