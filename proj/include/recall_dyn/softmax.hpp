#pragma once

// Per-hypercolumn softmax and its derivatives.
//
// Derivatives of the softmax are joint cumulants of the categorical
// distribution with probabilities o = f(s): for centered directions
// a' = a - <a>, b' = b - <b>, c' = c - <c> (means under o),
//
//   Df[a]_t        = o_t a'_t
//   D2f[a,b]_t     = o_t (a'_t b'_t - cov(a,b))
//   D3f[a,b,c]_t   = o_t (a'_t b'_t c'_t - cov(a,b) c'_t - cov(a,c) b'_t
//                         - cov(b,c) a'_t - k3(a,b,c))
//
// where cov and k3 are the second and third central moments under o.

#include <Eigen/Dense>

#include "recall_dyn/model.hpp"

namespace recall_dyn {

/// Output map o = f(s). The per-block maximum is subtracted before
/// exponentiation. Throws InvalidStateError on non-finite input.
Eigen::VectorXd softmax_output(const Eigen::VectorXd& s, const NetworkConfig& cfg);

/// f(s_bar) - (1/m) 1. Block sums of the result are zero.
Eigen::VectorXd shifted_nonlinearity(const Eigen::VectorXd& s_bar, const NetworkConfig& cfg);

/// Block-diagonal Jacobian df/ds evaluated at outputs `o`; the block for
/// hypercolumn r is diag(o_r) - o_r o_r^T.
Eigen::MatrixXd softmax_jacobian(const Eigen::VectorXd& o, const NetworkConfig& cfg);

/// Product (df/ds) * V for a tall matrix V without forming the full Jacobian.
Eigen::MatrixXd softmax_jacobian_apply(const Eigen::VectorXd& o, const Eigen::MatrixXd& V,
                                       const NetworkConfig& cfg);

/// Second directional derivative D2f(s)[a, b], given o = f(s).
Eigen::VectorXd softmax_second_derivative(const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& b, const NetworkConfig& cfg);

/// Third directional derivative D3f(s)[a, b, c], given o = f(s).
Eigen::VectorXd softmax_third_derivative(const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                         const NetworkConfig& cfg);

/// Block-diagonal Lambda = df/ds at s = 0: blocks (1/m) I - (1/m^2) 1 1^T.
Eigen::MatrixXd lambda_matrix(const NetworkConfig& cfg);

}  // namespace recall_dyn
