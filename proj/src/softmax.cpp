#include "recall_dyn/softmax.hpp"

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"

namespace recall_dyn {

namespace {

void check_length(const Eigen::VectorXd& v, const NetworkConfig& cfg, const char* what) {
  if (v.size() != cfg.units()) {
    throw DimensionError(fmt::format("{} has length {}, expected n*m = {}", what, v.size(),
                                     cfg.units()));
  }
}

}  // namespace

Eigen::VectorXd softmax_output(const Eigen::VectorXd& s, const NetworkConfig& cfg) {
  check_length(s, cfg, "state");
  if (!s.allFinite()) throw InvalidStateError("softmax input contains non-finite entries");
  const int m = cfg.m;
  Eigen::VectorXd o(s.size());
  for (int r = 0; r < cfg.n; ++r) {
    auto block = s.segment(r * m, m);
    auto out = o.segment(r * m, m);
    out = (block.array() - block.maxCoeff()).exp().matrix();
    out /= out.sum();
  }
  return o;
}

Eigen::VectorXd shifted_nonlinearity(const Eigen::VectorXd& s_bar, const NetworkConfig& cfg) {
  return softmax_output(s_bar, cfg).array() - 1.0 / cfg.m;
}

Eigen::MatrixXd softmax_jacobian(const Eigen::VectorXd& o, const NetworkConfig& cfg) {
  check_length(o, cfg, "output");
  const int m = cfg.m;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(o.size(), o.size());
  for (int r = 0; r < cfg.n; ++r) {
    auto p = o.segment(r * m, m);
    J.block(r * m, r * m, m, m) = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
  }
  return J;
}

Eigen::MatrixXd softmax_jacobian_apply(const Eigen::VectorXd& o, const Eigen::MatrixXd& V,
                                       const NetworkConfig& cfg) {
  const int m = cfg.m;
  Eigen::MatrixXd out(V.rows(), V.cols());
  for (int r = 0; r < cfg.n; ++r) {
    auto p = o.segment(r * m, m);
    auto rows = V.middleRows(r * m, m);
    // (diag(p) - p p^T) V_r = p .* (V_r - 1 (p^T V_r))
    Eigen::RowVectorXd mean = p.transpose() * rows;
    out.middleRows(r * m, m) =
        (rows.rowwise() - mean).array().colwise() * p.array();
  }
  return out;
}

Eigen::VectorXd softmax_second_derivative(const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& b, const NetworkConfig& cfg) {
  const int m = cfg.m;
  Eigen::VectorXd out(o.size());
  for (int r = 0; r < cfg.n; ++r) {
    Eigen::ArrayXd p = o.segment(r * m, m);
    Eigen::ArrayXd ac = a.segment(r * m, m).array() - (p * a.segment(r * m, m).array()).sum();
    Eigen::ArrayXd bc = b.segment(r * m, m).array() - (p * b.segment(r * m, m).array()).sum();
    const double cov_ab = (p * ac * bc).sum();
    out.segment(r * m, m) = (p * (ac * bc - cov_ab)).matrix();
  }
  return out;
}

Eigen::VectorXd softmax_third_derivative(const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                         const NetworkConfig& cfg) {
  const int m = cfg.m;
  Eigen::VectorXd out(o.size());
  for (int r = 0; r < cfg.n; ++r) {
    Eigen::ArrayXd p = o.segment(r * m, m);
    Eigen::ArrayXd ac = a.segment(r * m, m).array() - (p * a.segment(r * m, m).array()).sum();
    Eigen::ArrayXd bc = b.segment(r * m, m).array() - (p * b.segment(r * m, m).array()).sum();
    Eigen::ArrayXd cc = c.segment(r * m, m).array() - (p * c.segment(r * m, m).array()).sum();
    const double cov_ab = (p * ac * bc).sum();
    const double cov_ac = (p * ac * cc).sum();
    const double cov_bc = (p * bc * cc).sum();
    const double k3 = (p * ac * bc * cc).sum();
    out.segment(r * m, m) =
        (p * (ac * bc * cc - cov_ab * cc - cov_ac * bc - cov_bc * ac - k3)).matrix();
  }
  return out;
}

Eigen::MatrixXd lambda_matrix(const NetworkConfig& cfg) {
  const int m = cfg.m;
  const Eigen::MatrixXd block = Eigen::MatrixXd::Identity(m, m) / m -
                                Eigen::MatrixXd::Constant(m, m, 1.0 / (double(m) * m));
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(cfg.units(), cfg.units());
  for (int r = 0; r < cfg.n; ++r) L.block(r * m, r * m, m, m) = block;
  return L;
}

}  // namespace recall_dyn
