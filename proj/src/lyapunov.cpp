#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

void LyapunovOptions::validate() const {
  if (!(dt > 0.0)) throw ConfigError("lyapunov dt must be positive");
  if (!(renorm_interval >= dt)) throw ConfigError("renorm_interval must be at least dt");
  if (!(t_total >= renorm_interval)) throw ConfigError("t_total must be at least renorm_interval");
  if (!(transient >= 0.0)) throw ConfigError("transient must be non-negative");
  if (!(frame_transient >= 0.0)) throw ConfigError("frame_transient must be non-negative");
  if (history_stride < 1) throw ConfigError("history_stride must be >= 1");
}

namespace {

Eigen::VectorXd sorted_descending(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const Eigen::VectorXd& x0, const VectorField& flow,
                                   const TangentMap& tangent, const LyapunovOptions& opt) {
  opt.validate();
  const int N = static_cast<int>(x0.size());
  const double dt = opt.dt;
  Eigen::VectorXd x = x0;

  auto check = [&](const Eigen::VectorXd& v, double t) {
    if (!v.allFinite()) {
      throw DivergenceError(fmt::format("state became non-finite after t = {:.6g}", t), t);
    }
  };

  const long transient_steps = std::lround(opt.transient / dt);
  for (long k = 0; k < transient_steps; ++k) {
    const Eigen::VectorXd k1 = flow(x);
    const Eigen::VectorXd k2 = flow(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = flow(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = flow(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(x, k * dt);
  }

  const long per_renorm = std::max(1L, std::lround(opt.renorm_interval / dt));
  const long n_renorm = std::max(1L, std::lround(opt.t_total / (per_renorm * dt)));
  const long n_skip = std::lround(opt.frame_transient / (per_renorm * dt));
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(N, N);
  Eigen::VectorXd log_sum = Eigen::VectorXd::Zero(N);

  LyapunovSpectrum out;
  out.renorm_interval = per_renorm * dt;
  for (long r = 1 - n_skip; r <= n_renorm; ++r) {
    for (long k = 0; k < per_renorm; ++k) {
      const Eigen::VectorXd k1 = flow(x);
      const Eigen::MatrixXd l1 = tangent(x, V);
      const Eigen::VectorXd xa = x + 0.5 * dt * k1;
      const Eigen::VectorXd k2 = flow(xa);
      const Eigen::MatrixXd l2 = tangent(xa, V + 0.5 * dt * l1);
      const Eigen::VectorXd xb = x + 0.5 * dt * k2;
      const Eigen::VectorXd k3 = flow(xb);
      const Eigen::MatrixXd l3 = tangent(xb, V + 0.5 * dt * l2);
      const Eigen::VectorXd xc = x + dt * k3;
      const Eigen::VectorXd k4 = flow(xc);
      const Eigen::MatrixXd l4 = tangent(xc, V + dt * l3);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      V += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
      check(x, opt.transient + ((r - 1 + n_skip) * per_renorm + k) * dt);
    }
    const double t = r * out.renorm_interval;
    if (!V.allFinite()) {
      throw RenormalizationError(fmt::format("tangent frame became non-finite at t = {:.6g}", t));
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
    for (int i = 0; i < N; ++i) {
      const double d = R(i, i);
      if (!(std::abs(d) >= 1e-300)) {
        throw RenormalizationError(
            fmt::format("tangent vector {} collapsed (norm {:.3g}) at t = {:.6g}", i + 1, std::abs(d), t));
      }
      if (r > 0) log_sum(i) += std::log(std::abs(d));
      if (d < 0.0) Q.col(i) = -Q.col(i);
    }
    V = Q;
    if (r > 0 && (r % opt.history_stride == 0 || r == n_renorm)) {
      out.history_times.push_back(t);
      out.history.push_back(sorted_descending(log_sum / t));
    }
  }
  out.exponents = sorted_descending(log_sum / (n_renorm * out.renorm_interval));
  return out;
}

LyapunovSpectrum lyapunov_spectrum(const StateVector& x0, const WeightMatrix& W,
                                   const NetworkConfig& cfg, const LyapunovOptions& opt) {
  cfg.validate();
  W.check_dims(cfg);
  if (x0.s.size() != cfg.units() || x0.a.size() != cfg.units()) {
    throw DimensionError("initial state does not match the network size");
  }
  if (!x0.all_finite()) throw InvalidStateError("initial state is not finite");
  const int u = cfg.units();
  const Eigen::MatrixXd& Wm = W.entries();

  auto flow = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd o = softmax_output(x.head(u), cfg);
    Eigen::VectorXd dx(2 * u);
    dx.head(u) = Wm * o - x.head(u) - x.tail(u);
    dx.tail(u) = cfg.g_bar_a * o - cfg.alpha * x.tail(u);
    return dx;
  };
  // J V with J = [[W Df - I, -I], [g Df, -alpha I]], without forming J.
  auto tangent = [&](const Eigen::VectorXd& x, const Eigen::MatrixXd& V) {
    const Eigen::VectorXd o = softmax_output(x.head(u), cfg);
    const Eigen::MatrixXd DV = softmax_jacobian_apply(o, V.topRows(u), cfg);
    Eigen::MatrixXd out(2 * u, V.cols());
    out.topRows(u) = Wm * DV - V.topRows(u) - V.bottomRows(u);
    out.bottomRows(u) = cfg.g_bar_a * DV - cfg.alpha * V.bottomRows(u);
    return out;
  };
  try {
    return lyapunov_spectrum(x0.stacked(), flow, tangent, opt);
  } catch (const InvalidStateError& e) {
    throw DivergenceError(e.what(), 0.0);
  }
}

LyapunovSpectrum lyapunov_spectrum_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0,
                                          const LyapunovOptions& opt) {
  if (A.rows() != A.cols() || A.rows() != x0.size()) {
    throw DimensionError("linear system matrix must be square and match the initial state");
  }
  auto flow = [&](const Eigen::VectorXd& x) { return (A * x).eval(); };
  auto tangent = [&](const Eigen::VectorXd&, const Eigen::MatrixXd& V) { return (A * V).eval(); };
  return lyapunov_spectrum(x0, flow, tangent, opt);
}

}  // namespace recall_dyn
