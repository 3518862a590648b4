#include <cmath>

#include <fmt/format.h>

#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"
#include "recall_dyn/spectral.hpp"

namespace recall_dyn {

void IntegratorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError(fmt::format("dt must be positive (got {})", dt));
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw ConfigError(fmt::format("t_end must be positive (got {})", t_end));
  }
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  if (!(record_start >= 0.0)) throw ConfigError("record_start must be non-negative");
}

Eigen::VectorXd Trajectory::output(std::size_t k, const NetworkConfig& cfg) const {
  return softmax_output(states.at(k).s, cfg);
}

Trajectory Trajectory::tail(double t_from) const {
  Trajectory out;
  out.warnings = warnings;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t_from) {
      out.times.push_back(times[k]);
      out.states.push_back(states[k]);
    }
  }
  return out;
}

Trajectory integrate(const StateVector& x0, const WeightMatrix& W, const NetworkConfig& cfg,
                     const IntegratorSpec& spec) {
  cfg.validate();
  spec.validate();
  W.check_dims(cfg);
  if (x0.s.size() != cfg.units() || x0.a.size() != cfg.units()) {
    throw DimensionError("initial state does not match the network size");
  }
  if (!x0.all_finite()) throw InvalidStateError("initial state is not finite");

  Trajectory traj;
  try {
    const SpectralReport rep = lemma2_basis(W, cfg);
    const double stiff = spec.dt * rep.nu.cwiseAbs().maxCoeff();
    if (stiff >= 0.5) {
      traj.warnings.push_back(fmt::format(
          "dt * max|nu| = {:.3g} >= 0.5; the step may be too large for stable integration", stiff));
    }
  } catch (const StructureError&) {
    // The heuristic needs the closed-form spectrum; skip it otherwise.
  }

  const int u = cfg.units();
  const Eigen::MatrixXd& Wm = W.entries();
  auto field = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd o = softmax_output(x.head(u), cfg);
    Eigen::VectorXd dx(2 * u);
    dx.head(u) = Wm * o - x.head(u) - x.tail(u);
    dx.tail(u) = cfg.g_bar_a * o - cfg.alpha * x.tail(u);
    return dx;
  };

  const double dt = spec.dt;
  const long steps = std::lround(spec.t_end / dt);
  const std::size_t n_records = static_cast<std::size_t>(steps / spec.record_stride) + 1;
  traj.times.reserve(n_records);
  traj.states.reserve(n_records);

  Eigen::VectorXd x = x0.stacked();
  if (spec.record_start <= 0.0) {
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
  }
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = (k - 1) * dt;
    try {
      const Eigen::VectorXd k1 = field(x);
      const Eigen::VectorXd k2 = field(x + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = field(x + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = field(x + dt * k3);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const InvalidStateError&) {
      throw DivergenceError(fmt::format("state became non-finite after t = {:.6g}", t_prev), t_prev);
    }
    if (!x.allFinite()) {
      throw DivergenceError(fmt::format("state became non-finite after t = {:.6g}", t_prev), t_prev);
    }
    if (k % spec.record_stride == 0 && k * dt >= spec.record_start - 0.5 * dt) {
      traj.times.push_back(k * dt);
      traj.states.push_back(StateVector::from_stacked(x));
    }
  }
  return traj;
}

StateVector biased_initial_state(const WeightMatrix& W, const NetworkConfig& cfg,
                                 const Pattern& z, double eps) {
  z.validate(cfg.n, cfg.m);
  StateVector x = trivial_equilibrium(W, cfg);
  for (int i = 0; i < cfg.n; ++i) x.s(z.active_index(i, cfg.m)) += eps;
  return x;
}

SumPropertyReport sum_property_check(const std::vector<Eigen::VectorXd>& outputs,
                                     const NetworkConfig& cfg) {
  SumPropertyReport rep;
  if (!outputs.empty()) rep.worst_index = 0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    for (int i = 0; i < cfg.n; ++i) {
      const double dev = std::abs(outputs[k].segment(i * cfg.m, cfg.m).sum() - 1.0);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_index = static_cast<long>(k);
      }
    }
  }
  return rep;
}

SumPropertyReport sum_property_check(const Trajectory& traj, const NetworkConfig& cfg) {
  std::vector<Eigen::VectorXd> outputs;
  outputs.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) outputs.push_back(traj.output(k, cfg));
  return sum_property_check(outputs, cfg);
}

}  // namespace recall_dyn
