#include <cmath>
#include <random>

#include <fmt/format.h>

#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

namespace {

struct NewtonResult {
  Eigen::VectorXd s;
  double residual = 0.0;
  bool converged = false;
};

NewtonResult damped_newton(Eigen::VectorXd s, const Eigen::MatrixXd& K, const NetworkConfig& cfg,
                           const EquilibriumSearchOptions& opt) {
  const int u = cfg.units();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(u, u);
  auto G = [&](const Eigen::VectorXd& x) { return (K * softmax_output(x, cfg) - x).eval(); };

  NewtonResult res;
  Eigen::VectorXd g = G(s);
  double norm = g.norm();
  for (int it = 0; it < opt.max_iterations; ++it) {
    // Aim well below the acceptance tolerance so roots found from different
    // starts agree far inside the de-duplication radius.
    if (g.lpNorm<Eigen::Infinity>() < 1e-3 * opt.residual_tolerance) break;
    const Eigen::MatrixXd J = K * softmax_jacobian(softmax_output(s, cfg), cfg) - I;
    const Eigen::VectorXd step = J.partialPivLu().solve(-g);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = s + t * step;
      const Eigen::VectorXd gt = G(trial);
      if (gt.allFinite() && gt.norm() < (1.0 - 1e-4 * t) * norm) {
        s = trial;
        g = gt;
        norm = gt.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  res.s = s;
  res.residual = g.lpNorm<Eigen::Infinity>();
  res.converged = res.residual < opt.residual_tolerance;
  return res;
}

}  // namespace

double equilibrium_residual(const StateVector& x, const WeightMatrix& W, const NetworkConfig& cfg) {
  const StateVector dx = rhs_original(x, W, cfg);
  return std::max(dx.s.lpNorm<Eigen::Infinity>(), dx.a.lpNorm<Eigen::Infinity>());
}

std::vector<EquilibriumPoint> find_equilibria(const WeightMatrix& W, const NetworkConfig& cfg,
                                              const std::vector<Pattern>& patterns,
                                              const EquilibriumSearchOptions& opt) {
  cfg.validate();
  W.check_dims(cfg);
  if (opt.n_starts < 0) throw ConfigError("n_starts must be non-negative");
  for (const auto& z : patterns) z.validate(cfg.n, cfg.m);

  const int u = cfg.units();
  const double q = cfg.adaptation_gain();
  const Eigen::MatrixXd K = W.entries() - q * Eigen::MatrixXd::Identity(u, u);
  const StateVector trivial = trivial_equilibrium(W, cfg);

  // Starting points, in order: trivial, one per pattern, random.
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(trivial.s);
  for (const auto& z : patterns) {
    Eigen::VectorXd o = Eigen::VectorXd::Zero(u);
    for (int i = 0; i < cfg.n; ++i) o(z.active_index(i, cfg.m)) = 1.0;
    starts.push_back(K * o);
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> sharpness(0.5, 6.0);
  for (int k = 0; k < opt.n_starts; ++k) {
    const double beta = sharpness(rng);
    Eigen::VectorXd z(u);
    for (int j = 0; j < u; ++j) z(j) = beta * normal(rng);
    starts.push_back(K * softmax_output(z, cfg));
  }

  std::vector<EquilibriumPoint> roots;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const NewtonResult r = damped_newton(starts[k], K, cfg, opt);
    if (!r.converged) continue;
    EquilibriumPoint p;
    p.state = StateVector(r.s, q * softmax_output(r.s, cfg));
    bool duplicate = false;
    for (const auto& e : roots) {
      if ((e.state.stacked() - p.state.stacked()).norm() < opt.dedupe_distance) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    p.residual = equilibrium_residual(p.state, W, cfg);
    if (!(p.residual < opt.residual_tolerance)) continue;
    p.start = static_cast<int>(k) - 1;
    p.trivial = (p.state.stacked() - trivial.stacked()).norm() < opt.dedupe_distance;
    const StateVector shifted(p.state.s - trivial.s, p.state.a - trivial.a);
    const Eigen::MatrixXd J = jacobian_shifted(shifted, W, cfg);
    p.max_real_part = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues().real().maxCoeff();
    p.stable = p.max_real_part < 0.0;
    roots.push_back(std::move(p));
  }
  return roots;
}

std::vector<EquilibriumPoint> find_equilibria(const WeightMatrix& W, const NetworkConfig& cfg,
                                              int n_starts, std::uint64_t seed,
                                              const std::vector<Pattern>& patterns) {
  EquilibriumSearchOptions opt;
  opt.n_starts = n_starts;
  opt.seed = seed;
  return find_equilibria(W, cfg, patterns, opt);
}

}  // namespace recall_dyn
