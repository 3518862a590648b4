#pragma once

// Time evolution of the network: fixed-step RK4 trajectories, recall events,
// period estimates, equilibria and Lyapunov spectra.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/learning.hpp"
#include "recall_dyn/model.hpp"

namespace recall_dyn {

struct IntegratorSpec {
  double dt = 0.01;
  double t_end = 1.0;
  /// Keep every k-th step at or after record_start, so records stay
  /// uniformly spaced.
  int record_stride = 1;
  double record_start = 0.0;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  /// Softmax outputs at record k.
  Eigen::VectorXd output(std::size_t k, const NetworkConfig& cfg) const;
  /// Records with t >= t_from.
  Trajectory tail(double t_from) const;
};

/// Classical RK4 on the original model. Throws DivergenceError (carrying the
/// last finite time) as soon as a non-finite state appears.
Trajectory integrate(const StateVector& x0, const WeightMatrix& W, const NetworkConfig& cfg,
                     const IntegratorSpec& spec);

/// (s0 + eps * onehot(pattern), a0): the default pattern-biased start.
StateVector biased_initial_state(const WeightMatrix& W, const NetworkConfig& cfg,
                                 const Pattern& z, double eps = 0.5);

inline constexpr double kRecallThreshold = 0.9;

struct RecallEvent {
  int pattern = 0;  // zero-based index into the pattern list
  double t_start = 0.0;
  double t_end = 0.0;
};

struct RecallReport {
  double threshold = kRecallThreshold;
  /// Sorted by start time, then pattern.
  std::vector<RecallEvent> events;

  bool recalled(int pattern) const;
  int count(int pattern) const;
};

/// Maximal runs of consecutive records in which every designated output of a
/// pattern exceeds `threshold`.
RecallReport detect_recall(const Trajectory& traj, const std::vector<Pattern>& patterns,
                           const NetworkConfig& cfg, double threshold = kRecallThreshold);

/// Same test on a single output vector: indices of the patterns whose
/// designated outputs all exceed `threshold`.
std::vector<int> recalled_patterns(const Eigen::VectorXd& outputs,
                                   const std::vector<Pattern>& patterns, const NetworkConfig& cfg,
                                   double threshold = kRecallThreshold);

/// Mean return time of s[coordinate] through its trajectory mean in the
/// upward direction, with linear interpolation between records. Needs at
/// least 5 returns whose spread stays within 5% of the mean.
std::optional<double> estimate_period(const Trajectory& traj, int coordinate = 0);
/// Same on a bare sampled signal.
std::optional<double> estimate_period(const std::vector<double>& times,
                                      const std::vector<double>& values);

struct EquilibriumPoint {
  StateVector state;
  double residual = 0.0;
  /// Largest real part of the Jacobian spectrum.
  double max_real_part = 0.0;
  bool stable = false;
  bool trivial = false;
  /// Start that first reached this root: -1 trivial, 0..P-1 patterns, P+ random.
  int start = 0;
};

struct EquilibriumSearchOptions {
  int n_starts = 50;
  std::uint64_t seed = 1;
  double residual_tolerance = 1e-9;
  double dedupe_distance = 1e-6;
  int max_iterations = 200;
  int max_halvings = 30;
};

/// Damped Newton on (W - (g_bar_a/alpha) I) f(s) - s = 0 from the trivial
/// equilibrium, each pattern's one-hot output pushed through the equation,
/// and `n_starts` random output configurations. Roots are de-duplicated and
/// returned in order of the start that found them, trivial first.
std::vector<EquilibriumPoint> find_equilibria(const WeightMatrix& W, const NetworkConfig& cfg,
                                              const std::vector<Pattern>& patterns,
                                              const EquilibriumSearchOptions& options = {});
std::vector<EquilibriumPoint> find_equilibria(const WeightMatrix& W, const NetworkConfig& cfg,
                                              int n_starts, std::uint64_t seed,
                                              const std::vector<Pattern>& patterns = {});

/// Full 2mn residual of the equilibrium equations.
double equilibrium_residual(const StateVector& x, const WeightMatrix& W, const NetworkConfig& cfg);

struct LyapunovOptions {
  double dt = 0.01;
  double renorm_interval = 1.0;
  double t_total = 1000.0;
  /// Integration time discarded (state only) before the frame starts.
  double transient = 0.0;
  /// Time after `transient` during which the frame is evolved and
  /// re-orthonormalized without accumulating growth, so it aligns with the
  /// Lyapunov directions first.
  double frame_transient = 0.0;
  /// Record the running estimate every k-th renormalization.
  int history_stride = 1;

  void validate() const;
};

struct LyapunovSpectrum {
  /// Descending.
  Eigen::VectorXd exponents;
  /// Running estimates (sorted descending) at selected renormalization times.
  std::vector<double> history_times;
  std::vector<Eigen::VectorXd> history;
  double renorm_interval = 0.0;
};

/// Tangent-space (QR) method along the model's flow, using the analytic
/// Jacobian.
LyapunovSpectrum lyapunov_spectrum(const StateVector& x0, const WeightMatrix& W,
                                   const NetworkConfig& cfg, const LyapunovOptions& options);

/// The same engine applied to x' = A x; the exact answer is Re eig(A).
LyapunovSpectrum lyapunov_spectrum_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0,
                                          const LyapunovOptions& options);

/// Generic engine: `flow(x)` is the vector field and `tangent(x, V)` the
/// product of its Jacobian at x with the frame V.
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using TangentMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::MatrixXd&)>;
LyapunovSpectrum lyapunov_spectrum(const Eigen::VectorXd& x0, const VectorField& flow,
                                   const TangentMap& tangent, const LyapunovOptions& options);

struct SumPropertyReport {
  double max_deviation = 0.0;
  /// Record index of the worst deviation, -1 for an empty trajectory.
  long worst_index = -1;
};

/// Largest |sum_j o_ij - 1| over all hypercolumns and records.
SumPropertyReport sum_property_check(const Trajectory& traj, const NetworkConfig& cfg);
/// Same check on raw output vectors.
SumPropertyReport sum_property_check(const std::vector<Eigen::VectorXd>& outputs,
                                     const NetworkConfig& cfg);

}  // namespace recall_dyn
