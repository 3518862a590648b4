#pragma once

// INI-style run configuration shared by every CLI command.
//
//   [network]    n, m, alpha, g_bar_a, weights | patterns, mu1 | mu1_scale + mu1_offset, rule
//   [run]        seed, output_dir
//   [simulate]   dt, t_end, record_stride, record_start, initial, initial_patterns, eps, noise,
//                with_outputs, threshold, burn_in, window_start, window_end
//   [equilibria] n_starts
//   [lyapunov]   dt, renorm_interval, t_total, transient, frame_transient,
//                history_stride, initial_pattern, eps, linear_matrix
//   [sweep]      mu1_from, mu1_to, steps, dt, t_end, initial_pattern, eps
//   [hopf]       q1_rotation, agreement_tolerance
//
// Real values accept fractions such as "97/54". Relative paths resolve
// against the directory of the config file.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/hopf.hpp"
#include "recall_dyn/learning.hpp"
#include "recall_dyn/model.hpp"

namespace recall_dyn {

/// Parses "x" or "a/b". Throws ConfigError.
double parse_real(const std::string& text);

struct SimulateSection {
  IntegratorSpec integrator{0.01, 500.0, 10};
  /// "pattern", "trivial" or "random".
  std::string initial = "pattern";
  /// One-based pattern indices; one run per entry.
  std::vector<int> initial_patterns{1};
  double eps = 0.5;
  /// Gaussian perturbation of s (seeded).
  double noise = 0.0;
  bool with_outputs = true;
  double threshold = kRecallThreshold;
  /// Fraction of t_end discarded before period statistics.
  double burn_in = 0.5;
  std::optional<double> window_start;
  std::optional<double> window_end;
};

struct LyapunovSection {
  LyapunovOptions options;
  int initial_pattern = 1;
  double eps = 0.5;
  /// Square matrix file (one row per line, comma separated) for the linear test mode.
  std::optional<std::string> linear_matrix;
};

struct SweepSection {
  double mu1_from = 0.0;
  double mu1_to = 0.0;
  int steps = 0;
  IntegratorSpec integrator{0.01, 1000.0, 10};
  int initial_pattern = 1;
  double eps = 0.5;
};

struct RunConfig {
  std::string base_dir = ".";
  NetworkConfig network;
  std::optional<std::string> weights_path;
  std::optional<std::string> patterns_path;
  std::optional<double> mu1;
  LearningRule rule = LearningRule::standard;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  SimulateSection simulate;
  int equilibria_starts = 50;
  LyapunovSection lyapunov;
  std::optional<SweepSection> sweep;
  HopfOptions hopf;
};

/// Throws ConfigError (unknown keys included) or ParseError for bad syntax.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Weights named by the config: read from file (and rescaled when mu1 is also
/// given) or learned from the pattern file.
WeightMatrix resolve_weights(const RunConfig& cfg);
/// Patterns named by the config; empty when none is configured.
std::vector<Pattern> resolve_patterns(const RunConfig& cfg);

/// Square matrix from a comma-separated text file.
Eigen::MatrixXd read_matrix_file(const std::string& path);

}  // namespace recall_dyn
