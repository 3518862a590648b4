#pragma once

// Hebbian construction of the connection weights from stored patterns.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/model.hpp"

namespace recall_dyn {

/// One stored memory: for each hypercolumn, the one-based index of its
/// active minicolumn.
struct Pattern {
  std::vector<int> values;

  int size() const { return static_cast<int>(values.size()); }
  /// Throws DimensionError unless the pattern has length n with entries in [1, m].
  void validate(int n, int m) const;
  /// Zero-based flattened index of the active unit in hypercolumn i.
  int active_index(int i, int m) const { return i * m + values[i] - 1; }
};

enum class LearningRule {
  /// +1 co-active, -1/(m-2) when exactly one is active, 0 otherwise. Needs m >= 3.
  standard,
  /// Two-minicolumn variant: +1 when both are active or both inactive, -1
  /// when exactly one is active. Only valid for m = 2.
  two_minicolumn,
};

struct LearningSpec {
  std::vector<Pattern> patterns;
  double mu1 = 1.0;
  int n = 1;
  int m = 3;
  LearningRule rule = LearningRule::standard;
};

/// Raw single-pattern matrix; diagonal blocks are zero.
Eigen::MatrixXd single_pattern_weights(const Pattern& z, int n, int m,
                                       LearningRule rule = LearningRule::standard);

/// Sum of single_pattern_weights over all patterns in `spec`.
Eigen::MatrixXd accumulate_patterns(const LearningSpec& spec);

/// Largest eigenvalue of raw * Lambda (symmetric under the model assumptions).
double max_eigenvalue_w_lambda(const Eigen::MatrixXd& raw, const NetworkConfig& cfg);

/// W = mu1 * raw / (m * mu_max(raw Lambda)); the largest eigenvalue of
/// m W Lambda is then mu1. Throws DegenerateSpectrumError if mu_max <= 0.
WeightMatrix normalize_weights(const Eigen::MatrixXd& raw, double mu1, const NetworkConfig& cfg);

/// Full pipeline: accumulate, normalize, and validate the assumptions.
WeightMatrix learn_weights(const LearningSpec& spec, const NetworkConfig& cfg);

/// Read a pattern file: one pattern per line, whitespace-separated one-based
/// minicolumn indices. Blank lines and lines starting with '#' are skipped.
/// Throws ParseError carrying the offending line number.
std::vector<Pattern> parse_patterns(const std::string& text, int n, int m);
std::vector<Pattern> read_pattern_file(const std::string& path, int n, int m);

}  // namespace recall_dyn
