#include "recall_dyn/learning.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

void Pattern::validate(int n, int m) const {
  if (size() != n) {
    throw DimensionError(fmt::format("pattern has {} entries, expected n = {}", size(), n));
  }
  for (int i = 0; i < n; ++i) {
    if (values[i] < 1 || values[i] > m) {
      throw DimensionError(fmt::format("pattern entry {} is {}, must lie in [1, {}]", i + 1,
                                       values[i], m));
    }
  }
}

Eigen::MatrixXd single_pattern_weights(const Pattern& z, int n, int m, LearningRule rule) {
  z.validate(n, m);
  double one_active = 0.0;
  double none_active = 0.0;
  if (rule == LearningRule::standard) {
    if (m < 3) {
      throw UnsupportedRuleError(
          "the Hebbian rule divides by m - 2, which is zero for m = 2; use the "
          "two-minicolumn rule variant instead");
    }
    one_active = -1.0 / (m - 2);
  } else {
    if (m != 2) throw UnsupportedRuleError("the two-minicolumn rule requires m = 2");
    one_active = -1.0;
    none_active = 1.0;
  }

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      for (int j = 0; j < m; ++j) {
        for (int l = 0; l < m; ++l) {
          const bool a = (j + 1 == z.values[i]);
          const bool b = (l + 1 == z.values[k]);
          double w = none_active;
          if (a && b)
            w = 1.0;
          else if (a || b)
            w = one_active;
          W(i * m + j, k * m + l) = w;
        }
      }
    }
  }
  return W;
}

Eigen::MatrixXd accumulate_patterns(const LearningSpec& spec) {
  if (spec.patterns.empty()) throw ConfigError("at least one pattern is required");
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(spec.n * spec.m, spec.n * spec.m);
  for (const auto& z : spec.patterns) W += single_pattern_weights(z, spec.n, spec.m, spec.rule);
  return W;
}

double max_eigenvalue_w_lambda(const Eigen::MatrixXd& raw, const NetworkConfig& cfg) {
  const Eigen::MatrixXd WL = raw * lambda_matrix(cfg);
  const Eigen::MatrixXd sym = 0.5 * (WL + WL.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

WeightMatrix normalize_weights(const Eigen::MatrixXd& raw, double mu1, const NetworkConfig& cfg) {
  cfg.validate();
  if (!(mu1 > 0.0)) throw ConfigError(fmt::format("mu1 must be positive (got {})", mu1));
  const double top = max_eigenvalue_w_lambda(raw, cfg);
  if (!(top > 1e-10)) {
    throw DegenerateSpectrumError(fmt::format(
        "largest eigenvalue of W_raw * Lambda is {:.3g}; cannot normalize", top));
  }
  return {cfg.n, cfg.m, raw * (mu1 / (cfg.m * top))};
}

WeightMatrix learn_weights(const LearningSpec& spec, const NetworkConfig& cfg) {
  if (spec.n != cfg.n || spec.m != cfg.m) {
    throw DimensionError("learning spec and network config disagree on (n, m)");
  }
  WeightMatrix W = normalize_weights(accumulate_patterns(spec), spec.mu1, cfg);
  require_assumptions(W);
  return W;
}

std::vector<Pattern> parse_patterns(const std::string& text, int n, int m) {
  std::vector<Pattern> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string tok;
    Pattern z;
    while (tokens >> tok) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(fmt::format("line {}: '{}' is not an integer", lineno, tok), lineno);
      }
      z.values.push_back(v);
    }
    try {
      z.validate(n, m);
    } catch (const DimensionError& e) {
      throw ParseError(fmt::format("line {}: {}", lineno, e.what()), lineno);
    }
    out.push_back(std::move(z));
  }
  if (out.empty()) throw ParseError("pattern file contains no patterns", 0);
  return out;
}

std::vector<Pattern> read_pattern_file(const std::string& path, int n, int m) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open pattern file '{}'", path));
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_patterns(buf.str(), n, m);
}

}  // namespace recall_dyn
