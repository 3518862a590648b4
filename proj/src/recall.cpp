#include <algorithm>
#include <cmath>
#include <numeric>

#include "recall_dyn/dynamics.hpp"

namespace recall_dyn {

bool RecallReport::recalled(int pattern) const { return count(pattern) > 0; }

int RecallReport::count(int pattern) const {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [&](const RecallEvent& e) { return e.pattern == pattern; }));
}

std::vector<int> recalled_patterns(const Eigen::VectorXd& outputs,
                                   const std::vector<Pattern>& patterns, const NetworkConfig& cfg,
                                   double threshold) {
  std::vector<int> out;
  for (int p = 0; p < static_cast<int>(patterns.size()); ++p) {
    bool all = true;
    for (int i = 0; i < cfg.n && all; ++i) all = outputs(patterns[p].active_index(i, cfg.m)) > threshold;
    if (all) out.push_back(p);
  }
  return out;
}

RecallReport detect_recall(const Trajectory& traj, const std::vector<Pattern>& patterns,
                           const NetworkConfig& cfg, double threshold) {
  for (const auto& z : patterns) z.validate(cfg.n, cfg.m);
  RecallReport rep;
  rep.threshold = threshold;
  const int P = static_cast<int>(patterns.size());
  std::vector<long> open(P, -1);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd o = traj.output(k, cfg);
    std::vector<bool> active(P, false);
    for (int p : recalled_patterns(o, patterns, cfg, threshold)) active[p] = true;
    for (int p = 0; p < P; ++p) {
      if (active[p] && open[p] < 0) open[p] = static_cast<long>(k);
      if (!active[p] && open[p] >= 0) {
        rep.events.push_back({p, traj.times[open[p]], traj.times[k - 1]});
        open[p] = -1;
      }
    }
  }
  for (int p = 0; p < P; ++p) {
    if (open[p] >= 0) rep.events.push_back({p, traj.times[open[p]], traj.times.back()});
  }
  std::stable_sort(rep.events.begin(), rep.events.end(), [](const RecallEvent& a, const RecallEvent& b) {
    return a.t_start < b.t_start || (a.t_start == b.t_start && a.pattern < b.pattern);
  });
  return rep;
}

std::optional<double> estimate_period(const std::vector<double>& times,
                                      const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 3) return std::nullopt;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  std::vector<double> crossings;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double a = values[k - 1] - mean;
    const double b = values[k] - mean;
    if (a < 0.0 && b >= 0.0) {
      crossings.push_back(times[k - 1] + (times[k] - times[k - 1]) * (-a) / (b - a));
    }
  }
  if (crossings.size() < 6) return std::nullopt;
  std::vector<double> returns;
  for (std::size_t k = 1; k < crossings.size(); ++k) returns.push_back(crossings[k] - crossings[k - 1]);
  const double avg = std::accumulate(returns.begin(), returns.end(), 0.0) / returns.size();
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*hi - *lo > 0.05 * avg) return std::nullopt;
  return avg;
}

std::optional<double> estimate_period(const Trajectory& traj, int coordinate) {
  std::vector<double> values;
  values.reserve(traj.size());
  for (const auto& x : traj.states) values.push_back(x.s(coordinate));
  return estimate_period(traj.times, values);
}

}  // namespace recall_dyn
