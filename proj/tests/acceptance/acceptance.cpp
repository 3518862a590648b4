// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/hopf.hpp"
#include "recall_dyn/softmax.hpp"
#include "recall_dyn/spectral.hpp"

using namespace recall_dyn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const double kAlpha = 1.0 / 54.0;

std::vector<Pattern> patterns() { return oracle::reference_patterns(); }

Outcome stable_state() {
  const NetworkConfig cfg = oracle::reference_config();
  const WeightMatrix W = oracle::reference_weights(2 * (1 + kAlpha) - 0.1);
  double worst = 0.0;
  int events = 0;
  for (const auto& z : patterns()) {
    const Trajectory tr = integrate(biased_initial_state(W, cfg, z), W, cfg, {0.01, 500.0, 10});
    worst = std::max(worst, (tr.output(tr.size() - 1, cfg).array() - 1.0 / 3.0).abs().maxCoeff());
    events += static_cast<int>(detect_recall(tr, patterns(), cfg).events.size());
  }
  return {worst < 1e-3 && events == 0,
          fmt::format("max |o - 1/3| at t=500: {:.2e}; recall events: {}", worst, events)};
}

Outcome periodic_recall() {
  const NetworkConfig cfg = oracle::reference_config();
  const WeightMatrix W = oracle::reference_weights(3 * (1 + kAlpha) + 40);
  const Trajectory tr =
      integrate(biased_initial_state(W, cfg, patterns()[0]), W, cfg, {0.01, 3000.0, 10, 1500.0});
  const auto period = estimate_period(tr);
  if (!period) return {false, "no stable period detected"};
  const RecallReport rec = detect_recall(tr, patterns(), cfg);
  // Every full period-length window must overlap an event of each pattern.
  int windows = 0, complete = 0;
  for (double a = tr.times.front(); a + *period <= tr.times.back(); a += *period) {
    ++windows;
    std::vector<bool> seen(3, false);
    for (const auto& e : rec.events) {
      if (e.t_end >= a && e.t_start < a + *period) seen[e.pattern] = true;
    }
    complete += seen[0] && seen[1] && seen[2];
  }
  const bool pass = std::abs(*period - 59.0) <= 2.0 && windows > 0 && complete == windows;
  return {pass, fmt::format("period {:.3f}; windows with all three patterns {}/{}; events {}/{}/{}", *period,
                            complete, windows, rec.count(0), rec.count(1), rec.count(2))};
}

Outcome multistability() {
  const NetworkConfig cfg = oracle::reference_config();
  const WeightMatrix W = oracle::reference_weights(3 * (1 + kAlpha) + 200);
  const auto pats = patterns();
  std::vector<Eigen::VectorXd> finals;
  bool each_recalls = true;
  for (int p = 0; p < 3; ++p) {
    // The slow adaptation (alpha = 1/54) needs about t = 1000 to settle to 1e-8.
    const Trajectory tr = integrate(biased_initial_state(W, cfg, pats[p]), W, cfg, {0.01, 1000.0, 100});
    const auto got = recalled_patterns(tr.output(tr.size() - 1, cfg), pats, cfg);
    each_recalls &= got == std::vector<int>{p};
    finals.push_back(tr.states.back().stacked());
  }
  double min_sep = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) min_sep = std::min(min_sep, (finals[a] - finals[b]).norm());
  }
  const auto eq = find_equilibria(W, cfg, 50, 1, pats);
  int stable_matched = 0;
  for (const auto& f : finals) {
    for (const auto& e : eq) {
      if (e.stable && (e.state.stacked() - f).norm() < 1e-6 * f.norm()) {
        ++stable_matched;
        break;
      }
    }
  }
  const bool pass = each_recalls && min_sep > 1e-2 && stable_matched == 3 && eq.size() >= 4;
  return {pass, fmt::format("each start recalls its pattern: {}; min separation {:.3f}; steady states "
                            "matched to stable roots {}/3; equilibria found {}",
                            each_recalls ? "yes" : "no", min_sep, stable_matched, eq.size())};
}

Outcome chaotic_recall() {
  const NetworkConfig cfg = oracle::reference_config(50.0);
  const WeightMatrix W = oracle::reference_weights(3 * (1 + kAlpha) + 40, 50.0);
  LyapunovOptions opt;
  opt.t_total = 5000;
  opt.transient = 500;
  opt.frame_transient = 1000;
  const auto spec = lyapunov_spectrum(biased_initial_state(W, cfg, patterns()[0]), W, cfg, opt);
  const double top = spec.exponents(0);
  const double near_zero = spec.exponents.cwiseAbs().minCoeff();

  bool all_windows = true;
  std::string counts;
  for (int p = 0; p < 3; ++p) {
    const Trajectory tr =
        integrate(biased_initial_state(W, cfg, patterns()[p]), W, cfg, {0.01, 4970.0, 1, 4950.0});
    const RecallReport rec = detect_recall(tr, patterns(), cfg);
    all_windows &= rec.recalled(0) && rec.recalled(1) && rec.recalled(2);
    counts += fmt::format("{}({},{},{})", p ? " " : "", rec.count(0), rec.count(1), rec.count(2));
  }
  const bool pass = top >= 0.13 && top <= 0.20 && near_zero < 5e-3 && all_windows;
  return {pass, fmt::format("largest exponent {:.4f}; smallest |exponent| {:.2e}; recall counts in "
                            "[4950, 4970] per start {}",
                            top, near_zero, counts)};
}

Outcome spectral_oracle() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int m = 2 + k % 4, n = 2 + (k / 4) % 5;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const NetworkConfig cfg{n, m, 0.01 + 0.9 * U(rng), 0.1 + 10.0 * U(rng)};
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng, 0.5 + 2.0 * U(rng)));
    const Eigen::VectorXcd closed = lemma2_basis(W, cfg).nu;
    const Eigen::VectorXcd dense =
        oracle::dense_eigenvalues(oracle::dense_h(W.entries(), n, m, cfg.alpha, cfg.g_bar_a));
    worst = std::max(worst, oracle::matched_max_error(closed, dense));
  }
  return {worst < 1e-8, fmt::format("50 networks, worst matched eigenvalue error {:.2e}", worst)};
}

Outcome energy_inequality() {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.001, 30.0);
  double worst = std::numeric_limits<double>::infinity(), min_norm = worst;
  for (int k = 0; k < 1000; ++k) {
    const NetworkConfig cfg{1 + k % 6, 2 + k % 5, 0.5, 1.0};
    Eigen::VectorXd s(cfg.units());
    const double c = scale(rng);
    for (auto& x : s) x = c * N(rng);
    const Eigen::VectorXd fb = oracle::naive_softmax(s, cfg.n, cfg.m).array() - 1.0 / cfg.m;
    if ((shifted_nonlinearity(s, cfg) - fb).cwiseAbs().maxCoeff() > 1e-12) {
      return {false, "library nonlinearity disagrees with the naive softmax"};
    }
    worst = std::min(worst, s.dot(fb) - 2.0 * fb.squaredNorm());
    min_norm = std::min(min_norm, fb.squaredNorm());
  }
  return {worst >= -1e-12 && min_norm >= 0.0,
          fmt::format("1000 states, min of s.f - 2 f.f = {:.3e}, min f.f = {:.3e}", worst, min_norm)};
}

Outcome hopf_oracle() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  int m2 = 0, m2_ok = 0;
  for (int k = 0; k < 20; ++k) {
    const int m = 2 + k % 4, n = 2 + (k / 4) % 5;
    const auto hc = oracle::random_hopf_case(n, m, rng);
    const HopfReport r = hopf_report(hc.W, hc.cfg);
    worst = std::max(worst, std::abs(r.numeric_total - r.total) / std::max(1.0, std::abs(r.total)));
    if (m == 2) {
      ++m2;
      m2_ok += r.total < 0.0 && r.numeric_total < 0.0 && std::abs(r.I2) < 1e-12 && std::abs(r.I3) < 1e-12;
    }
  }
  return {worst < 1e-6 && m2_ok == m2,
          fmt::format("20 networks, worst relative disagreement {:.2e}; m=2 instances negative with "
                      "I2=I3=0: {}/{}",
                      worst, m2_ok, m2)};
}

Outcome global_stability() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0.0;
  int extra_roots = 0, nets = 0;
  while (nets < 10) {
    const int n = 2 + nets % 3, m = 2 + nets % 3;
    const double alpha = 0.2 + 0.3 * U(rng);
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng, 0.6, 0.6));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W.entries());
    const double wmax = es.eigenvalues().maxCoeff();
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    const double sigma = 2 * (1 + alpha) - wmax;
    if (sigma <= 0.2) continue;
    const double bound = 2 * alpha * alpha * (1 + alpha) * norm * norm / (sigma * sigma);
    const NetworkConfig cfg{n, m, alpha, std::max(bound * (1.2 + U(rng)), 0.05 + U(rng))};
    ++nets;
    const Eigen::VectorXd x0 = trivial_equilibrium(W, cfg).stacked();
    for (int r = 0; r < 10; ++r) {
      Eigen::VectorXd x(cfg.state_dim());
      for (auto& v : x) v = 3.0 * N(rng);
      const Trajectory tr = integrate(StateVector::from_stacked(x), W, cfg, {0.02, 2000.0, 100000});
      worst = std::max(worst, (tr.states.back().stacked() - x0).cwiseAbs().maxCoeff());
    }
    for (const auto& e : find_equilibria(W, cfg, 30, 5)) extra_roots += !e.trivial;
  }
  return {worst < 1e-6 && extra_roots == 0,
          fmt::format("10 networks x 10 starts, max distance to trivial equilibrium at t=2000: {:.2e}; "
                      "non-trivial roots found: {}",
                      worst, extra_roots)};
}

Outcome unique_equilibrium() {
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int exact = 0;
  std::string sizes;
  for (int k = 0; k < 10; ++k) {
    const int n = 2 + k % 4, m = 2 + k % 3;
    const double alpha = 0.05 + 0.5 * U(rng);
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng, 1.0 + 3.0 * U(rng), 2.0));
    const double wmax = mu_max(W);
    const NetworkConfig cfg{n, m, alpha, std::max(0.0, alpha * (wmax - 2.0)) + 0.05 + 2.0 * U(rng)};
    const auto eq = find_equilibria(W, cfg, 40, 7);
    exact += eq.size() == 1 && eq[0].trivial;
    sizes += fmt::format("{}{}", k ? "," : "", eq.size());
  }
  return {exact == 10, fmt::format("networks with exactly one root: {}/10 (roots per network: {})", exact, sizes)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(127);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 4, m = 2 + k % 5;
    const NetworkConfig cfg{n, m, 0.1 + 0.008 * k, 0.2 + 0.1 * k};
    const WeightMatrix W(n, m, oracle::random_structured(n, m, rng, 2.0));
    Eigen::VectorXd xb(cfg.state_dim());
    for (auto& v : xb) v = 2.0 * N(rng);
    const Eigen::MatrixXd J = jacobian_shifted(StateVector::from_stacked(xb), W, cfg);
    const Eigen::VectorXd x = xb + trivial_equilibrium(W, cfg).stacked();
    const Eigen::MatrixXd Jfd = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& y) { return oracle::scalar_rhs(y, W.entries(), n, m, cfg.alpha, cfg.g_bar_a); },
        x);
    worst = std::max(worst, (J - Jfd).norm() / std::max(1.0, Jfd.norm()));
  }
  return {worst < 1e-5, fmt::format("100 states, worst relative Jacobian error {:.2e}", worst)};
}

Outcome linear_lyapunov() {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(6, 6);
  D.block(0, 0, 2, 2) << -0.3, 1.5, -1.5, -0.3;
  D(2, 2) = 0.15;
  D(3, 3) = -1.0;
  D(4, 4) = 0.0;
  D(5, 5) = -2.0;
  std::mt19937_64 rng(131);
  std::normal_distribution<double> N(0.0, 0.3);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) S(i, j) += N(rng);
  }
  const Eigen::MatrixXd A = S * D * S.inverse();
  Eigen::VectorXd expect = oracle::dense_eigenvalues(A).real();
  std::sort(expect.data(), expect.data() + 6, std::greater<>());
  LyapunovOptions opt;
  opt.t_total = 2000;
  opt.frame_transient = 100;
  const auto spec = lyapunov_spectrum_linear(A, Eigen::VectorXd::Zero(6), opt);
  const double err = (spec.exponents - expect).cwiseAbs().maxCoeff();
  return {err < 1e-3, fmt::format("6x6 system, max |exponent - Re eig| = {:.2e}", err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

Outcome determinism(const std::string& cli, const std::string& config_dir, const std::string& scratch) {
  struct Job {
    std::string command, config;
  };
  const std::vector<Job> jobs{{"simulate", "stable"},       {"analyze", "stable"},
                              {"simulate", "oscillation"},  {"hopf", "oscillation"},
                              {"simulate", "multistable"},  {"equilibria", "multistable"},
                              {"lyapunov", "chaos"},        {"simulate", "chaos_window"},
                              {"sweep", "sweep"}};
  int identical = 0;
  std::string failures;
  for (const auto& job : jobs) {
    std::vector<fs::path> dirs;
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = fs::path(scratch) / fmt::format("{}_{}_{}", job.config, job.command, rep);
      fs::remove_all(dir);
      const std::string cmd = fmt::format("\"{}\" {} --config \"{}/{}.cfg\" --out \"{}\" > /dev/null 2>&1", cli,
                                          job.command, config_dir, job.config, dir.string());
      ran &= std::system(cmd.c_str()) == 0;
      dirs.push_back(dir);
    }
    bool same = ran;
    int files = 0;
    if (ran) {
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const fs::path other = dirs[1] / entry.path().filename();
        same &= fs::exists(other) && slurp(entry.path()) == slurp(other);
      }
      same &= files > 0;
    }
    identical += same;
    if (!same) failures += fmt::format(" {}:{}{}", job.command, job.config, ran ? "" : "(failed to run)");
  }
  return {identical == static_cast<int>(jobs.size()),
          fmt::format("{}/{} command/config pairs byte-identical across two runs{}{}", identical, jobs.size(),
                      failures.empty() ? "" : "; differing:", failures)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::cerr << "usage: acceptance <recall-dyn binary> <config dir> <scratch dir> [criterion]\n";
    return 2;
  }
  const std::string cli = argv[1], config_dir = argv[2], scratch = argv[3];
  const int only = argc > 4 ? std::atoi(argv[4]) : 0;
  fs::create_directories(scratch);

  struct Criterion {
    std::string name;
    double budget_s;  // 0 when no runtime bound applies
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"convergence to the synchronized state", 10, stable_state},
      {"periodic recall on the limit cycle", 30, periodic_recall},
      {"stored patterns as stable equilibria", 30, multistability},
      {"chaotic recall", 300, chaotic_recall},
      {"closed-form spectrum vs dense eigensolver", 0, spectral_oracle},
      {"energy inequality of the nonlinearity", 0, energy_inequality},
      {"hopf coefficient: closed form vs center manifold", 0, hopf_oracle},
      {"global stability regime", 0, global_stability},
      {"unique equilibrium regime", 0, unique_equilibrium},
      {"analytic Jacobian vs finite differences", 0, gradient_check},
      {"linear-system Lyapunov spectrum", 0, linear_lyapunov},
      {"determinism of the shipped configs", 0, [&] { return determinism(cli, config_dir, scratch); }},
  };

  int failed = 0;
  int ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only > 0 && static_cast<int>(k) + 1 != only) continue;
    ++ran;
    const auto& c = criteria[k];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt::format("; over the {:.0f} s budget", c.budget_s);
    }
    failed += !o.pass;
    std::cout << fmt::format("{} {:2d} {}: {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", k + 1, c.name, o.detail, secs)
              << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  std::cout << fmt::format("{}/{} criteria passed", ran - failed, ran) << std::endl;
  return failed == 0 ? 0 : 1;
}
