#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include "recall_dyn/config.hpp"
#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/hopf.hpp"
#include "recall_dyn/io.hpp"
#include "recall_dyn/learning.hpp"
#include "recall_dyn/softmax.hpp"
#include "recall_dyn/spectral.hpp"

namespace recall_dyn::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  RunConfig rc;
  fs::path out_dir;
  int jobs = 1;
  std::ostream& out;

  std::string path(const std::string& name) const { return (out_dir / name).string(); }
};

std::string join_patterns(const std::vector<int>& idx) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ";" : "") + std::to_string(idx[k] + 1);
  return s;
}

void key_value(CsvWriter& csv, const std::string& key, const std::string& value) {
  csv.cell(key).cell(value);
  csv.end_row();
}

void key_value(CsvWriter& csv, const std::string& key, double value) {
  key_value(csv, key, format_number(value));
}

int cmd_learn(Context& ctx) {
  const auto& rc = ctx.rc;
  if (!rc.patterns_path) throw ConfigError("learn needs [network] patterns");
  if (!rc.mu1) throw ConfigError("learn needs [network] mu1");
  LearningSpec spec{resolve_patterns(rc), *rc.mu1, rc.network.n, rc.network.m, rc.rule};
  const WeightMatrix W = normalize_weights(accumulate_patterns(spec), spec.mu1, rc.network);
  const AssumptionReport rep = validate_assumptions(W);

  write_weights_file(ctx.path("weights.csv"), W);
  auto f = open_output(ctx.path("assumptions.csv"));
  CsvWriter csv(f, {"assumption", "pass", "violation"});
  csv.cell("symmetric").cell(rep.symmetric ? "true" : "false").cell(rep.symmetry_violation);
  csv.end_row();
  csv.cell("constant_block_row_sums").cell(rep.constant_block_rows ? "true" : "false").cell(rep.row_sum_violation);
  csv.end_row();
  csv.cell("symmetric_row_sums").cell(rep.symmetric_row_sums ? "true" : "false").cell(rep.row_sum_symmetry_violation);
  csv.end_row();

  fmt::print(ctx.out, "patterns: {}\nmu1: {}\n", spec.patterns.size(), format_number(spec.mu1));
  fmt::print(ctx.out, "symmetric: {} (max violation {:.3g})\n", rep.symmetric ? "pass" : "FAIL",
             rep.symmetry_violation);
  fmt::print(ctx.out, "constant block row sums: {} (max violation {:.3g})\n",
             rep.constant_block_rows ? "pass" : "FAIL", rep.row_sum_violation);
  fmt::print(ctx.out, "symmetric row sums: {} (max violation {:.3g})\n",
             rep.symmetric_row_sums ? "pass" : "FAIL", rep.row_sum_symmetry_violation);
  fmt::print(ctx.out, "weights written to {}\n", ctx.path("weights.csv"));
  if (!rep.all_pass()) throw StructureError("learned weights violate the structural assumptions");
  return 0;
}

int cmd_analyze(Context& ctx) {
  const auto& net = ctx.rc.network;
  const WeightMatrix W = resolve_weights(ctx.rc);
  const SpectralReport spec = lemma2_basis(W, net);
  const RegimeClassification cls = classify_regime(W, net);

  {
    auto f = open_output(ctx.path("spectrum.csv"));
    CsvWriter csv(f, {"mode", "mu", "nu_plus_re", "nu_plus_im", "nu_minus_re", "nu_minus_im"});
    for (int i = 0; i < net.units(); ++i) {
      csv.cell(i + 1).cell(spec.mu(i));
      csv.cell(spec.nu(2 * i).real()).cell(spec.nu(2 * i).imag());
      csv.cell(spec.nu(2 * i + 1).real()).cell(spec.nu(2 * i + 1).imag());
      csv.end_row();
    }
  }
  {
    auto f = open_output(ctx.path("regime.csv"));
    CsvWriter csv(f, {"condition", "pass", "margin"});
    for (const auto& c : cls.conditions) {
      csv.cell(c.name).cell(c.pass ? "true" : "false").cell(c.margin);
      csv.end_row();
    }
  }
  {
    auto f = open_output(ctx.path("analysis.csv"));
    CsvWriter csv(f, {"key", "value"});
    key_value(csv, "regime", to_string(cls.regime));
    std::string all;
    for (const auto r : cls.satisfied) all += (all.empty() ? "" : ";") + to_string(r);
    key_value(csv, "satisfied", all.empty() ? "none" : all);
    key_value(csv, "mu1", spec.mu1());
    key_value(csv, "critical_mu1", net.critical_mu1());
    key_value(csv, "mu1_simple", spec.mu1_simple ? "true" : "false");
    key_value(csv, "max_re_nu", spec.max_real_part);
    key_value(csv, "unique_equilibrium", cls.unique_equilibrium ? "true" : "false");
  }

  fmt::print(ctx.out, "mu (m W Lambda, centered modes):");
  for (int i = 0; i < spec.leading; ++i) fmt::print(ctx.out, " {:.6g}", spec.mu(i));
  fmt::print(ctx.out, "\nlambda (row-sum modes):");
  for (int i = spec.leading; i < net.units(); ++i) fmt::print(ctx.out, " {:.6g}", spec.mu(i));
  fmt::print(ctx.out, "\nnu:\n");
  for (int i = 0; i < net.units(); ++i) {
    fmt::print(ctx.out, "  mode {:3d}: {:.6g}{:+.6g}i, {:.6g}{:+.6g}i\n", i + 1, spec.nu(2 * i).real(),
               spec.nu(2 * i).imag(), spec.nu(2 * i + 1).real(), spec.nu(2 * i + 1).imag());
  }
  fmt::print(ctx.out, "max Re(nu): {:.6g}\n", spec.max_real_part);
  fmt::print(ctx.out, "conditions:\n");
  for (const auto& c : cls.conditions) {
    fmt::print(ctx.out, "  {:<34} {}  margin {:.6g}\n", c.name, c.pass ? "pass" : "fail", c.margin);
  }
  fmt::print(ctx.out, "regime: {}\n", to_string(cls.regime));
  for (std::size_t k = 1; k < cls.satisfied.size(); ++k) {
    fmt::print(ctx.out, "  also satisfies: {}\n", to_string(cls.satisfied[k]));
  }
  if (cls.regime != Regime::hopf_limit_cycle && spec.mu1() > net.critical_mu1()) {
    fmt::print(ctx.out, "note: mu1 exceeds m(1+alpha); run 'hopf' for the limit-cycle coefficient\n");
  }
  return 0;
}

int cmd_hopf(Context& ctx) {
  const auto& net = ctx.rc.network;
  const WeightMatrix W = resolve_weights(ctx.rc);
  const HopfReport rep = hopf_report(W, net, ctx.rc.hopf);
  const Theorem3Verdict verdict = theorem3_verdict(W, net, ctx.rc.hopf);

  auto f = open_output(ctx.path("hopf.csv"));
  CsvWriter csv(f, {"key", "value"});
  key_value(csv, "lambda0_abs", rep.lambda0_abs);
  key_value(csv, "I1", rep.I1);
  key_value(csv, "I2", rep.I2);
  key_value(csv, "I3", rep.I3);
  key_value(csv, "total", rep.total);
  key_value(csv, "numeric_total", rep.numeric_total);
  key_value(csv, "agreement", rep.agreement);
  key_value(csv, "verdict", to_string(rep.verdict));
  key_value(csv, "case", rep.case_used);
  key_value(csv, "limit_cycle_certified", verdict.certified ? "true" : "false");

  fmt::print(ctx.out, "|lambda(0)|     {}\n", format_number(rep.lambda0_abs));
  fmt::print(ctx.out, "I1              {}\n", format_number(rep.I1));
  fmt::print(ctx.out, "I2              {}\n", format_number(rep.I2));
  fmt::print(ctx.out, "I3              {}\n", format_number(rep.I3));
  fmt::print(ctx.out, "total           {}\n", format_number(rep.total));
  fmt::print(ctx.out, "numeric_total   {}\n", format_number(rep.numeric_total));
  fmt::print(ctx.out, "agreement       {:.3g}\n", rep.agreement);
  fmt::print(ctx.out, "verdict         {}\n", to_string(rep.verdict));
  fmt::print(ctx.out, "case            {}\n", rep.case_used);
  fmt::print(ctx.out, "limit cycle     {}\n", verdict.certified ? "certified" : "not certified");
  for (const auto& r : verdict.reasons) fmt::print(ctx.out, "  - {}\n", r);
  return 0;
}

StateVector initial_state(const RunConfig& rc, const WeightMatrix& W,
                          const std::vector<Pattern>& patterns, int pattern_index, double eps,
                          const std::string& kind, double noise, std::uint64_t seed) {
  StateVector x = trivial_equilibrium(W, rc.network);
  if (kind == "pattern") {
    if (pattern_index < 1 || pattern_index > static_cast<int>(patterns.size())) {
      throw ConfigError(fmt::format("initial pattern {} not in the pattern file ({} patterns)",
                                    pattern_index, patterns.size()));
    }
    x = biased_initial_state(W, rc.network, patterns[pattern_index - 1], eps);
  }
  if (kind == "random" || noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = kind == "random" && noise == 0.0 ? 1.0 : noise;
    for (int j = 0; j < x.s.size(); ++j) x.s(j) += scale * normal(rng);
  }
  return x;
}

int cmd_simulate(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& sim = rc.simulate;
  const auto& net = rc.network;
  const WeightMatrix W = resolve_weights(rc);
  const std::vector<Pattern> patterns = resolve_patterns(rc);

  std::vector<int> runs = sim.initial == "pattern" ? sim.initial_patterns : std::vector<int>{0};
  auto recall_file = open_output(ctx.path("recall.csv"));
  CsvWriter recall_csv(recall_file, {"run", "pattern", "t_start", "t_end"});
  auto summary_file = open_output(ctx.path("summary.csv"));
  std::vector<std::string> header{"run", "initial", "period", "final_recalled", "max_sum_deviation"};
  for (const auto& l : unit_labels("o_final", net)) header.push_back(l);
  CsvWriter summary(summary_file, header);

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::string label = sim.initial == "pattern" ? fmt::format("pattern {}", runs[r]) : sim.initial;
    const StateVector x0 = initial_state(rc, W, patterns, runs[r], sim.eps, sim.initial, sim.noise, rc.seed + r);
    spdlog::info("simulate run {} ({}), t_end = {}", r + 1, label, sim.integrator.t_end);
    const Trajectory traj = integrate(x0, W, net, sim.integrator);
    for (const auto& w : traj.warnings) spdlog::warn("{}", w);

    const std::string traj_name = runs.size() == 1 ? "trajectory.csv" : fmt::format("trajectory_{}.csv", r + 1);
    {
      auto f = open_output(ctx.path(traj_name));
      write_trajectory_csv(f, traj, net, sim.with_outputs);
    }

    Trajectory window = traj;
    if (sim.window_start || sim.window_end) {
      window = traj.tail(sim.window_start.value_or(0.0));
      const double end = sim.window_end.value_or(traj.times.back());
      while (!window.times.empty() && window.times.back() > end) {
        window.times.pop_back();
        window.states.pop_back();
      }
    }
    RecallReport recall;
    if (!patterns.empty()) recall = detect_recall(window, patterns, net, sim.threshold);
    for (const auto& e : recall.events) {
      recall_csv.cell(static_cast<int>(r + 1)).cell(e.pattern + 1).cell(e.t_start).cell(e.t_end);
      recall_csv.end_row();
    }

    const auto period = estimate_period(traj.tail(sim.burn_in * sim.integrator.t_end));
    const Eigen::VectorXd o_final = traj.output(traj.size() - 1, net);
    const std::vector<int> final_recalled =
        patterns.empty() ? std::vector<int>{} : recalled_patterns(o_final, patterns, net, sim.threshold);
    const SumPropertyReport sums = sum_property_check(traj, net);

    summary.cell(static_cast<int>(r + 1)).cell(label);
    summary.cell(period ? format_number(*period) : std::string("none"));
    summary.cell(final_recalled.empty() ? std::string("none") : join_patterns(final_recalled));
    summary.cell(sums.max_deviation);
    for (int j = 0; j < o_final.size(); ++j) summary.cell(o_final(j));
    summary.end_row();

    fmt::print(ctx.out, "run {} ({}): {} records to t = {}\n", r + 1, label, traj.size(),
               format_number(traj.times.back()));
    fmt::print(ctx.out, "  period: {}\n", period ? fmt::format("{:.4f}", *period) : "none");
    fmt::print(ctx.out, "  recall events:");
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      fmt::print(ctx.out, " pattern {} x{}", p + 1, recall.count(static_cast<int>(p)));
    }
    fmt::print(ctx.out, "\n  recalled at end: {}\n",
               final_recalled.empty() ? std::string("none") : join_patterns(final_recalled));
    fmt::print(ctx.out, "  final outputs: min {:.6g}, max {:.6g}\n", o_final.minCoeff(), o_final.maxCoeff());
  }
  return 0;
}

int cmd_equilibria(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& net = rc.network;
  const WeightMatrix W = resolve_weights(rc);
  const std::vector<Pattern> patterns = resolve_patterns(rc);
  const auto roots = find_equilibria(W, net, rc.equilibria_starts, rc.seed, patterns);

  auto f = open_output(ctx.path("equilibria.csv"));
  std::vector<std::string> header{"index", "trivial", "stable", "max_re_eig", "residual", "recalled"};
  for (const auto& l : unit_labels("s", net)) header.push_back(l);
  for (const auto& l : unit_labels("a", net)) header.push_back(l);
  CsvWriter csv(f, header);
  fmt::print(ctx.out, "{} equilibria\n", roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const auto& e = roots[k];
    const auto rec = recalled_patterns(softmax_output(e.state.s, net), patterns, net);
    const std::string recalled = rec.empty() ? "none" : join_patterns(rec);
    csv.cell(static_cast<int>(k + 1)).cell(e.trivial ? "true" : "false").cell(e.stable ? "true" : "false");
    csv.cell(e.max_real_part).cell(e.residual).cell(recalled);
    for (int j = 0; j < e.state.s.size(); ++j) csv.cell(e.state.s(j));
    for (int j = 0; j < e.state.a.size(); ++j) csv.cell(e.state.a(j));
    csv.end_row();
    fmt::print(ctx.out, "  {:3d}: {:<8} {:<9} max Re eig {:+.4g}  recalled {}\n", k + 1,
               e.trivial ? "trivial" : "", e.stable ? "stable" : "unstable", e.max_real_part, recalled);
  }
  return 0;
}

void write_lyapunov(Context& ctx, const LyapunovSpectrum& ly) {
  {
    auto f = open_output(ctx.path("exponents.csv"));
    CsvWriter csv(f, {"index", "exponent"});
    for (int i = 0; i < ly.exponents.size(); ++i) {
      csv.cell(i + 1).cell(ly.exponents(i));
      csv.end_row();
    }
  }
  auto f = open_output(ctx.path("lyapunov_trace.csv"));
  std::vector<std::string> header{"t"};
  for (int i = 0; i < ly.exponents.size(); ++i) header.push_back(fmt::format("lambda_{}", i + 1));
  CsvWriter csv(f, header);
  for (std::size_t k = 0; k < ly.history.size(); ++k) {
    csv.cell(ly.history_times[k]);
    for (int i = 0; i < ly.history[k].size(); ++i) csv.cell(ly.history[k](i));
    csv.end_row();
  }
  fmt::print(ctx.out, "lyapunov exponents:");
  for (int i = 0; i < ly.exponents.size(); ++i) fmt::print(ctx.out, " {:.5f}", ly.exponents(i));
  fmt::print(ctx.out, "\n");
}

int cmd_lyapunov(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& ly = rc.lyapunov;
  if (ly.linear_matrix) {
    const Eigen::MatrixXd A = read_matrix_file(*ly.linear_matrix);
    const auto spec = lyapunov_spectrum_linear(A, Eigen::VectorXd::Zero(A.rows()), ly.options);
    write_lyapunov(ctx, spec);
    return 0;
  }
  const WeightMatrix W = resolve_weights(rc);
  const std::vector<Pattern> patterns = resolve_patterns(rc);
  const std::string kind = patterns.empty() ? "trivial" : "pattern";
  const StateVector x0 = initial_state(rc, W, patterns, ly.initial_pattern, ly.eps, kind, 0.0, rc.seed);
  spdlog::info("lyapunov: transient {}, frame transient {}, t_total {}", ly.options.transient,
               ly.options.frame_transient, ly.options.t_total);
  write_lyapunov(ctx, lyapunov_spectrum(x0, W, rc.network, ly.options));
  return 0;
}

struct SweepRow {
  double mu1 = 0.0;
  std::string regime = "";
  double max_re_nu = 0.0;
  double amplitude = 0.0;
  std::string status = "ok";
};

SweepRow sweep_point(const RunConfig& rc, const WeightMatrix& base, const std::vector<Pattern>& patterns,
                     double mu1) {
  const auto& sw = *rc.sweep;
  SweepRow row;
  row.mu1 = mu1;
  try {
    const WeightMatrix W = rescale_to_mu1(base, rc.network, mu1);
    row.regime = to_string(classify_regime(W, rc.network).regime);
    row.max_re_nu = lemma2_basis(W, rc.network).max_real_part;
    const std::string kind = patterns.empty() ? "trivial" : "pattern";
    const StateVector x0 = initial_state(rc, W, patterns, sw.initial_pattern, sw.eps, kind, 0.0, rc.seed);
    const Trajectory traj = integrate(x0, W, rc.network, sw.integrator);
    double lo = 0.0;
    double hi = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.times[k] < 0.75 * sw.integrator.t_end) continue;
      const double o11 = traj.output(k, rc.network)(0);
      lo = first ? o11 : std::min(lo, o11);
      hi = first ? o11 : std::max(hi, o11);
      first = false;
    }
    row.amplitude = hi - lo;
  } catch (const Error& e) {
    row.status = fmt::format("error {}: {}", e.exit_code(), e.what());
  }
  return row;
}

int cmd_sweep(Context& ctx) {
  const auto& rc = ctx.rc;
  if (!rc.sweep) throw ConfigError("sweep needs a [sweep] section");
  const auto& sw = *rc.sweep;
  const WeightMatrix base = resolve_weights(rc);
  const std::vector<Pattern> patterns = resolve_patterns(rc);

  std::vector<double> grid(sw.steps);
  for (int k = 0; k < sw.steps; ++k) {
    grid[k] = sw.steps == 1 ? sw.mu1_from : sw.mu1_from + (sw.mu1_to - sw.mu1_from) * k / (sw.steps - 1);
  }
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      rows[k] = sweep_point(rc, base, patterns, grid[k]);
      spdlog::debug("sweep point {} (mu1 = {}) done", k + 1, grid[k]);
    }
  };
  const int jobs = std::max(1, std::min<int>(ctx.jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto f = open_output(ctx.path("sweep.csv"));
  CsvWriter csv(f, {"mu1", "regime", "max_re_nu", "amplitude", "status"});
  for (const auto& r : rows) {
    csv.cell(r.mu1).cell(r.regime).cell(r.max_re_nu).cell(r.amplitude).cell(r.status);
    csv.end_row();
    fmt::print(ctx.out, "mu1 {:10.5f}  {:<20} max Re(nu) {:+.5f}  amplitude {:.5f}  {}\n", r.mu1, r.regime,
               r.max_re_nu, r.amplitude, r.status);
  }
  return 0;
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    RunConfig rc = load_run_config(inv.config_path);
    if (inv.seed) rc.seed = *inv.seed;
    fs::path out_dir = inv.out_dir ? fs::path(*inv.out_dir) : fs::path(rc.output_dir);
    if (!inv.out_dir && out_dir.is_relative()) out_dir = fs::path(rc.base_dir) / out_dir;
    fs::create_directories(out_dir);
    Context ctx{std::move(rc), out_dir, inv.jobs, out};

    spdlog::info("{}: config {}, output {}", inv.command, inv.config_path, out_dir.string());
    if (inv.command == "learn") return cmd_learn(ctx);
    if (inv.command == "analyze") return cmd_analyze(ctx);
    if (inv.command == "hopf") return cmd_hopf(ctx);
    if (inv.command == "simulate") return cmd_simulate(ctx);
    if (inv.command == "equilibria") return cmd_equilibria(ctx);
    if (inv.command == "lyapunov") return cmd_lyapunov(ctx);
    if (inv.command == "sweep") return cmd_sweep(ctx);
    throw ConfigError(fmt::format("unknown command '{}'", inv.command));
  } catch (const DivergenceError& e) {
    fmt::print(err, "error: {} (last valid time {})\n", e.what(), format_number(e.last_valid_time()));
    return e.exit_code();
  } catch (const ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace recall_dyn::cli
