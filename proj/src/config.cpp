#include "recall_dyn/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "recall_dyn/errors.hpp"
#include "recall_dyn/io.hpp"
#include "recall_dyn/spectral.hpp"

namespace recall_dyn {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& tok, const std::string& whole) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ConfigError(fmt::format("'{}' is not a number", whole));
  }
  return v;
}

// Reads one section, rejecting keys that are not consumed.
class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : name_(std::move(name)) {
    for (const auto& [key, child] : tree) {
      if (!child.empty()) throw ConfigError(fmt::format("[{}] {}: nested values are not supported", name_, key));
      values_[key] = trim(child.data());
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  void real(const std::string& key, double& out) {
    if (auto v = text(key)) out = wrap(key, [&] { return parse_real(*v); });
  }
  void real(const std::string& key, std::optional<double>& out) {
    if (auto v = text(key)) out = wrap(key, [&] { return parse_real(*v); });
  }
  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (auto v = text(key)) {
      long long x = 0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
      if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
        throw ConfigError(fmt::format("[{}] {}: '{}' is not an integer", name_, key, *v));
      }
      out = static_cast<Int>(x);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = text(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        throw ConfigError(fmt::format("[{}] {}: '{}' is not a boolean", name_, key, *v));
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError(fmt::format("[{}] unknown key '{}'", name_, key));
    }
  }

 private:
  template <typename F>
  double wrap(const std::string& key, F&& f) {
    try {
      return f();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("[{}] {}: {}", name_, key, e.what()));
    }
  }

  std::string name_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::string resolve_path(const std::string& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute()) return path.string();
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

std::vector<int> parse_index_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 1) {
      throw ConfigError(fmt::format("{}: '{}' is not a positive index", key, tok));
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
  return out;
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash == std::string::npos) return parse_plain(t, t);
  const double num = parse_plain(trim(t.substr(0, slash)), t);
  const double den = parse_plain(trim(t.substr(slash + 1)), t);
  if (den == 0.0) throw ConfigError(fmt::format("'{}' divides by zero", t));
  return num / den;
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(fmt::format("line {}: {}", e.line(), e.message()), static_cast<int>(e.line()));
  }

  RunConfig rc;
  rc.base_dir = base_dir;
  static const std::set<std::string> known{"network", "run",      "simulate", "equilibria",
                                           "lyapunov", "sweep", "hopf"};
  for (const auto& [name, child] : tree) {
    if (!known.count(name)) {
      throw ConfigError(child.empty() ? fmt::format("key '{}' outside any section", name)
                                      : fmt::format("unknown section [{}]", name));
    }
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(child ? *child : pt::ptree(), name);
  };

  {
    Section s = section("network");
    if (!s.has("n") || !s.has("m")) throw ConfigError("[network] requires n and m");
    s.integer("n", rc.network.n);
    s.integer("m", rc.network.m);
    s.real("alpha", rc.network.alpha);
    s.real("g_bar_a", rc.network.g_bar_a);
    if (auto w = s.text("weights")) rc.weights_path = resolve_path(base_dir, *w);
    if (auto p = s.text("patterns")) rc.patterns_path = resolve_path(base_dir, *p);
    s.real("mu1", rc.mu1);
    std::optional<double> scale, offset;
    s.real("mu1_scale", scale);
    s.real("mu1_offset", offset);
    if (scale || offset) {
      if (rc.mu1) throw ConfigError("[network] give either mu1 or mu1_scale/mu1_offset, not both");
      rc.mu1 = scale.value_or(0.0) * (1.0 + rc.network.alpha) + offset.value_or(0.0);
    }
    if (auto r = s.text("rule")) {
      if (*r == "standard") {
        rc.rule = LearningRule::standard;
      } else if (*r == "two_minicolumn") {
        rc.rule = LearningRule::two_minicolumn;
      } else {
        throw ConfigError(fmt::format("[network] rule: unknown learning rule '{}'", *r));
      }
    }
    s.finish();
    rc.network.validate();
    if (!rc.weights_path && !rc.patterns_path) {
      throw ConfigError("[network] needs a weights file or a patterns file");
    }
    if (!rc.weights_path && !rc.mu1) throw ConfigError("[network] learning from patterns needs mu1");
  }
  {
    Section s = section("run");
    s.integer("seed", rc.seed);
    if (auto o = s.text("output_dir")) rc.output_dir = *o;
    s.finish();
  }
  {
    Section s = section("simulate");
    auto& sim = rc.simulate;
    s.real("dt", sim.integrator.dt);
    s.real("t_end", sim.integrator.t_end);
    s.integer("record_stride", sim.integrator.record_stride);
    s.real("record_start", sim.integrator.record_start);
    if (auto v = s.text("initial")) {
      if (*v != "pattern" && *v != "trivial" && *v != "random") {
        throw ConfigError(fmt::format("[simulate] initial: '{}' (expected pattern, trivial or random)", *v));
      }
      sim.initial = *v;
    }
    if (auto v = s.text("initial_patterns")) sim.initial_patterns = parse_index_list(*v, "[simulate] initial_patterns");
    s.real("eps", sim.eps);
    s.real("noise", sim.noise);
    s.boolean("with_outputs", sim.with_outputs);
    s.real("threshold", sim.threshold);
    s.real("burn_in", sim.burn_in);
    s.real("window_start", sim.window_start);
    s.real("window_end", sim.window_end);
    s.finish();
    sim.integrator.validate();
    if (!(sim.burn_in >= 0.0 && sim.burn_in < 1.0)) throw ConfigError("[simulate] burn_in must lie in [0, 1)");
    if (sim.noise < 0.0) throw ConfigError("[simulate] noise must be non-negative");
  }
  {
    Section s = section("equilibria");
    s.integer("n_starts", rc.equilibria_starts);
    s.finish();
    if (rc.equilibria_starts < 0) throw ConfigError("[equilibria] n_starts must be non-negative");
  }
  {
    Section s = section("lyapunov");
    auto& ly = rc.lyapunov;
    s.real("dt", ly.options.dt);
    s.real("renorm_interval", ly.options.renorm_interval);
    s.real("t_total", ly.options.t_total);
    s.real("transient", ly.options.transient);
    s.real("frame_transient", ly.options.frame_transient);
    s.integer("history_stride", ly.options.history_stride);
    s.integer("initial_pattern", ly.initial_pattern);
    s.real("eps", ly.eps);
    if (auto p = s.text("linear_matrix")) ly.linear_matrix = resolve_path(base_dir, *p);
    s.finish();
    ly.options.validate();
  }
  if (tree.get_child_optional("sweep")) {
    Section s = section("sweep");
    SweepSection sw;
    s.real("mu1_from", sw.mu1_from);
    s.real("mu1_to", sw.mu1_to);
    s.integer("steps", sw.steps);
    s.real("dt", sw.integrator.dt);
    s.real("t_end", sw.integrator.t_end);
    s.integer("record_stride", sw.integrator.record_stride);
    s.integer("initial_pattern", sw.initial_pattern);
    s.real("eps", sw.eps);
    s.finish();
    if (sw.steps < 1) throw ConfigError("[sweep] steps must be >= 1");
    if (!(sw.mu1_to > sw.mu1_from) && sw.steps > 1) throw ConfigError("[sweep] mu1_to must exceed mu1_from");
    sw.integrator.validate();
    rc.sweep = sw;
  }
  {
    Section s = section("hopf");
    s.real("q1_rotation", rc.hopf.q1_rotation);
    s.real("agreement_tolerance", rc.hopf.agreement_tolerance);
    s.finish();
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << f.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_run_config(buf.str(), parent.empty() ? "." : parent.string());
}

std::vector<Pattern> resolve_patterns(const RunConfig& rc) {
  if (!rc.patterns_path) return {};
  return read_pattern_file(*rc.patterns_path, rc.network.n, rc.network.m);
}

WeightMatrix resolve_weights(const RunConfig& rc) {
  if (rc.weights_path) {
    WeightMatrix W = read_weights_file(*rc.weights_path);
    W.check_dims(rc.network);
    if (rc.mu1) return rescale_to_mu1(W, rc.network, *rc.mu1);
    return W;
  }
  LearningSpec spec{resolve_patterns(rc), *rc.mu1, rc.network.n, rc.network.m, rc.rule};
  return learn_weights(spec, rc.network);
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open matrix file '{}'", path));
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::stringstream cells(t);
    std::string tok;
    while (std::getline(cells, tok, ',')) {
      try {
        row.push_back(parse_plain(trim(tok), trim(tok)));
      } catch (const ConfigError& e) {
        throw ParseError(fmt::format("{}:{}: {}", path, lineno, e.what()), lineno);
      }
    }
    rows.push_back(std::move(row));
  }
  const auto N = rows.size();
  if (N == 0) throw ParseError(fmt::format("{}: empty matrix", path), 0);
  Eigen::MatrixXd A(N, N);
  for (std::size_t r = 0; r < N; ++r) {
    if (rows[r].size() != N) throw DimensionError(fmt::format("{}: matrix must be square", path));
    for (std::size_t c = 0; c < N; ++c) A(r, c) = rows[r][c];
  }
  return A;
}

}  // namespace recall_dyn
