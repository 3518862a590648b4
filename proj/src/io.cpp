#include "recall_dyn/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"

namespace recall_dyn {

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_weights(std::ostream& out, const WeightMatrix& W) {
  out << W.n() << ' ' << W.m() << '\n';
  const auto& E = W.entries();
  for (int r = 0; r < E.rows(); ++r) {
    for (int c = 0; c < E.cols(); ++c) {
      if (c) out << ',';
      out << format_number(E(r, c));
    }
    out << '\n';
  }
}

void write_weights_file(const std::string& path, const WeightMatrix& W) {
  std::ofstream f = open_output(path);
  write_weights(f, W);
}

namespace {

double parse_double(std::string tok, int lineno) {
  const auto b = tok.find_first_not_of(" \t\r");
  const auto e = tok.find_last_not_of(" \t\r");
  tok = b == std::string::npos ? std::string() : tok.substr(b, e - b + 1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", lineno, tok), lineno);
  }
  return v;
}

}  // namespace

WeightMatrix parse_weights(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = 0;
  int m = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hdr(line);
    std::string extra;
    if (!(hdr >> n >> m) || (hdr >> extra) || n < 1 || m < 2) {
      throw ParseError(fmt::format("line {}: expected header 'n m' with n >= 1, m >= 2", lineno),
                       lineno);
    }
    break;
  }
  if (n == 0) throw ParseError("weight file is empty", 0);
  const int u = n * m;
  Eigen::MatrixXd E(u, u);
  int row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= u) {
      throw DimensionError(fmt::format("line {}: more than {} weight rows", lineno, u));
    }
    std::istringstream cells(line);
    std::string tok;
    int col = 0;
    while (std::getline(cells, tok, ',')) {
      if (col >= u) {
        throw DimensionError(fmt::format("line {}: more than {} columns", lineno, u));
      }
      E(row, col++) = parse_double(tok, lineno);
    }
    if (col != u) {
      throw DimensionError(fmt::format("line {}: expected {} columns, found {}", lineno, u, col));
    }
    ++row;
  }
  if (row != u) throw DimensionError(fmt::format("expected {} weight rows, found {}", u, row));
  return {n, m, E};
}

WeightMatrix read_weights_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open weight file '{}'", path));
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_weights(buf.str());
}

std::vector<std::string> unit_labels(const std::string& prefix, const NetworkConfig& cfg) {
  std::vector<std::string> out;
  for (int i = 1; i <= cfg.n; ++i)
    for (int j = 1; j <= cfg.m; ++j) out.push_back(fmt::format("{}_{}_{}", prefix, i, j));
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const NetworkConfig& cfg,
                          bool with_outputs) {
  std::vector<std::string> header{"t"};
  for (const auto* p : {"s", "a", "o"}) {
    if (std::string(p) == "o" && !with_outputs) continue;
    const auto labels = unit_labels(p, cfg);
    header.insert(header.end(), labels.begin(), labels.end());
  }
  CsvWriter csv(out, header);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    csv.cell(traj.times[k]);
    const StateVector& x = traj.states[k];
    for (int j = 0; j < x.s.size(); ++j) csv.cell(x.s(j));
    for (int j = 0; j < x.a.size(); ++j) csv.cell(x.a(j));
    if (with_outputs) {
      const Eigen::VectorXd o = traj.output(k, cfg);
      for (int j = 0; j < o.size(); ++j) csv.cell(o(j));
    }
    csv.end_row();
  }
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (filled_ >= columns_) throw std::logic_error("too many CSV cells in row");
  if (filled_) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  out_ << format_number(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  sep();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& x) {
  sep();
  if (x.find_first_of(",\"\n") != std::string::npos) {
    out_ << '"';
    for (char c : x) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  } else {
    out_ << x;
  }
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw std::logic_error(fmt::format("CSV row has {} cells, expected {}", filled_, columns_));
  }
  out_ << '\n';
  filled_ = 0;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
  return f;
}

}  // namespace recall_dyn
