#pragma once

// Text formats: weight files and CSV tables. Every number is written with 17
// significant digits so files round-trip exactly.

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/model.hpp"

namespace recall_dyn {

/// "%.17g".
std::string format_number(double x);

/// First line "n m", then mn lines of mn comma-separated values.
void write_weights(std::ostream& out, const WeightMatrix& W);
void write_weights_file(const std::string& path, const WeightMatrix& W);
/// Throws ParseError with the offending line, DimensionError on shape
/// mismatch and StructureError on nonzero diagonal blocks.
WeightMatrix parse_weights(const std::string& text);
WeightMatrix read_weights_file(const std::string& path);

/// Header t,s_1_1..s_n_m,a_1_1..a_n_m[,o_1_1..o_n_m] with one-based indices.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const NetworkConfig& cfg,
                          bool with_outputs);

/// "prefix_i_j" for every unit, one-based.
std::vector<std::string> unit_labels(const std::string& prefix, const NetworkConfig& cfg);

/// Minimal CSV writer with fixed column count.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& x);
  CsvWriter& cell(const char* x) { return cell(std::string(x)); }
  /// Ends the row; throws std::logic_error if the cell count is wrong.
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// Opens `path` for writing, creating parent directories. Throws ConfigError.
std::ofstream open_output(const std::string& path);

}  // namespace recall_dyn
