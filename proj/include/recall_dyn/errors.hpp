#pragma once

#include <stdexcept>
#include <string>

namespace recall_dyn {

/// Exit-code category attached to every library error. The CLI maps these
/// one-to-one onto process exit codes.
enum class ErrorCategory : int {
  input = 1,       // malformed files, bad parameters, dimension mismatches
  structure = 2,   // weight matrix violates the model's structural assumptions
  degeneracy = 3,  // analysis is undefined at this point (non-simple mu1, resonance)
  divergence = 4,  // a numerical integration left the finite range
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

struct InvalidStateError : Error {
  explicit InvalidStateError(const std::string& w) : Error(ErrorCategory::input, w) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorCategory::input, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::input, w) {}
};

/// Parse failure in a text input; `line()` is one-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& w, int line)
      : Error(ErrorCategory::input, w), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct StructureError : Error {
  explicit StructureError(const std::string& w) : Error(ErrorCategory::structure, w) {}
};

/// The learning rule is undefined for the requested dimensions (m = 2 without
/// the explicit two-minicolumn variant).
struct UnsupportedRuleError : Error {
  explicit UnsupportedRuleError(const std::string& w)
      : Error(ErrorCategory::structure, w) {}
};

struct DegenerateSpectrumError : Error {
  explicit DegenerateSpectrumError(const std::string& w)
      : Error(ErrorCategory::structure, w) {}
};

struct NotAtHopfError : Error {
  explicit NotAtHopfError(const std::string& w) : Error(ErrorCategory::degeneracy, w) {}
};

struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& w) : Error(ErrorCategory::degeneracy, w) {}
};

struct ResonanceError : Error {
  explicit ResonanceError(const std::string& w) : Error(ErrorCategory::degeneracy, w) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& w, double last_valid_time)
      : Error(ErrorCategory::divergence, w), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

struct RenormalizationError : Error {
  explicit RenormalizationError(const std::string& w)
      : Error(ErrorCategory::divergence, w) {}
};

}  // namespace recall_dyn
