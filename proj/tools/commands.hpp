#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace recall_dyn::cli {

struct Invocation {
  std::string command;
  std::string config_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Runs one command and returns the process exit code. Library errors are
/// reported on `err` and mapped to their category's code.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace recall_dyn::cli
