#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"recall-dyn: free-recall attractor network analysis"};
  app.require_subcommand(1);

  recall_dyn::cli::Invocation inv;
  std::uint64_t seed = 0;
  std::string out_dir;
  for (const auto* name : {"learn", "analyze", "hopf", "simulate", "equilibria", "lyapunov", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", inv.config_path, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", inv.jobs, "worker threads for sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  inv.command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--out")) inv.out_dir = out_dir;

  auto logger = spdlog::stderr_logger_st("recall-dyn");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("RECALL_DYN_LOG")) {
    const auto level = spdlog::level::from_str(lvl);
    if (level == spdlog::level::off && std::string(lvl) != "off") {
      std::cerr << "warning: RECALL_DYN_LOG='" << lvl << "' not recognized, using warn\n";
    } else {
      spdlog::set_level(level);
    }
  }

  return recall_dyn::cli::run(inv, std::cout, std::cerr);
}
