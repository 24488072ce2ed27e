// ihoc: infinite-horizon optimal control scenarios from the command line.
//
//   ihoc <solve|sweep|simulate|verify|convergence> --config FILE
//        [--set key=value ...] --out DIR [--workers N] [--seed N]
//
// IHOC_LOG selects log verbosity (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ihoc/app/config.hpp"
#include "ihoc/app/runner.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("ihoc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("IHOC_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept the spelled-out ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Infinite-horizon optimal control: iLQR transfer + LQR regulation"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;

  for (const char* name : {"solve", "sweep", "simulate", "verify", "convergence"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "scenario configuration (JSON)")->required();
    sub->add_option("--set", overrides, "override a configuration key: key=value (repeatable)");
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--workers", workers, "worker threads for sweeps (0 = all cores)");
    sub->add_option("--seed", seed, "seed for randomized checks");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ihoc::app::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ihoc::app::ScenarioConfig config;
  try {
    config = ihoc::app::load_config(config_path, overrides);
  } catch (const ihoc::Error& e) {
    const auto doc = ihoc::app::error_document(command, "", e.kind(), e.what());
    std::cerr << doc.dump() << "\n";
    return ihoc::app::kExitConfig;
  }
  config.output_dir = out_dir;
  if (workers) config.workers = *workers;
  if (seed) config.seed = *seed;

  const ihoc::app::RunResult result = ihoc::app::run(command, config);
  if (result.exit_code != ihoc::app::kExitOk) std::cerr << result.summary.dump() << "\n";
  for (const auto& path : result.artifacts) spdlog::info("wrote {}", path);
  return result.exit_code;
}
