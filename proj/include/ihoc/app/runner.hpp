#pragma once

#include <string>
#include <vector>

#include "ihoc/app/config.hpp"

namespace ihoc::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;        // solver / model error
inline constexpr int kExitConfig = 2;         // bad configuration or usage
inline constexpr int kExitVerification = 3;   // verify ran, a check failed

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;   // paths written
  Json summary;                          // summary.json contents (or the error document)
};

/// Runs one of solve | sweep | simulate | verify | convergence into
/// config.output_dir. Errors are caught, written as error.json, and reflected
/// in the exit code; partial artifacts are kept.
RunResult run(const std::string& command, const ScenarioConfig& config);

/// Machine-readable error document.
Json error_document(const std::string& command, const std::string& scenario,
                    const std::string& kind, const std::string& message);

}  // namespace ihoc::app
