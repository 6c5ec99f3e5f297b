#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tfe/config.hpp"

namespace tfe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // config / usage error
inline constexpr int kExitSolver = 2;     // solver nonconvergence
inline constexpr int kExitCheck = 3;      // theorem-check failure

struct CommandOptions {
  std::optional<std::string> out_dir;       // overrides config `out`
  std::optional<std::uint64_t> seed;        // overrides ic.seed
  std::optional<int> threads;               // overrides config `threads`
  bool self_test_corrupt = false;           // run checks on a corrupted trace
};

/// Each command writes its artifacts under the resolved output directory and
/// returns one of the exit codes above. Progress and check lines go to
/// stdout; failures are reported, never thrown, except for I/O errors.
int run_command(const RunConfig& cfg, const CommandOptions& opts);
int convergence_command(const RunConfig& cfg, const CommandOptions& opts);
int verify_command(const RunConfig& cfg, const CommandOptions& opts);
int sweep_command(const RunConfig& cfg, const CommandOptions& opts);

void print_config_errors(const std::vector<ConfigError>& errors);

}  // namespace tfe::cli
