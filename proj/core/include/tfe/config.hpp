#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tfe/presets.hpp"

namespace tfe {

struct ConfigError {
  int line = 0;  // 0 when the error is not tied to one line
  std::string key;
  std::string reason;
};

/// Fully resolved batch configuration. Parsed from a flat key = value file,
/// one setting per line, '#' comments. See README for the key list.
struct RunConfig {
  int dim = 1;
  int n = 0;
  double length = 1.0;

  InitialConditionPreset ic;

  double t_final = 0.0;
  int n_steps = 0;
  int snapshot_stride = 0;
  std::optional<double> truncation;  // set when a fixed cap is requested
  bool truncation_auto = false;      // cap at 10 max(1, max Lap u0)
  std::optional<double> c_star;      // nullopt = "auto" (2 phi(u0) + 1)

  std::optional<double> grad_tol;    // nullopt = "auto" (1e-10 max(1,|u0|))
  int max_newton = 50;
  std::optional<int> max_cg;         // nullopt = "auto" (10 * cells)

  int evi_tests = 20;
  std::string out_dir = "out";
  int threads = 1;

  std::string sweep_axis;            // n_steps | n | amplitude | truncation
  std::vector<double> sweep_values;

  std::vector<int> convergence_steps = {8, 16, 32, 64};
};

struct ParseResult {
  std::optional<RunConfig> config;  // set iff errors is empty
  std::vector<ConfigError> errors;
};

/// Parses and validates; collects every error (unknown key, duplicate key,
/// type mismatch, constraint violation) instead of stopping at the first.
ParseResult parse_config(const std::string& text);

ParseResult parse_config_file(const std::string& path);

}  // namespace tfe
