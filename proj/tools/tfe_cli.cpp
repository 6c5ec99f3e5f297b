// Batch front end: run | convergence | verify | sweep, each driven by a flat
// key = value config file. Exit codes: 0 all checks pass, 1 usage/config
// error, 2 solver nonconvergence, 3 theorem-check failure.

#include <cstdint>
#include <string>

#include "CLI11.hpp"

#include "tfe/config.hpp"
#include "tfe/runner.hpp"
#include "tfe/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"minimizing-movement solver and verification harness for "
               "u_t = Lap exp(-Lap u)"};
  app.set_version_flag("--version", tfe::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool self_test_corrupt = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "path to the run configuration")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed override for seeded presets");
    sub->add_option("--threads", threads, "worker threads for sweep members");
  };

  CLI::App* run = app.add_subcommand("run", "evolve and emit trace + summary");
  add_common(run);
  run->add_flag("--self-test-corrupt", self_test_corrupt,
                "corrupt the trace before checking (negative control; expect exit 3)");
  CLI::App* conv = app.add_subcommand("convergence", "time-step refinement study");
  add_common(conv);
  CLI::App* verify = app.add_subcommand("verify", "full inequality battery on a fresh run");
  add_common(verify);
  CLI::App* sweep = app.add_subcommand("sweep", "vary one config axis across values");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  tfe::ParseResult parsed = tfe::parse_config_file(config_path);
  if (!parsed.config) {
    tfe::cli::print_config_errors(parsed.errors);
    return tfe::cli::kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  tfe::cli::CommandOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (active->count("--seed") > 0) opts.seed = seed;
  if (threads > 0) opts.threads = threads;
  opts.self_test_corrupt = self_test_corrupt;

  if (run->parsed()) return tfe::cli::run_command(*parsed.config, opts);
  if (conv->parsed()) return tfe::cli::convergence_command(*parsed.config, opts);
  if (verify->parsed()) return tfe::cli::verify_command(*parsed.config, opts);
  return tfe::cli::sweep_command(*parsed.config, opts);
}
