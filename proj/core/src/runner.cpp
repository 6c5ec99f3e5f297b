#include "tfe/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "tfe/flow.hpp"
#include "tfe/presets.hpp"
#include "tfe/trace_io.hpp"
#include "tfe/verify.hpp"
#include "tfe/version.hpp"

namespace tfe::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Build {
  RunConfig cfg;  // with overrides applied
  Grid grid;
  Field u0;
  FlowConfig flow;
  double removed_mean = 0.0;
  std::string out_dir;
  int threads = 1;
};

Build build_problem(const RunConfig& cfg_in, const CommandOptions& opts) {
  Build b;
  b.cfg = cfg_in;
  if (opts.seed) b.cfg.ic.seed = *opts.seed;
  b.out_dir = opts.out_dir ? *opts.out_dir : b.cfg.out_dir;
  b.threads = opts.threads ? *opts.threads : b.cfg.threads;
  b.grid = build_grid(b.cfg.dim, b.cfg.n, b.cfg.length);
  b.u0 = make_initial_condition(b.grid, b.cfg.ic, &b.removed_mean);

  TruncationPolicy policy = TruncationPolicy::none();
  if (b.cfg.truncation)
    policy = TruncationPolicy::capped(*b.cfg.truncation);
  else if (b.cfg.truncation_auto)
    policy = TruncationPolicy::capped(default_truncation_level(b.u0));

  b.flow.t_final = b.cfg.t_final;
  b.flow.n_steps = b.cfg.n_steps;
  b.flow.snapshot_stride = b.cfg.snapshot_stride;
  b.flow.c_star = b.cfg.c_star;
  b.flow.keep_states = true;
  b.flow.prox.policy = policy;
  b.flow.prox.grad_tol = b.cfg.grad_tol;
  b.flow.prox.max_newton = b.cfg.max_newton;
  b.flow.prox.max_cg = b.cfg.max_cg;
  return b;
}

double linf(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

// battery for the inequality checks: flat state + band-limited random fields
// at the scale of the data, filtered to the run's measure ball
std::vector<Field> build_battery(const Build& b, const FlowTrace& tr) {
  const double amp = 0.5 * std::max(1e-3, linf(b.u0));
  std::vector<Field> raw = make_test_battery(
      b.grid, b.cfg.evi_tests, amp, b.cfg.ic.seed ^ 0x7454455354ull);
  std::vector<Field> out;
  for (Field& f : raw)
    if (within_measure_ball(f, tr.c_star)) out.push_back(std::move(f));
  return out;
}

ordered_json config_echo(const RunConfig& c) {
  ordered_json j;
  j["dim"] = c.dim;
  j["n"] = c.n;
  j["length"] = c.length;
  j["ic.preset"] = c.ic.name;
  j["ic.amplitude"] = c.ic.amplitude;
  j["ic.k"] = c.ic.k;
  j["ic.center"] = c.ic.center;
  j["ic.width"] = c.ic.width;
  j["ic.slope"] = c.ic.slope;
  j["ic.max_mode"] = c.ic.max_mode;
  j["ic.seed"] = c.ic.seed;
  if (!c.ic.path.empty()) j["ic.path"] = c.ic.path;
  j["t_final"] = c.t_final;
  j["n_steps"] = c.n_steps;
  j["snapshot_stride"] = c.snapshot_stride;
  if (c.truncation)
    j["truncation"] = *c.truncation;
  else
    j["truncation"] = c.truncation_auto ? "auto" : "none";
  if (c.c_star)
    j["c_star"] = *c.c_star;
  else
    j["c_star"] = "auto";
  if (c.grad_tol)
    j["grad_tol"] = *c.grad_tol;
  else
    j["grad_tol"] = "auto";
  j["max_newton"] = c.max_newton;
  if (c.max_cg)
    j["max_cg"] = *c.max_cg;
  else
    j["max_cg"] = "auto";
  j["evi_tests"] = c.evi_tests;
  j["out"] = c.out_dir;
  j["threads"] = c.threads;
  if (!c.sweep_axis.empty()) {
    j["sweep.axis"] = c.sweep_axis;
    j["sweep.values"] = c.sweep_values;
  }
  return j;
}

ordered_json checks_json(std::span<const CheckReport> checks) {
  ordered_json arr = ordered_json::array();
  for (const CheckReport& c : checks) {
    ordered_json j;
    j["name"] = c.name;
    j["max_violation"] = c.max_violation;
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    j["enforced"] = c.enforced;
    j["context"] = c.context;
    arr.push_back(j);
  }
  return arr;
}

ordered_json flow_json(const Build& b, const FlowTrace& tr) {
  ordered_json j;
  j["steps_completed"] = tr.steps_completed();
  j["tau"] = tr.tau;
  j["c_star"] = tr.c_star;
  j["grad_tol"] = tr.grad_tol_abs;
  if (tr.policy.level)
    j["truncation_level"] = *tr.policy.level;
  else
    j["truncation_level"] = "none";
  j["removed_mean"] = b.removed_mean;
  j["phi_initial"] = tr.reports.front().phi;
  j["phi_final"] = tr.reports.back().phi;
  j["phi_raw_final"] = tr.reports.back().phi_raw;
  j["measure_final"] = tr.reports.back().measure_total;
  j["clamp_events"] = tr.flags.clamp_events;
  j["nonconvergence"] = tr.flags.nonconvergence;
  j["psi_violation"] = tr.flags.psi_violation;
  return j;
}

void print_checks(std::span<const CheckReport> checks) {
  for (const CheckReport& c : checks) {
    std::printf("[%s]%s %s (max_violation=%.3e, tol=%.3e) %s\n",
                c.passed ? "PASS" : "FAIL", c.enforced ? "" : " (logged)",
                c.name.c_str(), c.max_violation, c.tolerance, c.context.c_str());
  }
}

void write_snapshots(const Build& b, const FlowTrace& tr) {
  if (b.flow.snapshot_stride <= 0 || tr.states.empty()) return;
  const int last = tr.steps_completed();
  for (int k = 0; k <= last; ++k) {
    if (k % b.flow.snapshot_stride != 0 && k != last) continue;
    write_snapshot_csv(tr.states[static_cast<size_t>(k)],
                       b.out_dir + "/snapshot_" + std::to_string(k) + ".csv");
  }
}

int exit_from(const FlowTrace& tr, std::span<const CheckReport> checks) {
  if (tr.flags.nonconvergence) return kExitSolver;
  if (tr.flags.psi_violation) return kExitCheck;
  if (!all_enforced_passed(checks)) return kExitCheck;
  return kExitOk;
}

struct RunOutcome {
  int exit_code = kExitOk;
  double phi_initial = 0.0;
  double phi_final = 0.0;
  double measure_final = 0.0;
  bool all_passed = false;
};

RunOutcome run_core(const RunConfig& cfg, const CommandOptions& opts,
                    const char* command, bool quiet, bool with_singularity) {
  const auto t0 = std::chrono::steady_clock::now();
  Build b = build_problem(cfg, opts);
  fs::create_directories(b.out_dir);

  FlowTrace tr = evolve(b.u0, b.flow);
  if (opts.self_test_corrupt)
    tr = corrupt_trace_states(tr, 1e-3 * std::max(1.0, linf(b.u0)),
                              b.cfg.ic.seed ^ 0xC0FFEEull);

  const std::vector<Field> battery = build_battery(b, tr);
  const std::vector<CheckReport> checks = full_battery(tr, battery);

  write_trace_csv(tr, b.out_dir + "/trace.csv");
  write_snapshots(b, tr);

  ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["self_test_corrupt"] = opts.self_test_corrupt;
  j["config"] = config_echo(b.cfg);
  j["flow"] = flow_json(b, tr);
  j["checks"] = checks_json(checks);

  if (with_singularity) {
    const double level =
        tr.policy.level ? *tr.policy.level : default_truncation_level(b.u0);
    const SingularitySeries s = singularity_report(tr, level);
    std::string csv = "step,max_pos_laplacian,excess_mass,neg_min\n";
    for (size_t k = 0; k < s.excess_mass.size(); ++k) {
      csv += std::to_string(k) + ',' + format_double(s.max_pos_laplacian[k]) +
             ',' + format_double(s.excess_mass[k]) + ',' +
             format_double(s.neg_min[k]) + '\n';
    }
    write_text_file(b.out_dir + "/singularity.csv", csv);
    ordered_json sj;
    sj["level"] = level;
    if (s.onset_step)
      sj["onset_step"] = *s.onset_step;
    else
      sj["onset_step"] = nullptr;
    j["singularity"] = sj;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  j["wall_clock_s"] = wall;
  write_text_file(b.out_dir + "/summary.json", j.dump(2) + "\n");

  if (!quiet) {
    print_checks(checks);
    if (tr.flags.nonconvergence)
      std::printf("solver nonconvergence at step %d\n", tr.flags.failed_step);
    if (tr.flags.psi_violation)
      std::printf("measure-ball violation at step %d (|Lap u| > c_star=%.9e)\n",
                  tr.flags.failed_step, tr.c_star);
  }

  RunOutcome out;
  out.exit_code = exit_from(tr, checks);
  out.phi_initial = tr.reports.front().phi;
  out.phi_final = tr.reports.back().phi;
  out.measure_final = tr.reports.back().measure_total;
  out.all_passed = all_enforced_passed(checks);
  return out;
}

}  // namespace

int run_command(const RunConfig& cfg, const CommandOptions& opts) {
  try {
    return run_core(cfg, opts, "run", false, false).exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run: %s\n", e.what());
    return kExitUsage;
  }
}

int verify_command(const RunConfig& cfg, const CommandOptions& opts) {
  try {
    return run_core(cfg, opts, "verify", false, true).exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "verify: %s\n", e.what());
    return kExitUsage;
  }
}

int convergence_command(const RunConfig& cfg, const CommandOptions& opts) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    Build b = build_problem(cfg, opts);
    fs::create_directories(b.out_dir);

    std::vector<ConvergenceRow> rows;
    try {
      rows = convergence_study(b.u0, b.cfg.t_final, b.cfg.convergence_steps,
                               b.flow.prox);
    } catch (const std::runtime_error& e) {
      std::fprintf(stderr, "convergence: %s\n", e.what());
      return kExitSolver;
    }

    std::string csv = "n_steps,tau,error,bound_rhs,observed_order\n";
    bool all_bounded = true;
    for (const ConvergenceRow& r : rows) {
      csv += std::to_string(r.n_steps) + ',' + format_double(r.tau) + ',' +
             format_double(r.error) + ',' + format_double(r.bound_rhs) + ',' +
             format_double(r.observed_order) + '\n';
      all_bounded = all_bounded && r.error <= r.bound_rhs;
      std::printf("[%s] n_steps=%d tau=%.6e error=%.6e bound=%.6e order=%.3f\n",
                  r.error <= r.bound_rhs ? "PASS" : "FAIL", r.n_steps, r.tau,
                  r.error, r.bound_rhs, r.observed_order);
    }
    write_text_file(b.out_dir + "/convergence.csv", csv);

    ordered_json j;
    j["version"] = kVersion;
    j["command"] = "convergence";
    j["config"] = config_echo(b.cfg);
    ordered_json arr = ordered_json::array();
    for (const ConvergenceRow& r : rows) {
      ordered_json row;
      row["n_steps"] = r.n_steps;
      row["tau"] = r.tau;
      row["error"] = r.error;
      row["bound_rhs"] = r.bound_rhs;
      if (std::isnan(r.observed_order))
        row["observed_order"] = nullptr;
      else
        row["observed_order"] = r.observed_order;
      row["passed"] = r.error <= r.bound_rhs;
      arr.push_back(row);
    }
    j["rows"] = arr;
    j["all_bounded"] = all_bounded;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    j["wall_clock_s"] = wall;
    write_text_file(b.out_dir + "/summary.json", j.dump(2) + "\n");

    return all_bounded ? kExitOk : kExitCheck;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "convergence: %s\n", e.what());
    return kExitUsage;
  }
}

int sweep_command(const RunConfig& cfg, const CommandOptions& opts) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.sweep_axis.empty()) {
      std::fprintf(stderr, "sweep: config must set sweep.axis and sweep.values\n");
      return kExitUsage;
    }
    Build base = build_problem(cfg, opts);  // validates grid + preset up front
    fs::create_directories(base.out_dir);

    struct Member {
      RunConfig cfg;
      std::string dir;
      double value = 0.0;
      RunOutcome outcome;
      bool failed_usage = false;
    };
    std::vector<Member> members;
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i) {
      const double v = cfg.sweep_values[i];
      Member m;
      m.cfg = base.cfg;
      m.cfg.sweep_axis.clear();
      m.cfg.sweep_values.clear();
      m.value = v;
      if (cfg.sweep_axis == "n_steps") {
        const int s = static_cast<int>(v);
        if (static_cast<double>(s) != v || s < 1) {
          std::fprintf(stderr, "sweep: n_steps value %g is not a positive integer\n", v);
          return kExitUsage;
        }
        m.cfg.n_steps = s;
      } else if (cfg.sweep_axis == "n") {
        const int s = static_cast<int>(v);
        if (static_cast<double>(s) != v || s < 4) {
          std::fprintf(stderr, "sweep: n value %g is not an integer >= 4\n", v);
          return kExitUsage;
        }
        m.cfg.n = s;
      } else if (cfg.sweep_axis == "amplitude") {
        m.cfg.ic.amplitude = v;
      } else {  // truncation
        if (!(v > 0)) {
          std::fprintf(stderr, "sweep: truncation value %g must be positive\n", v);
          return kExitUsage;
        }
        m.cfg.truncation = v;
        m.cfg.truncation_auto = false;
      }
      char tag[64];
      std::snprintf(tag, sizeof tag, "%s_%02zu", cfg.sweep_axis.c_str(), i);
      m.dir = base.out_dir + "/" + tag;
      members.push_back(std::move(m));
    }

    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= members.size()) return;
        Member& m = members[i];
        CommandOptions mo;
        mo.out_dir = m.dir;
        mo.seed = opts.seed;
        try {
          m.outcome = run_core(m.cfg, mo, "run", true, false);
        } catch (const std::exception&) {
          m.failed_usage = true;
        }
      }
    };
    const int nthreads =
        std::max(1, std::min<int>(base.threads, static_cast<int>(members.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::string csv = "axis,value,exit_code,phi_initial,phi_final,measure_final,all_checks_passed\n";
    int exit_code = kExitOk;
    for (const Member& m : members) {
      const int code = m.failed_usage ? kExitUsage : m.outcome.exit_code;
      exit_code = std::max(exit_code, code);
      csv += cfg.sweep_axis + ',' + format_double(m.value) + ',' +
             std::to_string(code) + ',' + format_double(m.outcome.phi_initial) +
             ',' + format_double(m.outcome.phi_final) + ',' +
             format_double(m.outcome.measure_final) + ',' +
             (m.outcome.all_passed ? "1" : "0") + '\n';
      std::printf("[%s] %s=%g exit=%d phi: %.9e -> %.9e\n",
                  code == kExitOk ? "PASS" : "FAIL", cfg.sweep_axis.c_str(),
                  m.value, code, m.outcome.phi_initial, m.outcome.phi_final);
    }
    write_text_file(base.out_dir + "/sweep.csv", csv);

    ordered_json j;
    j["version"] = kVersion;
    j["command"] = "sweep";
    j["config"] = config_echo(base.cfg);
    j["axis"] = cfg.sweep_axis;
    j["values"] = cfg.sweep_values;
    j["exit_code"] = exit_code;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    j["wall_clock_s"] = wall;
    write_text_file(base.out_dir + "/summary.json", j.dump(2) + "\n");
    return exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sweep: %s\n", e.what());
    return kExitUsage;
  }
}

void print_config_errors(const std::vector<ConfigError>& errors) {
  for (const ConfigError& e : errors) {
    if (e.line > 0)
      std::fprintf(stderr, "config error (line %d, %s): %s\n", e.line,
                   e.key.empty() ? "-" : e.key.c_str(), e.reason.c_str());
    else
      std::fprintf(stderr, "config error (%s): %s\n",
                   e.key.empty() ? "-" : e.key.c_str(), e.reason.c_str());
  }
}

}  // namespace tfe::cli
