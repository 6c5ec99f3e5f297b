#pragma once

#include <optional>
#include <vector>

#include "tfe/energy.hpp"
#include "tfe/grid.hpp"
#include "tfe/prox.hpp"

namespace tfe {

struct FlowConfig {
  double t_final = 1.0;
  int n_steps = 1;          // tau = t_final / n_steps, fixed per run
  ProxOptions prox;         // prox.tau is overwritten by the run's tau
  int snapshot_stride = 0;  // serialization thinning; scalars are always kept
  std::optional<double> c_star;  // nullopt = auto, 2 phi(u0) + 1
  bool keep_states = true;  // full states enable independent re-verification
};

struct FlowFlags {
  long clamp_events = 0;
  bool nonconvergence = false;
  bool psi_violation = false;  // a-posteriori measure-ball check failed
  int failed_step = -1;
};

/// Time-indexed record of a run. Entry 0 describes the initial state; all
/// per-step vectors are aligned with `times`.
struct FlowTrace {
  Grid grid;
  TruncationPolicy policy;
  double tau = 0.0;
  double c_star = 0.0;
  double grad_tol_abs = 0.0;  // resolved once from u0, fixed for the run

  std::vector<double> times;
  std::vector<EnergyReport> reports;
  std::vector<double> displacements;
  std::vector<double> ut_norms;
  std::vector<double> pde_residuals;
  std::vector<long> newton_iters;
  std::vector<long> cg_iters;
  std::vector<long> clamp_events_per_step;
  std::vector<Field> states;  // empty when keep_states is off
  FlowFlags flags;

  int steps_completed() const { return static_cast<int>(times.size()) - 1; }
  bool completed_ok() const { return !flags.nonconvergence && !flags.psi_violation; }
};

/// Runs n_steps resolvent applications from u0 (projected to mean zero).
/// Solver failure or a measure-ball violation stops the run; the partial
/// trace comes back with the corresponding flag set.
FlowTrace evolve(const Field& u0, const FlowConfig& cfg);

struct ConvergenceRow {
  int n_steps = 0;
  double tau = 0.0;
  double error = 0.0;           // |u_n(t_final) - u_ref(t_final)|_h
  double bound_rhs = 0.0;       // (tau/sqrt(2)) * metric_slope(u0)
  double observed_order = 0.0;  // NaN on the first row
};

/// Refinement study against a reference computed with 8x the finest entry.
std::vector<ConvergenceRow> convergence_study(const Field& u0, double t_final,
                                              std::span<const int> steps_list,
                                              const ProxOptions& prox);

struct TwoFlowResult {
  FlowTrace a;
  FlowTrace b;
  std::vector<double> distances;  // |u_k - v_k|_h, entry per recorded state
};

/// Evolves two initial states under the same configuration and records the
/// pairwise distance series (the contraction diagnostic).
TwoFlowResult two_flow_run(const Field& u0, const Field& v0, const FlowConfig& cfg);

}  // namespace tfe
