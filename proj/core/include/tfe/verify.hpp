#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tfe/flow.hpp"

namespace tfe {

/// Outcome of one inequality check over a trace. Tolerances are
/// (absolute floor) + (relative factor x problem scale) so that any slack
/// traces back to the solver gradient tolerance and rounding, never to the
/// inequality itself. `enforced=false` marks diagnostics that are logged but
/// do not gate exit codes (theory leaves them formal on truncated runs).
struct CheckReport {
  std::string name;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;  // max_violation <= tolerance
  bool enforced = true;
  std::string context;
};

/// Per-step dissipation phi(u_k) + |u_k-u_{k-1}|^2/(2 tau) <= phi(u_{k-1}),
/// plus phi(u_k) <= phi(u_0) over the whole run.
CheckReport check_dissipation_phi(const FlowTrace& trace);

/// E(u_k) nonincreasing within relative slack; logged-only on truncated runs.
CheckReport check_dissipation_energy(const FlowTrace& trace);

/// Discrete evolution variational inequality against a battery of test
/// fields; violation normalized per unit distance |u_k - v|_h.
CheckReport check_evi(const FlowTrace& trace, std::span<const Field> tests);

/// Regularization estimates with the flat state as minimizer:
/// phi(u_k) <= phi(v) + |v-u0|^2/(2 t_k), slope(u_k) <= |u0|/t_k,
/// phi(u_k) - |Omega| <= |u0|^2/(2 t_k), and |u_k|_h nonincreasing.
CheckReport check_regularization(const FlowTrace& trace, std::span<const Field> tests);

/// slope(u_k)^2 <= slope(v)^2 + |v-u0|^2/t_k^2 for battery fields v.
CheckReport check_slope_regularization(const FlowTrace& trace, std::span<const Field> tests);

/// Backward-Euler strong-form residual |(u_k-u_{k-1})/tau - Lap
/// flux_potential(Lap u_k)|_h, recomputed from states independently of the
/// solver's bookkeeping.
CheckReport check_strong_residual(const FlowTrace& trace);

/// |pos - neg| <= tol * total at every step (discrete divergence theorem).
CheckReport check_mass_split(const FlowTrace& trace);

/// |sum u_k| <= tol * |u_k|_2 at every step.
CheckReport check_mean_conservation(const FlowTrace& trace);

/// measure_total(u_k) <= 2 phi(u_0) + tol for every k.
CheckReport check_measure_bound(const FlowTrace& trace);

/// max_k |u_t|_k <= slope(u_0) (1 + tol).
CheckReport check_ut_bound(const FlowTrace& trace);

/// Integrated maximal-slope budget:
/// sum_k tau (|u_t|_k^2 + slope_k^2)/2 <= phi(u_0) - phi(u_n) + n*slack.
CheckReport check_maximal_slope_budget(const FlowTrace& trace);

/// L2 bound of the truncated Laplacian, |min(Lap u_k, N)|_2^2 <= 4 e^N A +
/// 2|Omega|N^2 with A = phi_raw(u_k), checked at N = 1 and at the policy cap.
CheckReport check_truncation_l2(const FlowTrace& trace);

struct SingularitySeries {
  std::vector<double> max_pos_laplacian;
  std::vector<double> excess_mass;
  std::vector<double> neg_min;        // most negative Laplacian value
  std::optional<int> onset_step;      // first index with excess_mass > 0
};

/// Latent-singularity diagnostics above the given cap (recomputed from
/// states when the cap differs from the trace policy).
SingularitySeries singularity_report(const FlowTrace& trace, double level);

/// Every check above, in a fixed order.
std::vector<CheckReport> full_battery(const FlowTrace& trace, std::span<const Field> tests);

bool all_enforced_passed(std::span<const CheckReport> reports);

/// Negative-control helpers: deterministic corruptions that a correct
/// checker must flag.
FlowTrace corrupt_trace_states(const FlowTrace& trace, double amplitude, std::uint64_t seed);
FlowTrace corrupt_trace_mass_split(const FlowTrace& trace, double delta);

}  // namespace tfe
