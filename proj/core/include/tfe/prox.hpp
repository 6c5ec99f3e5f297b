#pragma once

#include <optional>
#include <vector>

#include "tfe/energy.hpp"
#include "tfe/grid.hpp"

namespace tfe {

struct ProxOptions {
  double tau = 1e-2;
  TruncationPolicy policy = TruncationPolicy::none();

  /// Termination on the gradient of the step objective; nullopt resolves to
  /// 1e-10 * max(1, |u|_h) at call time.
  std::optional<double> grad_tol;
  int max_newton = 50;
  /// CG budget per Newton solve; nullopt resolves to 10 * cells.
  std::optional<int> max_cg;

  double ls_shrink = 0.5;
  double ls_sufficient_decrease = 1e-4;

  /// Measure-ball radius for the objective's indicator; the minimization
  /// itself is unconstrained (the ball is provably inactive along the flow),
  /// callers assert feasibility a posteriori.
  std::optional<double> c_star;

  /// Optional battery for the per-step EVI gap; empty -> gap reported as 0.
  const std::vector<Field>* evi_tests = nullptr;
  /// Newton start override (defaults to u); used by uniqueness tests.
  const Field* initial_guess = nullptr;
};

enum class ProxStatus { converged, newton_budget_exhausted, line_search_failed };

struct ProxResult {
  Field v;
  int newton_iters = 0;
  long cg_iters_total = 0;
  double final_grad_norm = 0.0;  // |(v-u)/tau - Lap flux_potential(Lap v)|_h
  double objective = 0.0;        // phi(v) + |v-u|^2 / (2 tau)
  double evi_gap = 0.0;
  double displacement = 0.0;     // |v-u|_h
  long clamp_events = 0;
  ProxStatus status = ProxStatus::converged;

  bool converged() const { return status == ProxStatus::converged; }
};

double resolved_grad_tol(const ProxOptions& opts, const Field& u);

/// One resolvent application: minimize phi(v) + |v-u|^2/(2 tau) over
/// mean-zero fields by damped Newton with projected, diagonally
/// preconditioned CG inner solves. Never throws on nonconvergence; the best
/// iterate comes back carrying a failure status.
ProxResult prox_step(const Field& u, const ProxOptions& opts);

/// Step objective phi(v) + psi(v) + |v-u|^2/(2 tau); +inf when the measure
/// ball indicator fires (only evaluated if opts.c_star is set).
double prox_objective(const Field& u, const Field& v, const ProxOptions& opts);

/// Gradient of the step objective at v, projected to the mean-zero subspace.
Field prox_gradient(const Field& u, const Field& v, const ProxOptions& opts);

/// Action of the step-objective Hessian at v on w:
/// w/tau + Lap( flux_potential_slope(Lap v) .* Lap w ), projected.
Field prox_hessian_apply(const Field& v, const Field& w, const ProxOptions& opts);

/// Max over t_samples of the quadratic-strengthened convexity defect
///   Phi(v_t) - [(1-t) Phi(v0) + t Phi(v1) - t(1-t)/(2 tau) |v0-v1|^2],
/// v_t the linear interpolate; nonpositive up to rounding for a convex phi.
double tau_convexity_probe(const Field& u, const Field& v0, const Field& v1,
                           double tau, std::span<const double> t_samples,
                           const TruncationPolicy& policy);

}  // namespace tfe
