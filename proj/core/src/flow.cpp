#include "tfe/flow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfe {

static double pde_residual_norm(const Field& prev, const Field& next, double tau,
                                const TruncationPolicy& policy) {
  Field w = neumann_laplacian(next);
  for (double& s : w.values) s = flux_potential(s, policy, nullptr);
  w.mean_zero = false;
  const Field lw = neumann_laplacian(w);
  Field r(prev.grid);
  const double inv_tau = 1.0 / tau;
  for (int i = 0; i < r.size(); ++i)
    r[i] = (next[i] - prev[i]) * inv_tau - lw[i];
  return norm_h(r);
}

FlowTrace evolve(const Field& u0, const FlowConfig& cfg) {
  if (!(cfg.t_final > 0.0)) throw std::invalid_argument("evolve: t_final must be positive");
  if (cfg.n_steps < 1) throw std::invalid_argument("evolve: n_steps must be >= 1");

  FlowTrace tr;
  tr.grid = u0.grid;
  tr.policy = cfg.prox.policy;
  tr.tau = cfg.t_final / cfg.n_steps;

  Field u = mean_zero_project(u0);

  ProxOptions opts = cfg.prox;
  opts.tau = tr.tau;
  tr.grad_tol_abs = resolved_grad_tol(opts, u);
  opts.grad_tol = tr.grad_tol_abs;

  EnergyReport r0 = evaluate_energy(u, tr.policy);
  if (!std::isfinite(r0.phi))
    throw std::invalid_argument("evolve: phi(u0) is not finite");
  tr.c_star = cfg.c_star ? *cfg.c_star : 2.0 * r0.phi + 1.0;
  if (r0.measure_total > tr.c_star)
    throw std::invalid_argument("evolve: u0 violates the measure ball |Lap u0| <= c_star");

  tr.times.push_back(0.0);
  tr.reports.push_back(r0);
  tr.displacements.push_back(0.0);
  tr.ut_norms.push_back(0.0);
  tr.pde_residuals.push_back(0.0);
  tr.newton_iters.push_back(0);
  tr.cg_iters.push_back(0);
  tr.clamp_events_per_step.push_back(r0.clamp_events);
  tr.flags.clamp_events += r0.clamp_events;
  if (cfg.keep_states) tr.states.push_back(u);

  for (int k = 1; k <= cfg.n_steps; ++k) {
    ProxResult step = prox_step(u, opts);
    const EnergyReport rep = evaluate_energy(step.v, tr.policy);

    tr.times.push_back(k * tr.tau);
    tr.reports.push_back(rep);
    tr.displacements.push_back(step.displacement);
    tr.ut_norms.push_back(step.displacement / tr.tau);
    tr.pde_residuals.push_back(pde_residual_norm(u, step.v, tr.tau, tr.policy));
    tr.newton_iters.push_back(step.newton_iters);
    tr.cg_iters.push_back(step.cg_iters_total);
    tr.clamp_events_per_step.push_back(step.clamp_events + rep.clamp_events);
    tr.flags.clamp_events += step.clamp_events + rep.clamp_events;

    u = step.v;
    if (cfg.keep_states) tr.states.push_back(u);

    if (!step.converged()) {
      tr.flags.nonconvergence = true;
      tr.flags.failed_step = k;
      break;
    }
    if (rep.measure_total > tr.c_star) {
      tr.flags.psi_violation = true;
      tr.flags.failed_step = k;
      break;
    }
  }
  return tr;
}

std::vector<ConvergenceRow> convergence_study(const Field& u0, double t_final,
                                              std::span<const int> steps_list,
                                              const ProxOptions& prox) {
  if (steps_list.empty())
    throw std::invalid_argument("convergence_study: steps_list is empty");
  for (size_t i = 1; i < steps_list.size(); ++i)
    if (steps_list[i] <= steps_list[i - 1])
      throw std::invalid_argument("convergence_study: steps_list must be increasing");

  const Field u = mean_zero_project(u0);
  const double slope0 = metric_slope(u, prox.policy);

  FlowConfig ref_cfg;
  ref_cfg.t_final = t_final;
  ref_cfg.n_steps = 8 * steps_list.back();
  ref_cfg.prox = prox;
  ref_cfg.keep_states = false;

  // the fine run is the only state we need from the reference
  FlowConfig probe = ref_cfg;
  probe.keep_states = true;
  FlowTrace ref = evolve(u, probe);
  if (!ref.completed_ok())
    throw std::runtime_error("convergence_study: reference run failed");
  const Field& u_ref = ref.states.back();

  std::vector<ConvergenceRow> rows;
  rows.reserve(steps_list.size());
  for (int n_steps : steps_list) {
    FlowConfig cfg = ref_cfg;
    cfg.n_steps = n_steps;
    cfg.keep_states = true;
    FlowTrace t = evolve(u, cfg);
    if (!t.completed_ok())
      throw std::runtime_error("convergence_study: member run failed");
    ConvergenceRow row;
    row.n_steps = n_steps;
    row.tau = t.tau;
    const Field d = lin_comb(1.0, t.states.back(), -1.0, u_ref);
    row.error = norm_h(d);
    row.bound_rhs = row.tau / std::sqrt(2.0) * slope0;
    row.observed_order = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      row.observed_order =
          std::log(prev.error / row.error) / std::log(prev.tau / row.tau);
    }
    rows.push_back(row);
  }
  return rows;
}

TwoFlowResult two_flow_run(const Field& u0, const Field& v0, const FlowConfig& cfg) {
  TwoFlowResult out;
  FlowConfig c = cfg;
  c.keep_states = true;
  out.a = evolve(u0, c);
  out.b = evolve(v0, c);
  const size_t m = std::min(out.a.states.size(), out.b.states.size());
  out.distances.reserve(m);
  for (size_t k = 0; k < m; ++k) {
    const Field d = lin_comb(1.0, out.a.states[k], -1.0, out.b.states[k]);
    out.distances.push_back(norm_h(d));
  }
  return out;
}

}  // namespace tfe
