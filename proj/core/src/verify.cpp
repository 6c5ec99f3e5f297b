#include "tfe/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "tfe/rng.hpp"

namespace tfe {

namespace {

constexpr double kFloor = 1e-300;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void require_states(const FlowTrace& tr, const char* who) {
  if (tr.states.size() != tr.times.size())
    throw std::invalid_argument(std::string(who) + ": trace must keep full states");
}

std::vector<double> solver_phi_series(const FlowTrace& tr) {
  std::vector<double> out;
  out.reserve(tr.states.size());
  for (const Field& s : tr.states) out.push_back(solver_energy(s, tr.policy));
  return out;
}

CheckReport make_report(std::string name, double violation, double tolerance,
                        bool enforced, std::string context) {
  CheckReport r;
  r.name = std::move(name);
  r.max_violation = violation;
  r.tolerance = tolerance;
  r.passed = violation <= tolerance;
  r.enforced = enforced;
  r.context = std::move(context);
  return r;
}

}  // namespace

CheckReport check_dissipation_phi(const FlowTrace& tr) {
  const int n = tr.steps_completed();
  std::vector<double> phi;
  if (tr.states.size() == tr.times.size()) {
    phi = solver_phi_series(tr);
  } else {
    for (const EnergyReport& r : tr.reports) phi.push_back(r.phi);
  }
  double step_viol = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    const double d = tr.displacements[static_cast<size_t>(k)];
    step_viol = std::max(step_viol, phi[static_cast<size_t>(k)] +
                                        d * d / (2.0 * tr.tau) -
                                        phi[static_cast<size_t>(k - 1)]);
  }
  // reported (truncated) energy against its initial value, slack accumulated
  // over the run and normalized back to per-step units
  double init_viol = -std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < tr.reports.size(); ++k)
    init_viol = std::max(init_viol, tr.reports[k].phi - tr.reports[0].phi);
  double viol = std::max(step_viol, init_viol / std::max(1, n));
  if (!std::isfinite(viol)) viol = 0.0;
  return make_report(
      "dissipation.phi", viol, 10.0 * tr.grad_tol_abs, true,
      fmt("per-step=%.3e vs-initial=%.3e", step_viol, init_viol));
}

CheckReport check_dissipation_energy(const FlowTrace& tr) {
  double viol = -std::numeric_limits<double>::infinity();
  const double scale = std::max(tr.reports[0].dissipation_E, kFloor);
  for (size_t k = 1; k < tr.reports.size(); ++k)
    viol = std::max(viol, (tr.reports[k].dissipation_E -
                           tr.reports[k - 1].dissipation_E) / scale);
  if (!std::isfinite(viol)) viol = 0.0;
  const bool enforced = !tr.policy.truncated();
  return make_report("dissipation.energy_E", viol, 1e-6, enforced,
                     enforced ? fmt("E0=%.6e", tr.reports[0].dissipation_E)
                              : "logged-only: truncated run");
}

CheckReport check_evi(const FlowTrace& tr, std::span<const Field> tests) {
  require_states(tr, "check_evi");
  const std::vector<double> phi = solver_phi_series(tr);
  const int n = tr.steps_completed();
  double viol = -std::numeric_limits<double>::infinity();
  for (const Field& v : tests) {
    const double phi_v = solver_energy(v, tr.policy);
    for (int k = 1; k <= n; ++k) {
      const Field dk = lin_comb(1.0, tr.states[static_cast<size_t>(k)], -1.0, v);
      const Field dk1 = lin_comb(1.0, tr.states[static_cast<size_t>(k - 1)], -1.0, v);
      const double dist = norm_h(dk);
      const double lhs = (inner(dk, dk) - inner(dk1, dk1)) / (2.0 * tr.tau);
      const double rhs = phi_v - phi[static_cast<size_t>(k)];
      viol = std::max(viol, (lhs - rhs) / std::max(dist, kFloor));
    }
  }
  if (!std::isfinite(viol)) viol = 0.0;
  return make_report("evi", viol, 10.0 * tr.grad_tol_abs, true,
                     fmt("%zu test fields, violation per unit distance", tests.size()));
}

CheckReport check_regularization(const FlowTrace& tr, std::span<const Field> tests) {
  require_states(tr, "check_regularization");
  const std::vector<double> phi = solver_phi_series(tr);
  const Field& u0 = tr.states[0];
  const double norm_u0 = norm_h(u0);
  const double phi_min = tr.grid.volume();  // flat state, Jensen on the mean-zero Laplacian
  const int n = tr.steps_completed();

  const double ninf = -std::numeric_limits<double>::infinity();
  double v_phidec = ninf, v_slope = ninf, v_gap = ninf, v_dist = ninf;
  for (const Field& v : tests) {
    const double phi_v = solver_energy(v, tr.policy);
    const Field dv0 = lin_comb(1.0, v, -1.0, u0);
    const double q0 = inner(dv0, dv0);
    for (int k = 1; k <= n; ++k) {
      const double t = tr.times[static_cast<size_t>(k)];
      const double quad = q0 / (2.0 * t);
      const double scale =
          std::max({1.0, std::fabs(phi[static_cast<size_t>(k)]), std::fabs(phi_v), quad});
      v_phidec = std::max(v_phidec, (phi[static_cast<size_t>(k)] - phi_v - quad) / scale);
    }
  }
  double prev_norm = norm_u0;
  for (int k = 1; k <= n; ++k) {
    const double t = tr.times[static_cast<size_t>(k)];
    const double slope_k = tr.reports[static_cast<size_t>(k)].slope;
    const double bound = norm_u0 / t;
    v_slope = std::max(v_slope, (slope_k - bound) / std::max({slope_k, bound, kFloor}));
    const double gap = phi[static_cast<size_t>(k)] - phi_min;
    const double gap_bound = norm_u0 * norm_u0 / (2.0 * t);
    v_gap = std::max(v_gap, (gap - gap_bound) / std::max({1.0, gap, gap_bound}));
    const double nk = norm_h(tr.states[static_cast<size_t>(k)]);
    v_dist = std::max(v_dist, (nk - prev_norm) / std::max(norm_u0, kFloor));
    prev_norm = nk;
  }
  double viol = std::max({v_phidec, v_slope, v_gap, v_dist});
  if (!std::isfinite(viol)) viol = 0.0;
  return make_report("regularization", viol, 1e-6, true,
                     fmt("phi_dec=%.3e slope_decay=%.3e gap_decay=%.3e dist_monotone=%.3e",
                         v_phidec, v_slope, v_gap, v_dist));
}

CheckReport check_slope_regularization(const FlowTrace& tr, std::span<const Field> tests) {
  require_states(tr, "check_slope_regularization");
  const Field& u0 = tr.states[0];
  const int n = tr.steps_completed();
  double viol = -std::numeric_limits<double>::infinity();
  for (const Field& v : tests) {
    const double sv = metric_slope(v, tr.policy);
    const Field dv0 = lin_comb(1.0, v, -1.0, u0);
    const double q0 = inner(dv0, dv0);
    for (int k = 1; k <= n; ++k) {
      const double t = tr.times[static_cast<size_t>(k)];
      const double sk = tr.reports[static_cast<size_t>(k)].slope;
      const double rhs = sv * sv + q0 / (t * t);
      const double scale = std::max({1.0, sk * sk, rhs});
      viol = std::max(viol, (sk * sk - rhs) / scale);
    }
  }
  if (!std::isfinite(viol)) viol = 0.0;
  return make_report("regularization.slope_sq", viol, 1e-6, true,
                     fmt("%zu test fields", tests.size()));
}

CheckReport check_strong_residual(const FlowTrace& tr) {
  require_states(tr, "check_strong_residual");
  const int n = tr.steps_completed();
  double worst = 0.0;
  Field w(tr.grid), lw(tr.grid), r(tr.grid);
  for (int k = 1; k <= n; ++k) {
    const Field& prev = tr.states[static_cast<size_t>(k - 1)];
    const Field& next = tr.states[static_cast<size_t>(k)];
    neumann_laplacian(next, w);
    for (double& s : w.values) s = flux_potential(s, tr.policy, nullptr);
    w.mean_zero = false;
    neumann_laplacian(w, lw);
    for (int i = 0; i < r.size(); ++i)
      r[i] = (next[i] - prev[i]) / tr.tau - lw[i];
    worst = std::max(worst, norm_h(r));
  }
  return make_report("strong_residual", worst, tr.grad_tol_abs / tr.tau, true,
                     fmt("max over %d steps, recomputed from states", n));
}

CheckReport check_mass_split(const FlowTrace& tr) {
  double viol = 0.0;
  for (const EnergyReport& r : tr.reports)
    viol = std::max(viol, std::fabs(r.measure_pos - r.measure_neg) /
                              std::max(r.measure_total, kFloor));
  return make_report("mass_split", viol, 1e-10, true,
                     "relative to measure_total per step");
}

CheckReport check_mean_conservation(const FlowTrace& tr) {
  require_states(tr, "check_mean_conservation");
  double viol = 0.0;
  for (const Field& s : tr.states) {
    const double sum = std::fabs(kahan_sum(s.values));
    double sq = 0.0;
    for (double x : s.values) sq += x * x;
    viol = std::max(viol, sum / std::max(std::sqrt(sq), kFloor));
  }
  return make_report("mean_conservation", viol, 1e-12, true,
                     "|sum u| / |u|_2 per state");
}

CheckReport check_measure_bound(const FlowTrace& tr) {
  const double bound = 2.0 * tr.reports[0].phi;
  double viol = -std::numeric_limits<double>::infinity();
  for (const EnergyReport& r : tr.reports)
    viol = std::max(viol, r.measure_total - bound);
  return make_report("measure_bound", viol, 1e-8, true,
                     fmt("2*phi(u0)=%.9e c_star=%.9e", bound, tr.c_star));
}

CheckReport check_ut_bound(const FlowTrace& tr) {
  const double slope0 = tr.reports[0].slope;
  double ut_max = 0.0;
  for (double u : tr.ut_norms) ut_max = std::max(ut_max, u);
  const double viol = (ut_max - slope0) / std::max(slope0, kFloor);
  return make_report("ut_bound", viol, 1e-6, true,
                     fmt("max|u_t|=%.6e slope(u0)=%.6e", ut_max, slope0));
}

CheckReport check_maximal_slope_budget(const FlowTrace& tr) {
  const int n = tr.steps_completed();
  std::vector<double> phi;
  if (tr.states.size() == tr.times.size()) {
    phi = solver_phi_series(tr);
  } else {
    for (const EnergyReport& r : tr.reports) phi.push_back(r.phi);
  }
  double lhs = 0.0, ut_max = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double ut = tr.ut_norms[static_cast<size_t>(k)];
    const double sl = tr.reports[static_cast<size_t>(k)].slope;
    lhs += tr.tau * 0.5 * (ut * ut + sl * sl);
    ut_max = std::max(ut_max, ut);
  }
  const double rhs = phi.front() - phi[static_cast<size_t>(n)];
  const double slack = 10.0 * tr.grad_tol_abs * std::max(1.0, ut_max);
  return make_report("maximal_slope_budget", lhs - rhs, n * slack, true,
                     fmt("lhs=%.9e rhs=%.9e", lhs, rhs));
}

CheckReport check_truncation_l2(const FlowTrace& tr) {
  require_states(tr, "check_truncation_l2");
  std::vector<double> levels = {1.0};
  if (tr.policy.level) levels.push_back(*tr.policy.level);
  double viol = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < tr.states.size(); ++k) {
    const Field lap = neumann_laplacian(tr.states[k]);
    const double a = tr.reports[k].phi_raw;
    for (double lvl : levels) {
      const double rhs =
          4.0 * std::exp(lvl) * a + 2.0 * tr.grid.volume() * lvl * lvl;
      if (!std::isfinite(rhs)) continue;  // bound vacuous at this level
      double s = 0.0;
      for (double m : lap.values) {
        const double c = std::min(m, lvl);
        s += c * c;
      }
      const double lhs = tr.grid.cell_volume * s;
      viol = std::max(viol, (lhs - rhs) / rhs);
    }
  }
  if (!std::isfinite(viol)) viol = 0.0;
  return make_report("truncation_l2", viol, 1e-12, true,
                     fmt("levels checked: %zu", levels.size()));
}

SingularitySeries singularity_report(const FlowTrace& tr, double level) {
  SingularitySeries s;
  const bool reuse = tr.policy.level && *tr.policy.level == level;
  if (!reuse) require_states(tr, "singularity_report");
  for (size_t k = 0; k < tr.reports.size(); ++k) {
    s.max_pos_laplacian.push_back(tr.reports[k].max_pos_laplacian);
    s.neg_min.push_back(tr.reports[k].min_laplacian);
    double excess;
    if (reuse) {
      excess = tr.reports[k].excess_mass;
    } else {
      const Field lap = neumann_laplacian(tr.states[k]);
      double acc = 0.0;
      for (double m : lap.values) acc += std::max(m - level, 0.0);
      excess = tr.grid.cell_volume * acc;
    }
    s.excess_mass.push_back(excess);
    if (!s.onset_step && excess > 0.0) s.onset_step = static_cast<int>(k);
  }
  return s;
}

std::vector<CheckReport> full_battery(const FlowTrace& tr, std::span<const Field> tests) {
  std::vector<CheckReport> out;
  out.push_back(check_dissipation_phi(tr));
  out.push_back(check_dissipation_energy(tr));
  out.push_back(check_evi(tr, tests));
  out.push_back(check_regularization(tr, tests));
  out.push_back(check_slope_regularization(tr, tests));
  out.push_back(check_strong_residual(tr));
  out.push_back(check_mass_split(tr));
  out.push_back(check_mean_conservation(tr));
  out.push_back(check_measure_bound(tr));
  out.push_back(check_ut_bound(tr));
  out.push_back(check_maximal_slope_budget(tr));
  out.push_back(check_truncation_l2(tr));
  return out;
}

bool all_enforced_passed(std::span<const CheckReport> reports) {
  for (const CheckReport& r : reports)
    if (r.enforced && !r.passed) return false;
  return true;
}

FlowTrace corrupt_trace_states(const FlowTrace& tr, double amplitude, std::uint64_t seed) {
  require_states(tr, "corrupt_trace_states");
  FlowTrace out = tr;
  SplitMix64 rng(seed);
  for (size_t k = 1; k < out.states.size(); ++k) {
    Field& s = out.states[k];
    for (double& x : s.values) x += amplitude * rng.uniform(-1.0, 1.0);
    mean_zero_project_in_place(s);
  }
  // rebuild the derived series so the corruption is self-consistent
  for (size_t k = 0; k < out.states.size(); ++k) {
    out.reports[k] = evaluate_energy(out.states[k], out.policy);
    if (k == 0) continue;
    const Field d = lin_comb(1.0, out.states[k], -1.0, out.states[k - 1]);
    out.displacements[k] = norm_h(d);
    out.ut_norms[k] = out.displacements[k] / out.tau;
  }
  return out;
}

FlowTrace corrupt_trace_mass_split(const FlowTrace& tr, double delta) {
  FlowTrace out = tr;
  EnergyReport& r = out.reports[out.reports.size() / 2];
  r.measure_pos += delta;
  r.measure_total += delta;
  return out;
}

}  // namespace tfe
