#include "tfe/prox.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfe {

// The gradient contains Lap(exp(-Lap v)); evaluating that fourth-order
// composition has a rounding floor ~ eps * |Lap|^2 * |u|_inf below which no
// gradient norm can be certified. The resolved tolerance never dips under it.
static double gradient_noise_floor(const Field& u) {
  const Grid& g = u.grid;
  double linf = 0.0;
  for (double v : u.values) linf = std::max(linf, std::fabs(v));
  const double lap_gain = 4.0 * g.dim / (g.h * g.h);
  return 0.25 * DBL_EPSILON * lap_gain * lap_gain * linf;
}

double resolved_grad_tol(const ProxOptions& opts, const Field& u) {
  if (opts.grad_tol && !(*opts.grad_tol > 0.0))
    throw std::invalid_argument("ProxOptions: grad_tol must be positive");
  const double requested =
      opts.grad_tol ? *opts.grad_tol : 1e-10 * std::max(1.0, norm_h(u));
  return std::max(requested, gradient_noise_floor(u));
}

namespace {

struct Workspace {
  Field lap_v;     // Lap v
  Field w;         // flux_potential(Lap v)
  Field lap_w;     // Lap w
  Field grad;      // (v-u)/tau - lap_w, projected
  Field slopes;    // flux_potential_slope(Lap v)
  Field tmp1, tmp2;

  explicit Workspace(const Grid& g)
      : lap_v(g), w(g), lap_w(g), grad(g), slopes(g), tmp1(g), tmp2(g) {}
};

// gradient of the step objective; refreshes lap_v/w/lap_w in ws
double eval_gradient(const Field& u, const Field& v, const ProxOptions& opts,
                     Workspace& ws, long* clamps) {
  neumann_laplacian(v, ws.lap_v);
  const int m = v.size();
  for (int i = 0; i < m; ++i)
    ws.w[i] = flux_potential(ws.lap_v[i], opts.policy, clamps);
  ws.w.mean_zero = false;
  neumann_laplacian(ws.w, ws.lap_w);
  const double inv_tau = 1.0 / opts.tau;
  for (int i = 0; i < m; ++i) ws.grad[i] = (v[i] - u[i]) * inv_tau - ws.lap_w[i];
  mean_zero_project_in_place(ws.grad);
  return norm_h(ws.grad);
}

double solver_objective(const Field& u, const Field& v, const ProxOptions& opts,
                        long* clamps) {
  const Field d = lin_comb(1.0, v, -1.0, u);
  const double q = inner(d, d) / (2.0 * opts.tau);
  return solver_energy(v, opts.policy, clamps) + q;
}

// Hp = p/tau + Lap(slopes .* Lap p), projected
void hessian_apply(const Field& slopes, double tau, const Field& p, Field& tmp,
                   Field& out) {
  neumann_laplacian(p, tmp);
  const int m = p.size();
  for (int i = 0; i < m; ++i) tmp[i] *= slopes[i];
  tmp.mean_zero = false;
  neumann_laplacian(tmp, out);
  const double inv_tau = 1.0 / tau;
  for (int i = 0; i < m; ++i) out[i] = p[i] * inv_tau + out[i];
  mean_zero_project_in_place(out);
}

int neighbor_count(const Grid& g, int k) {
  if (g.dim == 1) return (k == 0 || k == g.n - 1) ? 1 : 2;
  const int ix = k % g.n, iy = k / g.n;
  int c = 4;
  if (ix == 0 || ix == g.n - 1) --c;
  if (iy == 0 || iy == g.n - 1) --c;
  return c;
}

// diag of the Hessian: 1/tau + [a_i deg_i^2 + sum_nbr a_k] / h^4
void hessian_diagonal(const Grid& g, const Field& slopes, double tau, Field& diag) {
  const double inv_h4 = 1.0 / (g.h * g.h * g.h * g.h);
  const double inv_tau = 1.0 / tau;
  const int n = g.n;
  const int m = slopes.size();
  for (int k = 0; k < m; ++k) {
    const int deg = neighbor_count(g, k);
    double nbr = 0.0;
    if (g.dim == 1) {
      if (k > 0) nbr += slopes[k - 1];
      if (k < n - 1) nbr += slopes[k + 1];
    } else {
      const int ix = k % n, iy = k / n;
      if (ix > 0) nbr += slopes[k - 1];
      if (ix < n - 1) nbr += slopes[k + 1];
      if (iy > 0) nbr += slopes[k - n];
      if (iy < n - 1) nbr += slopes[k + n];
    }
    diag[k] = inv_tau + (slopes[k] * double(deg) * double(deg) + nbr) * inv_h4;
  }
}

// projected, Jacobi-preconditioned CG for H d = b on the mean-zero subspace
long pcg_solve(const Field& slopes, double tau, const Field& b, Field& x,
               int max_iters, Workspace& ws) {
  const Grid& g = b.grid;
  const int m = b.size();
  Field diag(g);
  hessian_diagonal(g, slopes, tau, diag);

  std::fill(x.values.begin(), x.values.end(), 0.0);
  x.mean_zero = true;
  Field r = b;
  mean_zero_project_in_place(r);
  Field z(g);
  for (int i = 0; i < m; ++i) z[i] = r[i] / diag[i];
  mean_zero_project_in_place(z);
  Field p = z;
  double rz = inner(r, z);
  const double b_norm = norm_h(b);
  const double tol = 1e-6 * b_norm;

  long iters = 0;
  while (iters < max_iters) {
    if (norm_h(r) <= tol) break;
    hessian_apply(slopes, tau, p, ws.tmp1, ws.tmp2);  // tmp2 = Hp
    const double pAp = inner(p, ws.tmp2);
    if (!(pAp > 0.0)) break;  // numerical loss of definiteness; use current x
    const double alpha = rz / pAp;
    add_scaled(x, alpha, p);
    add_scaled(r, -alpha, ws.tmp2);
    ++iters;
    for (int i = 0; i < m; ++i) z[i] = r[i] / diag[i];
    mean_zero_project_in_place(z);
    const double rz_new = inner(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    p.mean_zero = true;
  }
  return iters;
}

}  // namespace

Field prox_gradient(const Field& u, const Field& v, const ProxOptions& opts) {
  Workspace ws(u.grid);
  long clamps = 0;
  eval_gradient(u, v, opts, ws, &clamps);
  return ws.grad;
}

Field prox_hessian_apply(const Field& v, const Field& w, const ProxOptions& opts) {
  long clamps = 0;
  Field lap_v = neumann_laplacian(v);
  Field slopes(v.grid);
  for (int i = 0; i < v.size(); ++i)
    slopes[i] = flux_potential_slope(lap_v[i], opts.policy, &clamps);
  Field tmp(v.grid), out(v.grid);
  hessian_apply(slopes, opts.tau, w, tmp, out);
  return out;
}

double prox_objective(const Field& u, const Field& v, const ProxOptions& opts) {
  if (opts.c_star && !within_measure_ball(v, *opts.c_star))
    return std::numeric_limits<double>::infinity();
  const Field d = lin_comb(1.0, v, -1.0, u);
  return surface_energy(v, opts.policy) + inner(d, d) / (2.0 * opts.tau);
}

ProxResult prox_step(const Field& u, const ProxOptions& opts) {
  if (!(opts.tau > 0.0) || !std::isfinite(opts.tau))
    throw std::invalid_argument("prox_step: tau must be positive and finite");

  const Grid& g = u.grid;
  ProxResult res;
  Workspace ws(g);

  Field v = opts.initial_guess ? mean_zero_project(*opts.initial_guess)
                               : mean_zero_project(u);

  // the second term is the evaluation-noise floor of (v-u)/tau: below it the
  // gradient cannot be certified, which matters only for vanishing tau
  const double tol =
      std::max(resolved_grad_tol(opts, u) * std::min(1.0, 1.0 / opts.tau),
               16.0 * DBL_EPSILON * std::max(1.0, norm_h(u)) / opts.tau);
  const int max_cg = opts.max_cg ? *opts.max_cg : 10 * g.cells();

  double grad_norm = eval_gradient(u, v, opts, ws, &res.clamp_events);
  Field delta(g);

  while (grad_norm > tol) {
    if (res.newton_iters >= opts.max_newton) {
      res.status = ProxStatus::newton_budget_exhausted;
      break;
    }

    for (int i = 0; i < v.size(); ++i)
      ws.slopes[i] = flux_potential_slope(ws.lap_v[i], opts.policy, &res.clamp_events);

    Field rhs = ws.grad;
    for (double& x : rhs.values) x = -x;
    rhs.mean_zero = true;
    res.cg_iters_total += pcg_solve(ws.slopes, opts.tau, rhs, delta, max_cg, ws);

    // Armijo backtracking on the solver objective; the epsilon term absorbs
    // rounding in energy differences once the gradient is near tolerance
    const double f0 = solver_objective(u, v, opts, &res.clamp_events);
    double gd = inner(ws.grad, delta);
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        // fall back to a halved steepest-descent step and retry
        for (int i = 0; i < v.size(); ++i) delta[i] = -ws.grad[i];
        delta.mean_zero = true;
        gd = -inner(ws.grad, ws.grad);
        for (double& x : delta.values) x *= 0.5 * opts.tau;
        gd *= 0.5 * opts.tau;
      }
      double alpha = 1.0;
      while (alpha > 1e-14) {
        Field trial = v;
        add_scaled(trial, alpha, delta);
        const double f_trial = solver_objective(u, trial, opts, &res.clamp_events);
        const double budget = f0 + opts.ls_sufficient_decrease * alpha * gd +
                              16.0 * DBL_EPSILON * (std::fabs(f0) + 1.0);
        if (f_trial <= budget) {
          v = std::move(trial);
          accepted = true;
          break;
        }
        alpha *= opts.ls_shrink;
      }
    }
    if (!accepted) {
      res.status = ProxStatus::line_search_failed;
      break;
    }

    ++res.newton_iters;
    grad_norm = eval_gradient(u, v, opts, ws, &res.clamp_events);
  }

  mean_zero_project_in_place(v);
  res.final_grad_norm = grad_norm;
  const Field d = lin_comb(1.0, v, -1.0, u);
  res.displacement = norm_h(d);
  res.objective = surface_energy(v, opts.policy, &res.clamp_events) +
                  res.displacement * res.displacement / (2.0 * opts.tau);

  if (opts.evi_tests && !opts.evi_tests->empty()) {
    double gap = -std::numeric_limits<double>::infinity();
    const double phi_v = solver_energy(v, opts.policy);
    for (const Field& wfield : *opts.evi_tests) {
      const Field dv = lin_comb(1.0, v, -1.0, wfield);
      const Field du = lin_comb(1.0, u, -1.0, wfield);
      const double lhs = (inner(dv, dv) - inner(du, du)) / (2.0 * opts.tau);
      const double rhs_gap = solver_energy(wfield, opts.policy) - phi_v;
      gap = std::max(gap, lhs - rhs_gap);
    }
    res.evi_gap = gap;
  }

  res.v = std::move(v);
  return res;
}

double tau_convexity_probe(const Field& u, const Field& v0, const Field& v1,
                           double tau, std::span<const double> t_samples,
                           const TruncationPolicy& policy) {
  ProxOptions opts;
  opts.tau = tau;
  opts.policy = policy;
  const double f0 = prox_objective(u, v0, opts);
  const double f1 = prox_objective(u, v1, opts);
  const Field diff = lin_comb(1.0, v0, -1.0, v1);
  const double gap2 = inner(diff, diff);
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    const Field vt = lin_comb(1.0 - t, v0, t, v1);
    const double lhs = prox_objective(u, vt, opts);
    const double rhs = (1.0 - t) * f0 + t * f1 - t * (1.0 - t) * gap2 / (2.0 * tau);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace tfe
