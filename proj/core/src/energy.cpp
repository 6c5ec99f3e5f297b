#include "tfe/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfe {

TruncationPolicy TruncationPolicy::capped(double n) {
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("TruncationPolicy: level must be positive and finite");
  TruncationPolicy p;
  p.level = n;
  return p;
}

static double clamped_exp(double e, long* clamp_events) {
  if (e > kExpClamp) {
    if (clamp_events) ++*clamp_events;
    e = kExpClamp;
  } else if (e < -kExpClamp) {
    if (clamp_events) ++*clamp_events;
    e = -kExpClamp;
  }
  return std::exp(e);
}

double flux_potential(double s, const TruncationPolicy& policy, long* clamp_events) {
  const double capped = policy.level ? std::min(s, *policy.level) : s;
  return clamped_exp(-capped, clamp_events);
}

double flux_potential_slope(double s, const TruncationPolicy& policy, long* clamp_events) {
  if (policy.level && s >= *policy.level) return 0.0;
  return clamped_exp(-s, clamp_events);
}

double energy_from_density(const Grid& g, std::span<const double> mu,
                           const TruncationPolicy& policy, long* clamp_events) {
  double s = 0.0, c = 0.0;
  for (double m : mu) {
    const double capped = policy.level ? std::min(m, *policy.level) : m;
    double y = clamped_exp(-capped, clamp_events) - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return g.cell_volume * s;
}

double surface_energy(const Field& u, const TruncationPolicy& policy, long* clamp_events) {
  const Field lap = neumann_laplacian(u);
  return energy_from_density(u.grid, lap.values, policy, clamp_events);
}

double surface_energy_raw(const Field& u, long* clamp_events) {
  return surface_energy(u, TruncationPolicy::none(), clamp_events);
}

static double solver_integrand(double s, const TruncationPolicy& policy, long* clamp_events) {
  if (policy.level && s > *policy.level) {
    const double n = *policy.level;
    return clamped_exp(-n, clamp_events) * (1.0 + n - s);
  }
  return clamped_exp(-s, clamp_events);
}

double solver_energy_from_density(const Grid& g, std::span<const double> mu,
                                  const TruncationPolicy& policy, long* clamp_events) {
  double s = 0.0, c = 0.0;
  for (double m : mu) {
    double y = solver_integrand(m, policy, clamp_events) - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return g.cell_volume * s;
}

double solver_energy(const Field& u, const TruncationPolicy& policy, long* clamp_events) {
  const Field lap = neumann_laplacian(u);
  return solver_energy_from_density(u.grid, lap.values, policy, clamp_events);
}

bool within_measure_ball(const Field& u, double c_star) {
  return measure_norms(neumann_laplacian(u)).total <= c_star;
}

// 1/2 |f|_h^2 in scaled form; clamped exponentials can drive the square past
// double range, in which case the value saturates at DBL_MAX with a counted
// clamp event rather than overflowing to inf
static double half_norm_sq_saturating(const Field& f, long* clamp_events) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::fabs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0, c = 0.0;
  for (double x : f.values) {
    const double r = x / m;
    double y = r * r - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  const double acc = 0.5 * f.grid.cell_volume * s;
  if (2.0 * std::log(m) + std::log(acc) > 700.0) {
    if (clamp_events) ++*clamp_events;
    return std::numeric_limits<double>::max();
  }
  return acc * m * m;
}

double dissipation_energy(const Field& u, const TruncationPolicy& policy, long* clamp_events) {
  Field w = neumann_laplacian(u);
  for (double& s : w.values) s = flux_potential(s, policy, clamp_events);
  w.mean_zero = false;
  const Field lw = neumann_laplacian(w);
  return half_norm_sq_saturating(lw, clamp_events);
}

double metric_slope(const Field& u, const TruncationPolicy& policy, long* clamp_events) {
  return std::sqrt(2.0 * dissipation_energy(u, policy, clamp_events));
}

// y*mu - f*(y) with f*(y) = y - y ln(-y); the y ln(-y) -> 0 limit handles the
// right endpoint.
static double conjugate_gap(double y, double mu) {
  if (y == 0.0) return 0.0;
  return y * mu - y + y * std::log(-y);
}

static double golden_max(double mu) {
  constexpr double inv_phi = 0.6180339887498949;
  double lo = -1.0, hi = 0.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = conjugate_gap(a, mu);
  double fb = conjugate_gap(b, mu);
  for (int it = 0; it < 96; ++it) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = conjugate_gap(a, mu);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = conjugate_gap(b, mu);
    }
  }
  return std::max({fa, fb, conjugate_gap(-1.0, mu), 0.0});
}

double conjugate_dual_energy(const Field& mu) {
  double s = 0.0, c = 0.0;
  for (double m : mu.values) {
    double y = golden_max(m) - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return mu.grid.cell_volume * s;
}

bool truncation_l2_bound_holds(const Field& mu, double level, double energy_bound) {
  double s = 0.0, c = 0.0;
  for (double m : mu.values) {
    const double capped = std::min(m, level);
    double y = capped * capped - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  const double lhs = mu.grid.cell_volume * s;
  const double rhs = 4.0 * std::exp(level) * energy_bound +
                     2.0 * mu.grid.volume() * level * level;
  return lhs <= rhs;
}

EnergyReport evaluate_energy(const Field& u, const TruncationPolicy& policy) {
  EnergyReport r;
  const Field lap = neumann_laplacian(u);
  const MeasureNorms m = measure_norms(lap);
  r.measure_total = m.total;
  r.measure_pos = m.pos;
  r.measure_neg = m.neg;

  double max_lap = -std::numeric_limits<double>::infinity();
  double min_lap = std::numeric_limits<double>::infinity();
  for (double s : lap.values) {
    max_lap = std::max(max_lap, s);
    min_lap = std::min(min_lap, s);
  }
  r.max_pos_laplacian = std::max(max_lap, 0.0);
  r.min_laplacian = min_lap;

  if (policy.level) {
    double s = 0.0, c = 0.0;
    for (double v : lap.values) {
      double e = std::max(v - *policy.level, 0.0);
      double y = e - c;
      double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    r.excess_mass = u.grid.cell_volume * s;
  }

  r.phi = energy_from_density(u.grid, lap.values, policy, &r.clamp_events);
  r.phi_raw = energy_from_density(u.grid, lap.values, TruncationPolicy::none(), &r.clamp_events);
  r.free_energy_F = r.phi_raw;

  Field w = lap;
  for (double& s : w.values) s = flux_potential(s, policy, &r.clamp_events);
  w.mean_zero = false;
  const Field lw = neumann_laplacian(w);
  r.dissipation_E = half_norm_sq_saturating(lw, &r.clamp_events);
  r.slope = std::sqrt(2.0 * r.dissipation_E);
  return r;
}

double default_truncation_level(const Field& u0) {
  const Field lap = neumann_laplacian(u0);
  double max_lap = 0.0;
  for (double s : lap.values) max_lap = std::max(max_lap, s);
  return 10.0 * std::max(1.0, max_lap);
}

}  // namespace tfe
