#pragma once

#include <optional>
#include <span>

#include "tfe/grid.hpp"

namespace tfe {

/// Exponents of the energy integrand are clamped at +-kExpClamp; every clamp
/// is counted (never silent) because a saturated exponential would quietly
/// break the convexity and duality checks downstream.
inline constexpr double kExpClamp = 500.0;

/// Cap applied to the Laplacian inside the energy, realizing min{mu, N}.
/// Mass above the cap is the discrete surrogate of a singular positive part.
struct TruncationPolicy {
  std::optional<double> level;  // nullopt = no cap

  static TruncationPolicy none() { return {}; }
  static TruncationPolicy capped(double n);

  bool truncated() const { return level.has_value(); }
};

/// exp(-min(s, N)) with the clamp guard; the flux potential whose Laplacian
/// drives the evolution.
double flux_potential(double s, const TruncationPolicy& policy, long* clamp_events);

/// Magnitude of the flux-potential derivative: exp(-min(s,N)) for s < N,
/// 0 above the cap (one-sided at the kink).
double flux_potential_slope(double s, const TruncationPolicy& policy, long* clamp_events);

/// integral of exp(-min(mu_i, N)) over the domain, for a density given
/// directly (used by the energy of a state via its Laplacian, and by tests).
double energy_from_density(const Grid& g, std::span<const double> mu,
                           const TruncationPolicy& policy, long* clamp_events = nullptr);

/// Truncated surface energy of a state: integral of exp(-min(Lap u, N)).
double surface_energy(const Field& u, const TruncationPolicy& policy,
                      long* clamp_events = nullptr);

/// Untruncated energy, integral of exp(-Lap u); also the free energy F.
double surface_energy_raw(const Field& u, long* clamp_events = nullptr);

/// The C1 convex functional the time stepper actually descends: integrand
/// exp(-s) below the cap, its tangent line exp(-N)(1+N-s) above it. Its
/// gradient is -Lap exp(-min(Lap u, N)); it coincides with surface_energy
/// whenever no cell exceeds the cap.
double solver_energy(const Field& u, const TruncationPolicy& policy,
                     long* clamp_events = nullptr);
double solver_energy_from_density(const Grid& g, std::span<const double> mu,
                                  const TruncationPolicy& policy, long* clamp_events = nullptr);

/// Indicator of the total-variation ball: true iff |Lap u|_M <= c_star.
bool within_measure_ball(const Field& u, double c_star);

/// Dissipation functional E(u) = 1/2 |Lap exp(-min(Lap u, N))|_h^2.
double dissipation_energy(const Field& u, const TruncationPolicy& policy,
                          long* clamp_events = nullptr);

/// Metric slope |d phi|(u) = sqrt(2 E(u)) = |Lap exp(-min(Lap u,N))|_h.
double metric_slope(const Field& u, const TruncationPolicy& policy,
                    long* clamp_events = nullptr);

/// Convex-conjugate (Legendre) evaluation of the untruncated energy of a
/// nonnegative density: per cell, max over y in [-1,0] of y*mu - y + y*ln(-y),
/// found by golden-section search rather than the closed-form maximizer, so
/// the result is an oracle independent of the exp-summation path.
double conjugate_dual_energy(const Field& mu);

/// Checks |min(mu,N)|_L2^2 <= 4 e^N A + 2 |Omega| N^2 for a density with
/// integral exp(-mu) <= A. A false return signals an implementation bug.
bool truncation_l2_bound_holds(const Field& mu, double level, double energy_bound);

/// All scalar functionals of one state at one instant.
struct EnergyReport {
  double phi = 0.0;            // truncated energy
  double phi_raw = 0.0;        // untruncated integral exp(-Lap u)
  double free_energy_F = 0.0;  // == phi_raw on a grid (no singular part)
  double dissipation_E = 0.0;
  double measure_total = 0.0;
  double measure_pos = 0.0;
  double measure_neg = 0.0;
  double max_pos_laplacian = 0.0;
  double min_laplacian = 0.0;  // negative-spike diagnostic, no role in phi
  double excess_mass = 0.0;    // mass of (Lap u - N)^+, zero when untruncated
  double slope = 0.0;
  long clamp_events = 0;
};

EnergyReport evaluate_energy(const Field& u, const TruncationPolicy& policy);

/// Default cap 10 * max(1, max Lap u0): far above the initial data, inert
/// until genuine concentration occurs.
double default_truncation_level(const Field& u0);

}  // namespace tfe
