#include "doctest.h"
#include "support.hpp"
#include "tfe/flow.hpp"

using namespace tfe;
using namespace tfe::test;

namespace {

FlowConfig basic_cfg(double t_final, int n_steps) {
  FlowConfig cfg;
  cfg.t_final = t_final;
  cfg.n_steps = n_steps;
  return cfg;
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("flat initial data stays flat") {
  Grid g = build_grid(1, 32, 1.0);
  Field u0(g);
  FlowTrace tr = evolve(u0, basic_cfg(0.1, 20));
  CHECK(tr.completed_ok());
  CHECK(tr.steps_completed() == 20);
  for (const EnergyReport& r : tr.reports) {
    CHECK(r.phi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.dissipation_E <= 1e-28);
  }
  for (const Field& s : tr.states) CHECK(norm_h(s) <= 1e-12);
  for (size_t k = 1; k < tr.times.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
}

// eps cosine with lambda^2 t_final = 1 decays to eps/e within 2 percent
TEST_CASE("linearized decay of a single mode") {
  Grid g = build_grid(1, 64, 1.0);
  const double eps = 1e-3;
  Field u0 = cosine_mode(g, 1, eps);
  const double lambda = -(2.0 / (g.h * g.h)) * (1.0 - std::cos(M_PI * g.h));
  const double t_final = 1.0 / (lambda * lambda);

  FlowTrace tr = evolve(u0, basic_cfg(t_final, 64));
  CHECK(tr.completed_ok());
  const Field mode = cosine_mode(g, 1, 1.0);
  const double amp = inner(tr.states.back(), mode) / inner(mode, mode);
  CHECK(rel_diff(amp, eps * std::exp(-1.0)) < 2e-2);
}

// cross-check the whole loop against the dense eigen-decomposition flow of
// the linearized equation at n = 16
TEST_CASE("dense matrix-exponential oracle at n = 16") {
  Grid g = build_grid(1, 16, 1.0);
  const double eps = 1e-4;
  Field u0 = random_smooth_field(g, eps, 3, 15);
  const double lambda1 = -(2.0 / (g.h * g.h)) * (1.0 - std::cos(M_PI * g.h));
  const double t_final = 0.5 / (lambda1 * lambda1);

  FlowTrace tr = evolve(u0, basic_cfg(t_final, 100));
  CHECK(tr.completed_ok());

  const Matrix lap = dense_neumann_matrix(g);
  const std::vector<double> ref = dense_biharmonic_flow(lap, t_final, u0.values);
  Field fref = mean_zero_project(field_from(g, ref));

  const Field diff = lin_comb(1.0, tr.states.back(), -1.0, fref);
  CHECK(norm_h(diff) <= 2e-2 * norm_h(u0));
}

TEST_CASE("trace invariants on a smooth run") {
  Grid g = build_grid(1, 64, 1.0);
  InitialConditionPreset p;
  p.name = "gaussian_bump";
  p.amplitude = 5e-3;
  p.width = 0.08;
  Field u0 = make_initial_condition(g, p);

  FlowTrace tr = evolve(u0, basic_cfg(0.01, 100));
  CHECK(tr.completed_ok());

  const double slope0 = tr.reports[0].slope;
  for (int k = 1; k <= tr.steps_completed(); ++k) {
    const double d = tr.displacements[static_cast<size_t>(k)];
    // minimizer beats the previous point in the step objective
    CHECK(tr.reports[static_cast<size_t>(k)].phi + d * d / (2.0 * tr.tau) <=
          tr.reports[static_cast<size_t>(k - 1)].phi + 10.0 * tr.grad_tol_abs);
    CHECK(tr.ut_norms[static_cast<size_t>(k)] <= slope0 * (1.0 + 1e-6));
    CHECK(tr.pde_residuals[static_cast<size_t>(k)] <= tr.grad_tol_abs / tr.tau);
    // mean conservation
    double sq = 0.0;
    for (double x : tr.states[static_cast<size_t>(k)].values) sq += x * x;
    CHECK(std::fabs(kahan_sum(tr.states[static_cast<size_t>(k)].values)) <=
          1e-12 * std::sqrt(sq));
  }
  // u_t norms nonincreasing (resolvent nonexpansiveness along the path)
  for (int k = 2; k <= tr.steps_completed(); ++k)
    CHECK(tr.ut_norms[static_cast<size_t>(k)] <=
          tr.ut_norms[static_cast<size_t>(k - 1)] * (1.0 + 1e-6) + 1e-18);
}

TEST_CASE("convergence study on the flat state is exact") {
  Grid g = build_grid(1, 32, 1.0);
  Field u0(g);
  const int steps[] = {4, 8, 16};
  ProxOptions prox;
  auto rows = convergence_study(u0, 0.1, steps, prox);
  REQUIRE(rows.size() == 3);
  for (const ConvergenceRow& r : rows) {
    CHECK(r.error <= 1e-13);
    CHECK(r.bound_rhs <= 1e-13);
  }
}

TEST_CASE("convergence study: first order against the fine reference") {
  Grid g = build_grid(1, 64, 1.0);
  Field u0 = cosine_mode(g, 1, 1e-3);
  const int steps[] = {8, 16, 32};
  ProxOptions prox;
  auto rows = convergence_study(u0, 0.01, steps, prox);
  REQUIRE(rows.size() == 3);
  for (const ConvergenceRow& r : rows) CHECK(r.error <= r.bound_rhs);
  CHECK(rows[1].observed_order >= 0.9);
  CHECK(rows[2].observed_order >= 0.9);
  CHECK(std::isnan(rows[0].observed_order));
  // errors genuinely shrink
  CHECK(rows[2].error < rows[0].error);
}

TEST_CASE("convergence study rejects non-increasing step lists") {
  Grid g = build_grid(1, 32, 1.0);
  Field u0(g);
  const int steps[] = {8, 8};
  ProxOptions prox;
  CHECK_THROWS_AS(convergence_study(u0, 0.1, steps, prox), std::invalid_argument);
}

TEST_CASE("two flows: identical starters never separate") {
  Grid g = build_grid(1, 32, 1.0);
  Field u0 = random_smooth_field(g, 1e-2, 4, 61);
  TwoFlowResult r = two_flow_run(u0, u0, basic_cfg(0.005, 20));
  for (double d : r.distances) CHECK(d <= 1e-12);
}

TEST_CASE("two flows: distances contract") {
  Grid g = build_grid(1, 64, 1.0);
  Field u0 = random_smooth_field(g, 1e-2, 4, 62);
  Field v0 = random_smooth_field(g, 1e-2, 4, 63);
  TwoFlowResult r = two_flow_run(u0, v0, basic_cfg(0.01, 50));
  REQUIRE(r.distances.size() == 51);
  const double d0 = r.distances[0];
  for (size_t k = 1; k < r.distances.size(); ++k) {
    CHECK(r.distances[k] <= r.distances[k - 1] + 1e-10 * d0);
    CHECK(r.distances[k] <= d0 * (1.0 + 1e-10));
  }
}

// odd-symmetric initial data: the mirrored flow stays the mirror image by
// stencil symmetry, so d_k tracks 2|u_k| up to the even-mode contamination
// the nonlinearity generates at O(eps^2)
TEST_CASE("two flows: mirror pair at n = 16") {
  Grid g = build_grid(1, 16, 1.0);
  const double eps = 1e-3;
  Field u0 = cosine_mode(g, 1, eps);  // odd about the domain center
  Field v0 = lin_comb(-1.0, u0, 0.0, u0);
  const double lambda = -(2.0 / (g.h * g.h)) * (1.0 - std::cos(M_PI * g.h));
  TwoFlowResult r = two_flow_run(u0, v0, basic_cfg(0.2 / (lambda * lambda), 20));
  for (size_t k = 0; k < r.distances.size(); ++k) {
    const double expect = 2.0 * norm_h(r.a.states[k]);
    CHECK(rel_diff(r.distances[k], expect) < 1e-4);
  }
}

TEST_CASE("cone data in truncated mode grows singular excess and survives") {
  Grid g = build_grid(1, 32, 1.0);
  InitialConditionPreset p;
  p.name = "cone";
  p.center = {0.5};
  p.slope = 0.05;
  Field u0 = make_initial_condition(g, p);

  FlowConfig cfg = basic_cfg(2e-6, 20);  // tau under the tip-rounding timescale
  cfg.prox.policy = TruncationPolicy::capped(0.8);  // below the tip spike
  FlowTrace tr = evolve(u0, cfg);
  CHECK(tr.completed_ok());
  CHECK(tr.reports[0].excess_mass > 0.0);
  CHECK(tr.reports[1].excess_mass > 0.0);  // persists through the dynamics
  for (const EnergyReport& r : tr.reports)
    CHECK(r.phi <= tr.reports[0].phi + 10.0 * tr.grad_tol_abs * tr.steps_completed());
}

TEST_CASE("evolve validates its inputs") {
  Grid g = build_grid(1, 32, 1.0);
  Field u0(g);
  CHECK_THROWS_AS(evolve(u0, basic_cfg(-1.0, 10)), std::invalid_argument);
  CHECK_THROWS_AS(evolve(u0, basic_cfg(1.0, 0)), std::invalid_argument);

  FlowConfig tight = basic_cfg(0.1, 10);
  tight.c_star = 1e-12;  // ball smaller than the data
  Field bumpy = random_smooth_field(g, 1e-2, 4, 71);
  CHECK_THROWS_AS(evolve(bumpy, tight), std::invalid_argument);
}

TEST_CASE("nonconvergence propagates with the partial trace") {
  Grid g = build_grid(1, 64, 1.0);
  Field u0 = random_smooth_field(g, 5e-3, 4, 72);
  FlowConfig cfg = basic_cfg(5.0, 10);  // tau = 0.5, several Newton steps needed
  cfg.prox.max_newton = 1;
  FlowTrace tr = evolve(u0, cfg);
  CHECK(tr.flags.nonconvergence);
  CHECK(tr.flags.failed_step == 1);
  CHECK(tr.steps_completed() == 1);  // partial trace includes the failed step
}

}  // TEST_SUITE
