#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tgc/errors.hpp"
#include "tgc/state.hpp"

using namespace tgc;

namespace {

Field cosine_field(const Domain& d, double amplitude, double offset = 0.0) {
  Field f(d);
  for (std::int64_t i = 0; i < f.size(); ++i)
    f[i] = amplitude * std::cos(std::numbers::pi * d.center(i, 0) / d.lengths[0]) + offset;
  return f;
}

StateSnapshot smooth_initial(const Domain& d) {
  return StateSnapshot{Field(d, 0.0), cosine_field(d, 0.3), Field(d, 0.5)};
}

ModelParams mild_params() {
  ModelParams p;
  p.alpha = 1.0;
  p.beta = 1.0;
  p.chi = 0.5;
  p.P = 1.0;
  p.A = 0.5;
  p.B = 1.0;
  p.D = 1.0;
  p.sigma_s = 1.0;
  return p;
}

double snapshot_distance(const StateSnapshot& a, const StateSnapshot& b) {
  return l2_distance(a.mu, b.mu) + l2_distance(a.phi, b.phi) + l2_distance(a.sigma, b.sigma);
}

}  // namespace

TEST_CASE("parameter validation") {
  ModelParams p = mild_params();
  p.alpha = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("A4"), ValidationError);
  p = mild_params();
  p.P = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("A4"), ValidationError);
  CHECK_THROWS_AS(TimeGrid{-1.0, 10}.validate(), ValidationError);
}

TEST_CASE("zero state is an exact fixed point") {
  const Domain d = build_domain(1, {1.0, 0.0}, {16, 0});
  ModelParams p;
  p.alpha = 1.0;
  p.beta = 1.0;
  p.chi = 1.0;  // P = A = B = D = sigma_s = 0
  const TimeGrid grid{1.0, 10};
  const StateSnapshot init{Field(d), Field(d), Field(d)};
  const ControlField controls = ControlField::constant(d, grid.steps, 0.0, 0.0);

  const StateTrajectory traj =
      solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);
  for (int n = 0; n <= grid.steps; ++n) {
    const StateSnapshot& s = traj.snapshot(n);
    for (std::int64_t i = 0; i < d.cell_count(); ++i) {
      CHECK(s.mu[i] == 0.0);
      CHECK(s.phi[i] == 0.0);
      CHECK(s.sigma[i] == 0.0);
    }
  }
  // Warm start satisfies the residual immediately: one evaluation, no update.
  for (int n = 1; n <= grid.steps; ++n) CHECK(traj.record(n).newton_iters == 1);
}

TEST_CASE("decoupled sigma follows the scalar recurrence") {
  const Domain d = build_domain(1, {1.0, 0.0}, {8, 0});
  ModelParams p;
  p.alpha = 1.0;
  p.beta = 1.0;
  p.chi = 1.0;
  p.B = 1.0;
  p.sigma_s = 0.4;  // P = D = A = 0
  const TimeGrid grid{1.0, 10};
  const double tau = grid.tau();
  const StateSnapshot init{Field(d, 0.0), Field(d, 0.0), Field(d, 1.0)};
  const ControlField controls = ControlField::constant(d, grid.steps, 0.0, 0.0);

  const StateTrajectory traj =
      solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);

  // Independent scalar oracle for the implicit recurrence.
  double sigma = 1.0;
  for (int n = 1; n <= grid.steps; ++n) {
    sigma = (sigma + tau * p.B * p.sigma_s) / (1.0 + tau * p.B);
    for (std::int64_t i = 0; i < d.cell_count(); ++i)
      CHECK(traj.snapshot(n).sigma[i] == doctest::Approx(sigma).epsilon(1e-12));
  }
  CHECK(traj.snapshot(1).sigma[0] == doctest::Approx(1.04 / 1.1).epsilon(1e-12));
}

TEST_CASE("converged step satisfies the residual contract") {
  const Domain d = build_domain(1, {1.0, 0.0}, {24, 0});
  const ModelParams p = mild_params();
  const PotentialSpec pot = PotentialSpec::regular();
  const ProliferationH h;
  const SparseOperator lap = assemble_neumann_laplacian(d);
  const SolverOptions opts;
  const StepContext ctx{p, pot, h, lap, 0.05, opts, 1};

  const StateSnapshot prev = smooth_initial(d);
  const Field u(d, 0.3), w(d, 0.1);
  const auto [next, record] = step_state(prev, u, w, ctx);

  const auto residual = state_residual(prev, next, u, w, ctx);
  const auto r0 = state_residual(prev, prev, u, w, ctx);
  const double scale =
      std::max(1.0, l2_norm(r0[0]) + l2_norm(r0[1]) + l2_norm(r0[2]));
  for (const Field& r : residual) CHECK(l2_norm(r) <= 1e-11 * scale);
  CHECK(record.residual_norm <= opts.newton_tol * scale * 10.0);
  CHECK(record.h_phi.all_finite());
}

TEST_CASE("single-entry jacobian probe") {
  // R_mu is linear in mu', so perturbing one cell of mu' moves the residual
  // by exactly delta * (alpha/tau - L_jj) in that row.
  const Domain d = build_domain(1, {1.0, 0.0}, {16, 0});
  const ModelParams p = mild_params();
  const PotentialSpec pot = PotentialSpec::regular();
  const ProliferationH h;
  const SparseOperator lap = assemble_neumann_laplacian(d);
  const SolverOptions opts;
  const double tau = 0.1;
  const StepContext ctx{p, pot, h, lap, tau, opts, 1};

  const StateSnapshot prev = smooth_initial(d);
  StateSnapshot next = prev;
  const Field u(d, 0.2), w(d, 0.0);

  const auto base = state_residual(prev, next, u, w, ctx);
  const double delta = 0.37;
  const std::int64_t j = 5;  // interior cell
  next.mu[j] += delta;
  const auto bumped = state_residual(prev, next, u, w, ctx);

  const double dx = d.cell_size(0);
  const double expected = delta * (p.alpha / tau + 2.0 / (dx * dx));
  CHECK(bumped[0][j] - base[0][j] == doctest::Approx(expected).epsilon(1e-12));
  // Neighbor rows move by -delta/dx^2; the phi-equation row by -delta.
  CHECK(bumped[0][j + 1] - base[0][j + 1] == doctest::Approx(-delta / (dx * dx)).epsilon(1e-12));
  CHECK(bumped[1][j] - base[1][j] == doctest::Approx(-delta).epsilon(1e-12));
}

TEST_CASE("first-order self-convergence in time") {
  const Domain d = build_domain(1, {1.0, 0.0}, {24, 0});
  const ModelParams p = mild_params();
  const StateSnapshot init = smooth_initial(d);

  auto terminal = [&](int steps) {
    const TimeGrid grid{0.25, steps};
    const ControlField controls = ControlField::constant(d, steps, 0.2, 0.1);
    const StateTrajectory traj =
        solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);
    return traj.snapshot(steps);
  };

  const StateSnapshot coarse = terminal(8);
  const StateSnapshot mid = terminal(16);
  const StateSnapshot fine = terminal(32);
  const double e1 = snapshot_distance(coarse, mid);
  const double e2 = snapshot_distance(mid, fine);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 0.9);
  CHECK(order <= 1.5);
}

TEST_CASE("logarithmic run stays separated") {
  const Domain d = build_domain(1, {1.0, 0.0}, {32, 0});
  const ModelParams p = mild_params();
  const TimeGrid grid{0.2, 20};
  const StateSnapshot init{Field(d, 0.0), cosine_field(d, 0.9), Field(d, 0.5)};
  const ControlField controls = ControlField::constant(d, grid.steps, 0.5, 0.2);

  const StateTrajectory traj =
      solve_state(p, PotentialSpec::logarithmic(2.0), ProliferationH{}, controls, init, grid);
  const Monitors& mon = traj.monitors();
  for (std::size_t n = 0; n < mon.min_phi.size(); ++n) {
    CHECK(mon.min_phi[n] > -1.0);
    CHECK(mon.max_phi[n] < 1.0);
  }
}

TEST_CASE("mass identities hold on converged runs") {
  const Domain d = build_domain(2, {1.0, 1.0}, {8, 8});
  const ModelParams p = mild_params();
  const TimeGrid grid{0.2, 10};
  StateSnapshot init{Field(d, 0.1), Field(d), Field(d, 0.6)};
  for (std::int64_t i = 0; i < d.cell_count(); ++i)
    init.phi[i] = 0.4 * std::cos(std::numbers::pi * d.center(i, 0)) *
                  std::cos(std::numbers::pi * d.center(i, 1));
  const ControlField controls = ControlField::constant(d, grid.steps, 0.3, -0.2);

  const StateTrajectory traj =
      solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);
  for (double r : traj.monitors().mass_residual_combined) CHECK(r <= 1e-10);
  for (double r : traj.monitors().mass_residual_sigma) CHECK(r <= 1e-10);
}

TEST_CASE("determinism") {
  const Domain d = build_domain(1, {1.0, 0.0}, {16, 0});
  const ModelParams p = mild_params();
  const TimeGrid grid{0.1, 5};
  const StateSnapshot init = smooth_initial(d);
  const ControlField controls = ControlField::constant(d, grid.steps, 0.4, 0.1);

  const StateTrajectory a =
      solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);
  const StateTrajectory b =
      solve_state(p, PotentialSpec::regular(), ProliferationH{}, controls, init, grid);
  for (int n = 0; n <= grid.steps; ++n)
    for (std::int64_t i = 0; i < d.cell_count(); ++i) {
      CHECK(a.snapshot(n).mu[i] == b.snapshot(n).mu[i]);
      CHECK(a.snapshot(n).phi[i] == b.snapshot(n).phi[i]);
      CHECK(a.snapshot(n).sigma[i] == b.snapshot(n).sigma[i]);
    }
}

TEST_CASE("error paths") {
  const Domain d = build_domain(1, {1.0, 0.0}, {8, 0});
  const ModelParams p = mild_params();
  const TimeGrid grid{0.1, 2};
  const ControlField controls = ControlField::constant(d, grid.steps, 0.0, 0.0);

  // Interiority check for singular potentials.
  StateSnapshot outside{Field(d), Field(d, 1.5), Field(d, 0.5)};
  CHECK_THROWS_AS(solve_state(p, PotentialSpec::logarithmic(2.0), ProliferationH{}, controls,
                              outside, grid),
                  InvalidArgument);

  // Initial phi inside (-1,1) but within the separation guard margin: the
  // first step cannot hold the guard and reports the offending cell.
  StateSnapshot hugging{Field(d), Field(d, 1.0 - 1e-12), Field(d, 0.5)};
  CHECK_THROWS_AS(solve_state(p, PotentialSpec::logarithmic(2.0), ProliferationH{}, controls,
                              hugging, grid),
                  SeparationViolation);

  // Exhausted iteration budget.
  SolverOptions strangled;
  strangled.newton_max_iters = 1;
  strangled.newton_tol = 1e-15;
  StateSnapshot init{Field(d), cosine_field(d, 0.5), Field(d, 0.5)};
  CHECK_THROWS_AS(solve_state(p, PotentialSpec::regular(), ProliferationH{},
                              ControlField::constant(d, 2, 0.5, 0.5), init, TimeGrid{1.0, 2},
                              strangled),
                  NewtonDivergence);

  // Control shape mismatch.
  CHECK_THROWS_AS(solve_state(p, PotentialSpec::regular(), ProliferationH{},
                              ControlField::constant(d, 5, 0.0, 0.0), init, grid),
                  ShapeMismatch);
}
