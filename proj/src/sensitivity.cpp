#include "tgc/sensitivity.hpp"

#include <cmath>

#include "tgc/errors.hpp"
#include "tgc/rng.hpp"

namespace tgc {

Direction Direction::zero(const Domain& domain, int steps) {
  Direction d;
  d.k.assign(steps, Field(domain));
  d.l.assign(steps, Field(domain));
  return d;
}

namespace {

// M collects the previous-state couplings of one implicit step (all constant
// diagonals): rows (mu, phi, sigma) receive (alpha/tau * a + b/tau,
// beta/tau * b, c/tau) from the previous stacked vector (a, b, c).
Vector apply_M(const ModelParams& pr, double tau, const Vector& x) {
  const auto m = x.size() / 3;
  Vector y(3 * m);
  y.segment(0, m) = (pr.alpha * x.segment(0, m) + x.segment(m, m)) / tau;
  y.segment(m, m) = pr.beta / tau * x.segment(m, m);
  y.segment(2 * m, m) = x.segment(2 * m, m) / tau;
  return y;
}

Vector apply_M_transpose(const ModelParams& pr, double tau, const Vector& x) {
  const auto m = x.size() / 3;
  Vector y(3 * m);
  y.segment(0, m) = pr.alpha / tau * x.segment(0, m);
  y.segment(m, m) = (x.segment(0, m) + pr.beta * x.segment(m, m)) / tau;
  y.segment(2 * m, m) = x.segment(2 * m, m) / tau;
  return y;
}

void check_direction(const StateTrajectory& traj, const Direction& d) {
  if (!traj.has_records()) throw MissingJacobians();
  if (d.steps() != traj.time_grid().steps)
    throw ShapeMismatch("direction covers " + std::to_string(d.steps()) + " steps, want " +
                        std::to_string(traj.time_grid().steps));
  for (const Field& f : d.k)
    if (!(f.domain() == traj.domain())) throw DomainMismatch("direction k");
  for (const Field& f : d.l)
    if (!(f.domain() == traj.domain())) throw DomainMismatch("direction l");
}

}  // namespace

LinTrajectory solve_linearized(const StateTrajectory& traj, const ModelParams& params,
                               const Direction& direction) {
  check_direction(traj, direction);
  const Domain& domain = traj.domain();
  const auto m = domain.cell_count();
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();

  LinTrajectory lin;
  lin.trajectory_id = traj.id();
  lin.levels.reserve(N + 1);
  lin.levels.push_back({Field(domain), Field(domain), Field(domain)});

  Vector delta = Vector::Zero(3 * m);
  for (int n = 1; n <= N; ++n) {
    const StepRecord& rec = traj.record(n);
    Vector rhs = apply_M(params, tau, delta);
    // Control injection S (k, l): -h(phi_n) k into the mu-equation row,
    // +l into the sigma-equation row.
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs[i] -= rec.h_phi[i] * direction.k[n - 1][i];
      rhs[2 * m + i] += direction.l[n - 1][i];
    }
    delta = rec.factorization()->solve(rhs);

    LinSnapshot snap{Field(domain), Field(domain), Field(domain)};
    snap.eta.values() = delta.segment(0, m);
    snap.xi.values() = delta.segment(m, m);
    snap.zeta.values() = delta.segment(2 * m, m);
    lin.levels.push_back(std::move(snap));
  }
  return lin;
}

PlainControlGradient adjoint_sweep(const StateTrajectory& traj, const ModelParams& params,
                                   const std::vector<Vector>& sources,
                                   std::vector<Vector>* lambdas_out) {
  if (!traj.has_records()) throw MissingJacobians();
  const int N = traj.time_grid().steps;
  if (static_cast<int>(sources.size()) != N)
    throw ShapeMismatch("adjoint sources cover " + std::to_string(sources.size()) +
                        " levels, want " + std::to_string(N));
  const auto m = traj.domain().cell_count();
  const double tau = traj.time_grid().tau();

  PlainControlGradient grad;
  grad.du.assign(N, Vector::Zero(m));
  grad.dw.assign(N, Vector::Zero(m));
  if (lambdas_out) lambdas_out->assign(N, Vector::Zero(3 * m));

  Vector lambda_next = Vector::Zero(3 * m);
  for (int n = N; n >= 1; --n) {
    const StepRecord& rec = traj.record(n);
    Vector rhs = apply_M_transpose(params, tau, lambda_next);
    rhs -= sources[n - 1];
    Vector lambda = rec.factorization()->transpose().solve(rhs);

    // dG/dc_n = -S_n^T lambda_n: the mu-row injection was -h(phi) k, the
    // sigma-row injection +l.
    for (Eigen::Index i = 0; i < m; ++i) {
      grad.du[n - 1][i] = rec.h_phi[i] * lambda[i];
      grad.dw[n - 1][i] = -lambda[2 * m + i];
    }
    if (lambdas_out) (*lambdas_out)[n - 1] = lambda;
    lambda_next = std::move(lambda);
  }
  return grad;
}

AdjTrajectory solve_adjoint(const StateTrajectory& traj, const ModelParams& params,
                            const CostSpec& cost) {
  const Domain& domain = traj.domain();
  const auto m = domain.cell_count();
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  const double weight = tau * domain.cell_volume();

  const CostGradientSources sources = adjoint_source(traj, cost);
  std::vector<Vector> lambdas;
  adjoint_sweep(traj, params, sources.per_level, &lambdas);

  AdjTrajectory adj;
  adj.trajectory_id = traj.id();
  adj.levels.assign(N + 1, AdjSnapshot{Field(domain), Field(domain), Field(domain)});

  // Step-n multiplier, rescaled to the paper variables, lives at level n-1.
  for (int n = 1; n <= N; ++n) {
    AdjSnapshot& snap = adj.levels[n - 1];
    const Vector& lambda = lambdas[n - 1];
    for (Eigen::Index i = 0; i < m; ++i) {
      snap.q[i] = -lambda[i] / weight;
      snap.p[i] = -lambda[m + i] / weight;
      snap.r[i] = -lambda[2 * m + i] / weight;
    }
  }

  // Terminal data close the march: q(T) = 0, beta p(T) = gamma1 (phi_N -
  // phi_Omega), r(T) = gamma3 (sigma_N - sigma_Omega).
  AdjSnapshot& terminal = adj.levels[N];
  terminal.p = sources.terminal_phi;
  terminal.p.scale(1.0 / params.beta);
  terminal.r = sources.terminal_sigma;
  return adj;
}

double duality_gap(const StateTrajectory& traj, const ModelParams& params,
                   const Direction& direction, std::uint64_t adjoint_source_seed) {
  check_direction(traj, direction);
  const auto m = traj.domain().cell_count();
  const int N = traj.time_grid().steps;

  Rng rng(adjoint_source_seed);
  std::vector<Vector> g(N);
  for (int n = 0; n < N; ++n) {
    g[n].resize(3 * m);
    for (Eigen::Index i = 0; i < 3 * m; ++i) g[n][i] = rng.symmetric(1.0);
  }

  const LinTrajectory lin = solve_linearized(traj, params, direction);
  double forward_pairing = 0.0;
  for (int n = 1; n <= N; ++n) {
    const LinSnapshot& s = lin.levels[n];
    forward_pairing += g[n - 1].segment(0, m).dot(s.eta.values());
    forward_pairing += g[n - 1].segment(m, m).dot(s.xi.values());
    forward_pairing += g[n - 1].segment(2 * m, m).dot(s.zeta.values());
  }

  const PlainControlGradient grad = adjoint_sweep(traj, params, g);
  double adjoint_pairing = 0.0;
  for (int n = 0; n < N; ++n) {
    adjoint_pairing += grad.du[n].dot(direction.k[n].values());
    adjoint_pairing += grad.dw[n].dot(direction.l[n].values());
  }

  const double scale = std::max(std::abs(forward_pairing), std::abs(adjoint_pairing));
  if (scale == 0.0) return 0.0;
  return std::abs(forward_pairing - adjoint_pairing) / scale;
}

}  // namespace tgc
