#include "tgc/state.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <utility>

#include "tgc/errors.hpp"

namespace tgc {

void ModelParams::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("model: alpha must be > 0 (A4)");
  if (!(beta > 0.0)) throw ValidationError("model: beta must be > 0 (A4)");
  if (!(chi > 0.0)) throw ValidationError("model: chi must be > 0 (A4)");
  if (P < 0.0 || A < 0.0 || B < 0.0 || D < 0.0 || sigma_s < 0.0)
    throw ValidationError("model: P, A, B, D, sigma_s must be >= 0 (A4)");
}

void TimeGrid::validate() const {
  if (!(T > 0.0)) throw ValidationError("time: T must be > 0");
  if (steps < 1) throw ValidationError("time: steps must be >= 1");
}

ControlField ControlField::constant(const Domain& domain, int steps, double u_value,
                                    double w_value) {
  ControlField c;
  c.u.assign(steps, Field(domain, u_value));
  c.w.assign(steps, Field(domain, w_value));
  return c;
}

void ControlField::check_shape(const Domain& domain, int steps) const {
  if (static_cast<int>(u.size()) != steps || static_cast<int>(w.size()) != steps)
    throw ShapeMismatch("controls cover " + std::to_string(u.size()) + " steps, want " +
                        std::to_string(steps));
  for (const Field& f : u)
    if (!(f.domain() == domain)) throw DomainMismatch("control u");
  for (const Field& f : w)
    if (!(f.domain() == domain)) throw DomainMismatch("control w");
}

std::shared_ptr<SparseLUSolver> StepRecord::factorization() const {
  if (lu) return lu;
  auto fresh = std::make_shared<SparseLUSolver>();
  fresh->compute(jacobian);
  if (fresh->info() != Eigen::Success)
    throw std::runtime_error("stored Jacobian factorization failed");
  return fresh;
}

namespace {

std::uint64_t next_trajectory_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

Vector stack(const StateSnapshot& s) {
  const auto m = s.mu.size();
  Vector x(3 * m);
  x.segment(0, m) = s.mu.values();
  x.segment(m, m) = s.phi.values();
  x.segment(2 * m, m) = s.sigma.values();
  return x;
}

StateSnapshot unstack(const Domain& domain, const Vector& x) {
  const auto m = domain.cell_count();
  StateSnapshot s{Field(domain), Field(domain), Field(domain)};
  s.mu.values() = x.segment(0, m);
  s.phi.values() = x.segment(m, m);
  s.sigma.values() = x.segment(2 * m, m);
  return s;
}

// Residual of the implicit step on stacked vectors. phi entries of `x` must
// be interior for singular variants (the Newton guard maintains this).
Vector stacked_residual(const Vector& xprev, const Vector& x, const Field& u, const Field& w,
                        const StepContext& ctx) {
  const auto m = u.size();
  const ModelParams& pr = ctx.params;
  const double tau = ctx.tau;
  const SpMat& L = ctx.laplacian.matrix;

  const auto mu_p = xprev.segment(0, m), phi_p = xprev.segment(m, m),
             sig_p = xprev.segment(2 * m, m);
  const auto mu = x.segment(0, m), phi = x.segment(m, m), sig = x.segment(2 * m, m);

  Vector hphi(m), fprime(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    hphi[i] = h_eval(ctx.h, phi[i], 0);
    fprime[i] = potential_eval(ctx.potential, phi[i], 1);
  }

  const Vector Lmu = L * mu;
  const Vector Lphi = L * phi;
  const Vector Lsig = L * sig;

  Vector r(3 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double source = (pr.P * sig[i] - pr.A - u[i]) * hphi[i];
    r[i] = pr.alpha * (mu[i] - mu_p[i]) / tau + (phi[i] - phi_p[i]) / tau - Lmu[i] - source;
    r[m + i] = pr.beta * (phi[i] - phi_p[i]) / tau - Lphi[i] + fprime[i] - pr.chi * sig[i] - mu[i];
    r[2 * m + i] = (sig[i] - sig_p[i]) / tau - Lsig[i] + pr.chi * Lphi[i] -
                   pr.B * (pr.sigma_s - sig[i]) + pr.D * sig[i] * hphi[i] - w[i];
  }
  return r;
}

// Jacobian of the stacked residual with respect to the new state.
SpMat stacked_jacobian(const Vector& x, const Field& u, const StepContext& ctx) {
  const auto m = u.size();
  const ModelParams& pr = ctx.params;
  const double tau = ctx.tau;
  const SpMat& L = ctx.laplacian.matrix;

  const auto phi = x.segment(m, m), sig = x.segment(2 * m, m);

  Vector hphi(m), hp(m), fpp(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    hphi[i] = h_eval(ctx.h, phi[i], 0);
    hp[i] = h_eval(ctx.h, phi[i], 1);
    fpp[i] = potential_eval(ctx.potential, phi[i], 2);
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(4 * L.nonZeros() + 7 * m));

  // Laplacian blocks: -L on (mu,mu), (phi,phi), (sigma,sigma); +chi*L on
  // (sigma,phi).
  for (int col = 0; col < L.outerSize(); ++col) {
    for (SpMat::InnerIterator it(L, col); it; ++it) {
      const auto r = it.row();
      const auto c = it.col();
      const double v = it.value();
      trip.emplace_back(r, c, -v);
      trip.emplace_back(m + r, m + c, -v);
      trip.emplace_back(2 * m + r, 2 * m + c, -v);
      trip.emplace_back(2 * m + r, m + c, pr.chi * v);
    }
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    trip.emplace_back(i, i, pr.alpha / tau);
    trip.emplace_back(i, m + i, 1.0 / tau - (pr.P * sig[i] - pr.A - u[i]) * hp[i]);
    trip.emplace_back(i, 2 * m + i, -pr.P * hphi[i]);
    trip.emplace_back(m + i, i, -1.0);
    trip.emplace_back(m + i, m + i, pr.beta / tau + fpp[i]);
    trip.emplace_back(m + i, 2 * m + i, -pr.chi);
    trip.emplace_back(2 * m + i, m + i, pr.D * sig[i] * hp[i]);
    trip.emplace_back(2 * m + i, 2 * m + i, 1.0 / tau + pr.B + pr.D * hphi[i]);
  }

  SpMat jac(3 * m, 3 * m);
  jac.setFromTriplets(trip.begin(), trip.end());
  jac.makeCompressed();
  return jac;
}

// First cell whose phi value breaks the separation guard, or -1.
std::int64_t separation_offender(const Vector& x, Eigen::Index m, double lo, double hi) {
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = x[m + i];
    if (!(v > lo && v < hi)) return i;
  }
  return -1;
}

}  // namespace

std::array<Field, 3> state_residual(const StateSnapshot& prev, const StateSnapshot& next,
                                    const Field& u, const Field& w, const StepContext& ctx) {
  if (!(prev.mu.domain() == next.mu.domain()) || !(prev.mu.domain() == u.domain()))
    throw DomainMismatch("state_residual inputs");
  const Vector r = stacked_residual(stack(prev), stack(next), u, w, ctx);
  const Domain& domain = prev.mu.domain();
  const auto m = domain.cell_count();
  std::array<Field, 3> out{Field(domain), Field(domain), Field(domain)};
  out[0].values() = r.segment(0, m);
  out[1].values() = r.segment(m, m);
  out[2].values() = r.segment(2 * m, m);
  return out;
}

std::pair<StateSnapshot, StepRecord> step_state(const StateSnapshot& prev, const Field& u,
                                                const Field& w, const StepContext& ctx) {
  const Domain& domain = prev.mu.domain();
  const auto m = domain.cell_count();
  const bool singular = ctx.potential.singular();
  const double guard_lo = ctx.potential.r_minus() + ctx.opts.separation_margin;
  const double guard_hi = ctx.potential.r_plus() - ctx.opts.separation_margin;

  const Vector xprev = stack(prev);
  Vector x = xprev;  // warm start
  Vector r = stacked_residual(xprev, x, u, w, ctx);
  double rnorm = r.norm();
  const double scale = std::max(1.0, rnorm);
  int evals = 1;
  int updates = 0;

  while (rnorm > ctx.opts.newton_tol * scale) {
    if (updates >= ctx.opts.newton_max_iters)
      throw NewtonDivergence(ctx.step_index, updates, rnorm / scale);

    SparseLUSolver lu;
    lu.compute(stacked_jacobian(x, u, ctx));
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("step " + std::to_string(ctx.step_index) +
                               ": Jacobian factorization failed");
    const Vector delta = lu.solve(-r);

    // Damped update: halve on residual increase (bounded) and pull back as
    // far as needed to keep phi strictly inside the effective domain.
    double s = 1.0;
    int halvings = 0;
    int guard_halvings = 0;
    Vector xc, rc;
    double rcnorm = 0.0;
    while (true) {
      xc = x + s * delta;
      if (singular) {
        const std::int64_t bad = separation_offender(xc, m, guard_lo, guard_hi);
        if (bad >= 0) {
          if (++guard_halvings > 60)
            throw SeparationViolation(ctx.step_index, bad, xc[m + bad]);
          s *= 0.5;
          continue;
        }
      }
      rc = stacked_residual(xprev, xc, u, w, ctx);
      ++evals;
      rcnorm = rc.norm();
      if (rcnorm < rnorm || halvings >= ctx.opts.damping_max_halvings) break;
      ++halvings;
      s *= 0.5;
    }
    x = std::move(xc);
    r = std::move(rc);
    rnorm = rcnorm;
    ++updates;
  }

  StepRecord record;
  record.newton_iters = evals;
  record.residual_norm = rnorm;
  // Jacobian at the converged state: this is what the tangent and adjoint
  // steppers differentiate through.
  record.jacobian = stacked_jacobian(x, u, ctx);
  if (ctx.opts.store_factorizations) {
    record.lu = std::make_shared<SparseLUSolver>();
    record.lu->compute(record.jacobian);
    if (record.lu->info() != Eigen::Success)
      throw std::runtime_error("step " + std::to_string(ctx.step_index) +
                               ": converged-state factorization failed");
  }
  record.h_phi = Field(domain);
  for (Eigen::Index i = 0; i < m; ++i) record.h_phi[i] = h_eval(ctx.h, x[m + i], 0);

  return {unstack(domain, x), std::move(record)};
}

namespace {

void append_level_monitors(Monitors& mon, const StateSnapshot& s) {
  mon.min_phi.push_back(s.phi.min());
  mon.max_phi.push_back(s.phi.max());
  mon.mass_mu.push_back(integrate(s.mu));
  mon.mass_phi.push_back(integrate(s.phi));
  mon.mass_sigma.push_back(integrate(s.sigma));
  mon.norm2_phi.push_back(inner_product(s.phi, s.phi));
  mon.norm2_sigma.push_back(inner_product(s.sigma, s.sigma));
}

}  // namespace

std::pair<double, double> mass_identity_residual_pair(const StateSnapshot& prev,
                                                      const StateSnapshot& next, const Field& u,
                                                      const Field& w, const ModelParams& pr,
                                                      const ProliferationH& h, double tau) {
  const Domain& domain = prev.mu.domain();
  const auto m = domain.cell_count();

  double combined = 0.0, combined_scale = 1.0;
  double sigma = 0.0, sigma_scale = 1.0;
  Field term(domain), abs_term(domain);

  Field hphi(domain);
  for (Eigen::Index i = 0; i < m; ++i) hphi[i] = h_eval(h, next.phi[i], 0);

  for (Eigen::Index i = 0; i < m; ++i) {
    const double dt_mass = pr.alpha * (next.mu[i] - prev.mu[i]) / tau +
                           (next.phi[i] - prev.phi[i]) / tau;
    const double src = (pr.P * next.sigma[i] - pr.A - u[i]) * hphi[i];
    term[i] = dt_mass - src;
    abs_term[i] = std::abs(dt_mass) + std::abs(src);
  }
  combined = std::abs(integrate(term));
  combined_scale += integrate(abs_term);

  for (Eigen::Index i = 0; i < m; ++i) {
    const double dt_sigma = (next.sigma[i] - prev.sigma[i]) / tau;
    const double rhs = pr.B * (pr.sigma_s - next.sigma[i]) - pr.D * next.sigma[i] * hphi[i] + w[i];
    term[i] = dt_sigma - rhs;
    abs_term[i] = std::abs(dt_sigma) + std::abs(rhs);
  }
  sigma = std::abs(integrate(term));
  sigma_scale += integrate(abs_term);

  return {combined / combined_scale, sigma / sigma_scale};
}

StateTrajectory::StateTrajectory(Domain domain, TimeGrid grid, ModelParams params,
                                 PotentialSpec potential)
    : id_(next_trajectory_id()),
      domain_(std::move(domain)),
      grid_(grid),
      params_(params),
      potential_(potential) {}

StateTrajectory solve_state(const ModelParams& params, const PotentialSpec& potential,
                            const ProliferationH& h, const ControlField& controls,
                            const StateSnapshot& initial, const TimeGrid& grid,
                            const SolverOptions& opts) {
  params.validate();
  grid.validate();
  const Domain& domain = initial.mu.domain();
  if (!(initial.phi.domain() == domain) || !(initial.sigma.domain() == domain))
    throw DomainMismatch("initial snapshot fields");
  if (!initial.mu.all_finite() || !initial.phi.all_finite() || !initial.sigma.all_finite())
    throw InvalidArgument("initial data contain non-finite values");
  controls.check_shape(domain, grid.steps);

  if (potential.singular()) {
    const double lo = initial.phi.min(), hi = initial.phi.max();
    if (!(lo > potential.r_minus() && hi < potential.r_plus()))
      throw InvalidArgument("initial phi violates interiority: range [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "] not inside the effective domain (A2)");
  }

  const SparseOperator laplacian = assemble_neumann_laplacian(domain);
  const double tau = grid.tau();

  StateTrajectory traj(domain, grid, params, potential);
  traj.snapshots().reserve(grid.steps + 1);
  traj.snapshots().push_back(initial);
  append_level_monitors(traj.monitors(), initial);

  for (int n = 1; n <= grid.steps; ++n) {
    const StepContext ctx{params, potential, h, laplacian, tau, opts, n};
    const Field& u = controls.u[n - 1];
    const Field& w = controls.w[n - 1];
    auto [next, record] = step_state(traj.snapshots().back(), u, w, ctx);

    const auto [rel_combined, rel_sigma] =
        mass_identity_residual_pair(traj.snapshots().back(), next, u, w, params, h, tau);
    Monitors& mon = traj.monitors();
    mon.mass_residual_combined.push_back(rel_combined);
    mon.mass_residual_sigma.push_back(rel_sigma);
    mon.newton_iters.push_back(record.newton_iters);
    mon.newton_residual.push_back(record.residual_norm);

    traj.records().push_back(std::move(record));
    traj.snapshots().push_back(std::move(next));
    append_level_monitors(mon, traj.snapshots().back());
  }
  return traj;
}

}  // namespace tgc
