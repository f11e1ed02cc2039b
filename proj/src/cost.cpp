#include "tgc/cost.hpp"

#include <cmath>
#include <string>

#include "tgc/errors.hpp"
#include "tgc/kernels.hpp"
#include "tgc/sensitivity.hpp"

namespace tgc {

void CostSpec::validate(const Domain& domain, int steps, bool require_any_positive) const {
  const double weights[] = {gamma1, gamma2, gamma3, gamma4, gamma5, gamma6};
  double total = 0.0;
  for (double g : weights) {
    if (g < 0.0) throw ValidationError("cost: weights must be >= 0 (A5)");
    total += g;
  }
  if (require_any_positive && total == 0.0)
    throw ValidationError("cost: at least one weight must be positive (A5)");

  auto check_per_step = [&](const std::vector<Field>& targets, const char* name) {
    if (static_cast<int>(targets.size()) != steps)
      throw ShapeMismatch(std::string(name) + " covers " + std::to_string(targets.size()) +
                          " steps, want " + std::to_string(steps));
    for (const Field& f : targets)
      if (!(f.domain() == domain)) throw DomainMismatch(name);
  };
  if (gamma2 > 0.0) check_per_step(phi_Q, "phi_Q");
  if (gamma4 > 0.0) check_per_step(sigma_Q, "sigma_Q");
  if (gamma1 > 0.0 && !(phi_Omega.domain() == domain)) throw DomainMismatch("phi_Omega");
  if (gamma3 > 0.0 && !(sigma_Omega.domain() == domain)) throw DomainMismatch("sigma_Omega");
}

CostSpec CostSpec::tracking(const Domain& domain, int steps, double g1, double g2, double g3,
                            double g4, double g5, double g6, double phiQ_value,
                            double sigmaQ_value, double phiOmega_value, double sigmaOmega_value) {
  CostSpec cost;
  cost.gamma1 = g1;
  cost.gamma2 = g2;
  cost.gamma3 = g3;
  cost.gamma4 = g4;
  cost.gamma5 = g5;
  cost.gamma6 = g6;
  cost.phi_Q.assign(steps, Field(domain, phiQ_value));
  cost.sigma_Q.assign(steps, Field(domain, sigmaQ_value));
  cost.phi_Omega = Field(domain, phiOmega_value);
  cost.sigma_Omega = Field(domain, sigmaOmega_value);
  return cost;
}

namespace {

double squared_l2(const Field& f) { return inner_product(f, f); }

double squared_l2_distance(const Field& f, const Field& g) {
  const double d = l2_distance(f, g);
  return d * d;
}

}  // namespace

double evaluate_cost(const StateTrajectory& traj, const ControlField& controls,
                     const CostSpec& cost) {
  const Domain& domain = traj.domain();
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  cost.validate(domain, N, false);
  controls.check_shape(domain, N);

  double J = 0.0;
  if (cost.gamma1 > 0.0)
    J += 0.5 * cost.gamma1 * squared_l2_distance(traj.snapshot(N).phi, cost.phi_Omega);
  if (cost.gamma3 > 0.0)
    J += 0.5 * cost.gamma3 * squared_l2_distance(traj.snapshot(N).sigma, cost.sigma_Omega);
  for (int n = 1; n <= N; ++n) {
    double level = 0.0;
    if (cost.gamma2 > 0.0)
      level += 0.5 * cost.gamma2 * squared_l2_distance(traj.snapshot(n).phi, cost.phi_Q[n - 1]);
    if (cost.gamma4 > 0.0)
      level += 0.5 * cost.gamma4 * squared_l2_distance(traj.snapshot(n).sigma, cost.sigma_Q[n - 1]);
    if (cost.gamma5 > 0.0) level += 0.5 * cost.gamma5 * squared_l2(controls.u[n - 1]);
    if (cost.gamma6 > 0.0) level += 0.5 * cost.gamma6 * squared_l2(controls.w[n - 1]);
    J += tau * level;
  }
  return J;
}

CostGradientSources adjoint_source(const StateTrajectory& traj, const CostSpec& cost) {
  const Domain& domain = traj.domain();
  const auto m = domain.cell_count();
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  const double vol = domain.cell_volume();
  cost.validate(domain, N, false);

  CostGradientSources out;
  out.per_level.assign(N, Vector::Zero(3 * m));
  for (int n = 1; n <= N; ++n) {
    Vector& g = out.per_level[n - 1];
    if (cost.gamma2 > 0.0) {
      const Field& phi = traj.snapshot(n).phi;
      const Field& target = cost.phi_Q[n - 1];
      for (Eigen::Index i = 0; i < m; ++i)
        g[m + i] += cost.gamma2 * tau * vol * (phi[i] - target[i]);
    }
    if (cost.gamma4 > 0.0) {
      const Field& sig = traj.snapshot(n).sigma;
      const Field& target = cost.sigma_Q[n - 1];
      for (Eigen::Index i = 0; i < m; ++i)
        g[2 * m + i] += cost.gamma4 * tau * vol * (sig[i] - target[i]);
    }
  }

  out.terminal_phi = Field(domain);
  out.terminal_sigma = Field(domain);
  if (cost.gamma1 > 0.0) {
    const Field& phi = traj.snapshot(N).phi;
    for (Eigen::Index i = 0; i < m; ++i)
      out.terminal_phi[i] = cost.gamma1 * (phi[i] - cost.phi_Omega[i]);
    Vector& g = out.per_level[N - 1];
    for (Eigen::Index i = 0; i < m; ++i) g[m + i] += vol * out.terminal_phi[i];
  }
  if (cost.gamma3 > 0.0) {
    const Field& sig = traj.snapshot(N).sigma;
    for (Eigen::Index i = 0; i < m; ++i)
      out.terminal_sigma[i] = cost.gamma3 * (sig[i] - cost.sigma_Omega[i]);
    Vector& g = out.per_level[N - 1];
    for (Eigen::Index i = 0; i < m; ++i) g[2 * m + i] += vol * out.terminal_sigma[i];
  }
  return out;
}

ControlGradient reduced_gradient(const StateTrajectory& traj, const AdjTrajectory& adj,
                                 const ControlField& controls, const CostSpec& cost) {
  if (adj.trajectory_id != traj.id()) throw MismatchedTrajectory();
  const Domain& domain = traj.domain();
  const auto m = domain.cell_count();
  const int N = traj.time_grid().steps;
  const double weight = traj.time_grid().tau() * domain.cell_volume();
  controls.check_shape(domain, N);

  ControlGradient grad;
  grad.gu.assign(N, Field(domain));
  grad.gw.assign(N, Field(domain));
  for (int n = 1; n <= N; ++n) {
    // The adjoint of step n is stored at level n-1; h(phi_n) comes from the
    // stored step record so the gradient differentiates exactly what the
    // forward solve computed.
    const AdjSnapshot& a = adj.levels[n - 1];
    const Field& h_phi = traj.record(n).h_phi;
    Field& gu = grad.gu[n - 1];
    Field& gw = grad.gw[n - 1];
    for (Eigen::Index i = 0; i < m; ++i) {
      gu[i] = weight * (-h_phi[i] * a.q[i] + cost.gamma5 * controls.u[n - 1][i]);
      gw[i] = weight * (a.r[i] + cost.gamma6 * controls.w[n - 1][i]);
    }
  }
  return grad;
}

}  // namespace tgc
