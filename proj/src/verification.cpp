#include "tgc/verification.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "tgc/errors.hpp"

namespace tgc {

namespace {

double control_inf_norm(const ControlField& c) {
  double m = 0.0;
  for (const Field& f : c.u) m = std::max(m, std::max(std::abs(f.min()), std::abs(f.max())));
  for (const Field& f : c.w) m = std::max(m, std::max(std::abs(f.min()), std::abs(f.max())));
  return m;
}

ControlField shifted(const ControlField& base, double scale, const Direction& d) {
  ControlField out = base;
  for (std::size_t n = 0; n < out.u.size(); ++n) {
    out.u[n].add_scaled(scale, d.k[n]);
    out.w[n].add_scaled(scale, d.l[n]);
  }
  return out;
}

double reduced_cost(const Problem& problem, const ControlField& c) {
  const StateTrajectory traj = solve_state(problem.params, problem.potential, problem.h, c,
                                           problem.initial, problem.grid, problem.solver);
  return evaluate_cost(traj, c, problem.cost);
}

// ||f||_V^2 = ||f||_H^2 + ||grad f||_H^2, the gradient seminorm taken from
// the assembled Laplacian: <grad f, grad f> = <-L f, f>.
double v_norm2(const Field& f, const SparseOperator& lap) {
  const double h2 = inner_product(f, f);
  const double semi = -inner_product(lap.apply(f), f);
  return h2 + std::max(0.0, semi);
}

}  // namespace

Direction random_direction(const Domain& domain, int steps, Rng& rng, double amplitude) {
  Direction d = Direction::zero(domain, steps);
  for (int n = 0; n < steps; ++n) {
    for (Eigen::Index i = 0; i < domain.cell_count(); ++i) {
      d.k[n][i] = rng.symmetric(amplitude);
      d.l[n][i] = rng.symmetric(amplitude);
    }
  }
  return d;
}

double fd_gradient(const Problem& problem, const ControlField& base, const Direction& direction,
                   double fd_step) {
  const double h = fd_step * (1.0 + control_inf_norm(base));
  const double plus = reduced_cost(problem, shifted(base, h, direction));
  const double minus = reduced_cost(problem, shifted(base, -h, direction));
  return (plus - minus) / (2.0 * h);
}

double analytic_directional_derivative(const Problem& problem, const ControlField& base,
                                       const Direction& direction) {
  const StateTrajectory traj = solve_state(problem.params, problem.potential, problem.h, base,
                                           problem.initial, problem.grid, problem.solver);
  const AdjTrajectory adj = solve_adjoint(traj, problem.params, problem.cost);
  const ControlGradient grad = reduced_gradient(traj, adj, base, problem.cost);
  double acc = 0.0;
  for (std::size_t n = 0; n < grad.gu.size(); ++n) {
    acc += grad.gu[n].values().dot(direction.k[n].values());
    acc += grad.gw[n].values().dot(direction.l[n].values());
  }
  return acc;
}

FrechetReport frechet_order_probe(const Problem& problem, const ControlField& base,
                                  const Direction& direction, const std::vector<double>& lambdas) {
  const Domain& domain = problem.domain();
  const int N = problem.grid.steps;
  const double tau = problem.grid.tau();
  const SparseOperator lap = assemble_neumann_laplacian(domain);

  const StateTrajectory traj = solve_state(problem.params, problem.potential, problem.h, base,
                                           problem.initial, problem.grid, problem.solver);
  const LinTrajectory lin = solve_linearized(traj, problem.params, direction);

  FrechetReport report;
  report.lambdas = lambdas;
  for (const double lambda : lambdas) {
    const StateTrajectory bumped =
        solve_state(problem.params, problem.potential, problem.h, shifted(base, lambda, direction),
                    problem.initial, problem.grid, problem.solver);

    double sup_psi2 = 0.0, int_psi_v2 = 0.0;
    double sup_y_v2 = 0.0, int_dy2 = 0.0;
    double sup_z2 = 0.0, int_z_v2 = 0.0;
    Field y_prev(domain);
    for (int n = 0; n <= N; ++n) {
      Field psi = bumped.snapshot(n).mu;
      psi.add_scaled(-1.0, traj.snapshot(n).mu);
      Field y = bumped.snapshot(n).phi;
      y.add_scaled(-1.0, traj.snapshot(n).phi);
      Field z = bumped.snapshot(n).sigma;
      z.add_scaled(-1.0, traj.snapshot(n).sigma);
      if (n > 0) {
        psi.add_scaled(-lambda, lin.levels[n].eta);
        y.add_scaled(-lambda, lin.levels[n].xi);
        z.add_scaled(-lambda, lin.levels[n].zeta);
      }

      sup_psi2 = std::max(sup_psi2, inner_product(psi, psi));
      sup_z2 = std::max(sup_z2, inner_product(z, z));
      sup_y_v2 = std::max(sup_y_v2, v_norm2(y, lap));
      if (n > 0) {
        int_psi_v2 += tau * v_norm2(psi, lap);
        int_z_v2 += tau * v_norm2(z, lap);
        Field dy = y;
        dy.add_scaled(-1.0, y_prev);
        dy.scale(1.0 / tau);
        int_dy2 += tau * inner_product(dy, dy);
      }
      y_prev = std::move(y);
    }
    report.remainders.push_back(
        std::sqrt(sup_psi2 + int_psi_v2 + sup_y_v2 + int_dy2 + sup_z2 + int_z_v2));
  }

  // Least-squares slope of log rho against log lambda.
  const std::size_t count = lambdas.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mx += std::log(lambdas[i]);
    my += std::log(std::max(report.remainders[i], 1e-300));
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = std::log(lambdas[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::max(report.remainders[i], 1e-300)) - my);
  }
  report.slope = sxx > 0.0 ? sxy / sxx : 0.0;

  for (std::size_t i = 0; i + 1 < count; ++i) {
    // lambdas are given in decreasing order; remainders must follow.
    if (report.remainders[i + 1] > report.remainders[i]) report.monotone = false;
  }
  return report;
}

namespace {

double trajectory_distance(const StateTrajectory& a, const StateTrajectory& b,
                           const SparseOperator& lap) {
  const int N = a.time_grid().steps;
  const double tau = a.time_grid().tau();
  double sup2 = 0.0, integ2 = 0.0;
  for (int n = 0; n <= N; ++n) {
    Field dmu = a.snapshot(n).mu;
    dmu.add_scaled(-1.0, b.snapshot(n).mu);
    Field dphi = a.snapshot(n).phi;
    dphi.add_scaled(-1.0, b.snapshot(n).phi);
    Field dsig = a.snapshot(n).sigma;
    dsig.add_scaled(-1.0, b.snapshot(n).sigma);
    const double level2 =
        inner_product(dmu, dmu) + inner_product(dphi, dphi) + inner_product(dsig, dsig);
    sup2 = std::max(sup2, level2);
    if (n > 0) integ2 += tau * (v_norm2(dmu, lap) + v_norm2(dphi, lap) + v_norm2(dsig, lap));
  }
  return std::sqrt(sup2 + integ2);
}

double control_distance(const ControlField& a, const ControlField& b, double tau) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.u.size(); ++n) {
    const double du = l2_distance(a.u[n], b.u[n]);
    const double dw = l2_distance(a.w[n], b.w[n]);
    acc += tau * (du * du + dw * dw);
  }
  return std::sqrt(acc);
}

}  // namespace

double lipschitz_ratio(const Problem& problem, const ControlField& c1, const ControlField& c2) {
  const double tau = problem.grid.tau();
  const double denom = control_distance(c1, c2, tau);
  if (denom == 0.0) throw InvalidArgument("identical-pair: zero control difference");
  const SparseOperator lap = assemble_neumann_laplacian(problem.domain());
  const StateTrajectory s1 = solve_state(problem.params, problem.potential, problem.h, c1,
                                         problem.initial, problem.grid, problem.solver);
  const StateTrajectory s2 = solve_state(problem.params, problem.potential, problem.h, c2,
                                         problem.initial, problem.grid, problem.solver);
  return trajectory_distance(s1, s2, lap) / denom;
}

LipschitzReport lipschitz_probe(const Problem& problem, const ControlField& base,
                                std::uint64_t seed, int n_pairs, double eps) {
  const Domain& domain = problem.domain();
  const int N = problem.grid.steps;
  Rng rng(seed);

  LipschitzReport report;
  for (int pair = 0; pair < n_pairs; ++pair) {
    const Direction d1 = random_direction(domain, N, rng, 1.0);
    const Direction d2 = random_direction(domain, N, rng, 1.0);
    const double ratio = lipschitz_ratio(problem, shifted(base, eps, d1), shifted(base, eps, d2));
    report.ratios.push_back(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  return report;
}

SeparationReport separation_report(const StateTrajectory& traj, const PotentialSpec& potential) {
  SeparationReport report;
  report.applicable = potential.singular();
  report.min_phi = std::numeric_limits<double>::infinity();
  report.max_phi = -std::numeric_limits<double>::infinity();
  for (const StateSnapshot& snap : traj.snapshots()) {
    report.min_phi = std::min(report.min_phi, snap.phi.min());
    report.max_phi = std::max(report.max_phi, snap.phi.max());
  }
  if (report.applicable) {
    report.margin_lo = report.min_phi - potential.r_minus();
    report.margin_hi = potential.r_plus() - report.max_phi;
  } else {
    report.margin_lo = std::numeric_limits<double>::infinity();
    report.margin_hi = std::numeric_limits<double>::infinity();
  }
  return report;
}

MassReport mass_identity_residuals(const StateTrajectory& traj, const ModelParams& params,
                                   const ControlField& controls) {
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  controls.check_shape(traj.domain(), N);
  const ProliferationH h;

  MassReport report;
  for (int n = 1; n <= N; ++n) {
    const auto [combined, sigma] =
        mass_identity_residual_pair(traj.snapshot(n - 1), traj.snapshot(n), controls.u[n - 1],
                                    controls.w[n - 1], params, h, tau);
    report.combined.push_back(combined);
    report.sigma.push_back(sigma);
    report.max_combined = std::max(report.max_combined, combined);
    report.max_sigma = std::max(report.max_sigma, sigma);
  }
  return report;
}

namespace {

// Direct backward-Euler discretization of the continuous adjoint equations,
// assembled on its own (independent of the forward Jacobian code path).
// Unknown layout [q; p; r] at level n, marched from the terminal data.
struct DirectAdjoint {
  std::vector<Field> q, p, r;  // levels 0..N
};

DirectAdjoint direct_continuous_adjoint(const Problem& problem, const StateTrajectory& traj,
                                        const ControlField& controls, const SparseOperator& lap) {
  const Domain& domain = traj.domain();
  const auto m = domain.cell_count();
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  const ModelParams& pr = problem.params;
  const CostSpec& cost = problem.cost;
  const SpMat& L = lap.matrix;

  DirectAdjoint adj;
  adj.q.assign(N + 1, Field(domain));
  adj.p.assign(N + 1, Field(domain));
  adj.r.assign(N + 1, Field(domain));

  // Terminal data.
  if (cost.gamma1 > 0.0)
    for (Eigen::Index i = 0; i < m; ++i)
      adj.p[N][i] = cost.gamma1 * (traj.snapshot(N).phi[i] - cost.phi_Omega[i]) / pr.beta;
  if (cost.gamma3 > 0.0)
    for (Eigen::Index i = 0; i < m; ++i)
      adj.r[N][i] = cost.gamma3 * (traj.snapshot(N).sigma[i] - cost.sigma_Omega[i]);

  for (int n = N - 1; n >= 0; --n) {
    const StateSnapshot& state = traj.snapshot(n);
    const Field& u = controls.u[std::max(n, 1) - 1];

    Vector hphi(m), hp(m), fpp(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      hphi[i] = h_eval(problem.h, state.phi[i], 0);
      hp[i] = h_eval(problem.h, state.phi[i], 1);
      fpp[i] = potential_eval(problem.potential, state.phi[i], 2);
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(4 * L.nonZeros() + 8 * m));
    for (int col = 0; col < L.outerSize(); ++col) {
      for (SpMat::InnerIterator it(L, col); it; ++it) {
        const auto row = it.row();
        const auto c = it.col();
        const double v = it.value();
        trip.emplace_back(row, c, -v);                      // q-eq: -Lap q
        trip.emplace_back(m + row, m + c, -v);              // p-eq: -Lap p
        trip.emplace_back(m + row, 2 * m + c, pr.chi * v);  // p-eq: +chi Lap r
        trip.emplace_back(2 * m + row, 2 * m + c, -v);      // r-eq: -Lap r
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      trip.emplace_back(i, i, pr.alpha / tau);
      trip.emplace_back(i, m + i, -1.0);
      trip.emplace_back(m + i, i, 1.0 / tau - (pr.P * state.sigma[i] - pr.A - u[i]) * hp[i]);
      trip.emplace_back(m + i, m + i, pr.beta / tau + fpp[i]);
      trip.emplace_back(m + i, 2 * m + i, pr.D * state.sigma[i] * hp[i]);
      trip.emplace_back(2 * m + i, i, -pr.P * hphi[i]);
      trip.emplace_back(2 * m + i, m + i, -pr.chi);
      trip.emplace_back(2 * m + i, 2 * m + i, 1.0 / tau + pr.B + pr.D * hphi[i]);
    }
    SpMat A(3 * m, 3 * m);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Vector rhs(3 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs[i] = pr.alpha / tau * adj.q[n + 1][i];
      double p_src = adj.q[n + 1][i] / tau + pr.beta / tau * adj.p[n + 1][i];
      if (cost.gamma2 > 0.0) {
        const Field& target = cost.phi_Q[std::max(n, 1) - 1];
        p_src += cost.gamma2 * (state.phi[i] - target[i]);
      }
      rhs[m + i] = p_src;
      double r_src = adj.r[n + 1][i] / tau;
      if (cost.gamma4 > 0.0) {
        const Field& target = cost.sigma_Q[std::max(n, 1) - 1];
        r_src += cost.gamma4 * (state.sigma[i] - target[i]);
      }
      rhs[2 * m + i] = r_src;
    }

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("continuous adjoint factorization failed");
    const Vector sol = lu.solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) {
      adj.q[n][i] = sol[i];
      adj.p[n][i] = sol[m + i];
      adj.r[n][i] = sol[2 * m + i];
    }
  }
  return adj;
}

ControlField refine_in_time(const ControlField& base, int factor) {
  ControlField out;
  out.u.reserve(base.u.size() * factor);
  out.w.reserve(base.w.size() * factor);
  for (std::size_t n = 0; n < base.u.size(); ++n)
    for (int k = 0; k < factor; ++k) {
      out.u.push_back(base.u[n]);
      out.w.push_back(base.w[n]);
    }
  return out;
}

CostSpec refine_cost_in_time(const CostSpec& base, int factor) {
  CostSpec out = base;
  out.phi_Q.clear();
  out.sigma_Q.clear();
  for (const Field& f : base.phi_Q)
    for (int k = 0; k < factor; ++k) out.phi_Q.push_back(f);
  for (const Field& f : base.sigma_Q)
    for (int k = 0; k < factor; ++k) out.sigma_Q.push_back(f);
  return out;
}

}  // namespace

CrosscheckReport continuous_adjoint_crosscheck(const Problem& problem, const ControlField& base,
                                               int levels) {
  CrosscheckReport report;
  const SparseOperator lap = assemble_neumann_laplacian(problem.domain());

  for (int level = 0; level < levels; ++level) {
    const int factor = 1 << level;
    Problem refined = problem;
    refined.grid.steps = problem.grid.steps * factor;
    refined.cost = refine_cost_in_time(problem.cost, factor);
    const ControlField controls = refine_in_time(base, factor);
    const double tau = refined.grid.tau();
    const double weight = tau * problem.domain().cell_volume();
    const int N = refined.grid.steps;

    const StateTrajectory traj = solve_state(refined.params, refined.potential, refined.h,
                                             controls, refined.initial, refined.grid,
                                             refined.solver);
    const AdjTrajectory exact = solve_adjoint(traj, refined.params, refined.cost);
    const ControlGradient grad = reduced_gradient(traj, exact, controls, refined.cost);
    const DirectAdjoint direct = direct_continuous_adjoint(refined, traj, controls, lap);

    double acc = 0.0;
    for (int n = 1; n <= N; ++n) {
      Field du(problem.domain()), dw(problem.domain());
      const auto m = problem.domain().cell_count();
      for (Eigen::Index i = 0; i < m; ++i) {
        const double gu_exact = grad.gu[n - 1][i] / weight;
        const double gw_exact = grad.gw[n - 1][i] / weight;
        const double hphi = h_eval(refined.h, traj.snapshot(n).phi[i], 0);
        const double gu_direct =
            -hphi * direct.q[n - 1][i] + refined.cost.gamma5 * controls.u[n - 1][i];
        const double gw_direct = direct.r[n - 1][i] + refined.cost.gamma6 * controls.w[n - 1][i];
        du[i] = gu_exact - gu_direct;
        dw[i] = gw_exact - gw_direct;
      }
      acc += tau * (inner_product(du, du) + inner_product(dw, dw));
    }
    report.taus.push_back(tau);
    report.deviations.push_back(std::sqrt(acc));
  }

  for (std::size_t i = 0; i + 1 < report.deviations.size(); ++i) {
    const double hi = std::max(report.deviations[i], 1e-300);
    const double lo = std::max(report.deviations[i + 1], 1e-300);
    report.orders.push_back(std::log2(hi / lo));
  }
  return report;
}

}  // namespace tgc
