#include "tgc/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "tgc/errors.hpp"

namespace tgc {

void ControlBox::validate() const {
  if (!(u_lo >= 0.0)) throw ValidationError("box: u_lo must be >= 0 (A7)");
  if (!(u_lo <= u_hi)) throw ValidationError("box: u_lo must be <= u_hi (A7)");
  if (!(w_lo <= w_hi)) throw ValidationError("box: w_lo must be <= w_hi (A7)");
}

double ControlBox::logged_radius() const {
  const double m = std::max(std::max(std::abs(u_lo), std::abs(u_hi)),
                            std::max(std::abs(w_lo), std::abs(w_hi)));
  return m + 1.0;
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ValidationError("optimizer: max_iters must be >= 1");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 0.5))
    throw ValidationError("optimizer: armijo_c1 must be in (0, 0.5)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ValidationError("optimizer: backtrack_factor must be in (0, 1)");
  if (!(initial_step > 0.0)) throw ValidationError("optimizer: initial_step must be > 0");
  if (!(stationarity_tol > 0.0)) throw ValidationError("optimizer: stationarity_tol must be > 0");
  if (!(probe_step > 0.0)) throw ValidationError("optimizer: probe_step must be > 0");
}

ControlField project_box(const ControlField& controls, const ControlBox& box) {
  box.validate();
  ControlField out = controls;
  for (Field& f : out.u) f.clamp(box.u_lo, box.u_hi);
  for (Field& f : out.w) f.clamp(box.w_lo, box.w_hi);
  return out;
}

ControlField midpoint_controls(const Domain& domain, int steps, const ControlBox& box) {
  return ControlField::constant(domain, steps, 0.5 * (box.u_lo + box.u_hi),
                                0.5 * (box.w_lo + box.w_hi));
}

namespace {

// Gradient fields in control units: the stored gradient carries the
// tau*cellVolume measure, the arc steps in plain L2(Q) geometry.
struct GradientFields {
  std::vector<Field> u, w;
};

GradientFields to_fields(const ControlGradient& grad, double weight) {
  GradientFields g;
  g.u.reserve(grad.gu.size());
  g.w.reserve(grad.gw.size());
  for (const Field& f : grad.gu) {
    Field scaled = f;
    scaled.scale(1.0 / weight);
    g.u.push_back(std::move(scaled));
  }
  for (const Field& f : grad.gw) {
    Field scaled = f;
    scaled.scale(1.0 / weight);
    g.w.push_back(std::move(scaled));
  }
  return g;
}

ControlField arc_point(const ControlField& c, double s, const GradientFields& g,
                       const ControlBox& box) {
  ControlField next = c;
  for (std::size_t n = 0; n < next.u.size(); ++n) {
    next.u[n].add_scaled(-s, g.u[n]);
    next.u[n].clamp(box.u_lo, box.u_hi);
    next.w[n].add_scaled(-s, g.w[n]);
    next.w[n].clamp(box.w_lo, box.w_hi);
  }
  return next;
}

// <grad, a - b> with the plain-sum convention (grad already carries weights).
double gradient_dot_difference(const ControlGradient& grad, const ControlField& a,
                               const ControlField& b) {
  double acc = 0.0;
  for (std::size_t n = 0; n < grad.gu.size(); ++n) {
    acc += grad.gu[n].values().dot(a.u[n].values() - b.u[n].values());
    acc += grad.gw[n].values().dot(a.w[n].values() - b.w[n].values());
  }
  return acc;
}

// Weighted L2(Q) inner product of two control-shaped objects.
double weighted_control_dot(const std::vector<Field>& au, const std::vector<Field>& aw,
                            const std::vector<Field>& bu, const std::vector<Field>& bw,
                            double tau) {
  double acc = 0.0;
  for (std::size_t n = 0; n < au.size(); ++n) {
    acc += tau * inner_product(au[n], bu[n]);
    acc += tau * inner_product(aw[n], bw[n]);
  }
  return acc;
}

struct Evaluation {
  std::shared_ptr<StateTrajectory> traj;
  std::shared_ptr<AdjTrajectory> adj;
  ControlGradient gradient;
  double cost = 0.0;
};

Evaluation evaluate(const Problem& problem, const ControlField& controls) {
  Evaluation e;
  e.traj = std::make_shared<StateTrajectory>(solve_state(
      problem.params, problem.potential, problem.h, controls, problem.initial, problem.grid,
      problem.solver));
  e.cost = evaluate_cost(*e.traj, controls, problem.cost);
  e.adj = std::make_shared<AdjTrajectory>(solve_adjoint(*e.traj, problem.params, problem.cost));
  e.gradient = reduced_gradient(*e.traj, *e.adj, controls, problem.cost);
  return e;
}

}  // namespace

namespace {

double stationarity_with_fields(const ControlField& controls, const GradientFields& g,
                                const ControlBox& box, double probe_step, double tau) {
  ControlField probe = arc_point(controls, probe_step, g, box);
  double acc = 0.0;
  for (std::size_t n = 0; n < controls.u.size(); ++n) {
    Field du = controls.u[n];
    du.add_scaled(-1.0, probe.u[n]);
    Field dw = controls.w[n];
    dw.add_scaled(-1.0, probe.w[n]);
    acc += tau * (inner_product(du, du) + inner_product(dw, dw));
  }
  return std::sqrt(std::max(0.0, acc)) / probe_step;
}

}  // namespace

double stationarity_measure(const ControlField& controls, const ControlGradient& gradient,
                            const ControlBox& box, double probe_step, double tau) {
  if (controls.u.empty()) return 0.0;
  const double weight = tau * controls.u.front().domain().cell_volume();
  const GradientFields g = to_fields(gradient, weight);
  return stationarity_with_fields(controls, g, box, probe_step, tau);
}

OptimizationReport optimize(const Problem& problem, const OptimizerConfig& config,
                            const ControlField& initial_controls) {
  config.validate();
  problem.box.validate();
  const int N = problem.grid.steps;
  const double tau = problem.grid.tau();
  const double weight = tau * problem.domain().cell_volume();

  OptimizationReport report;
  report.box_radius_logged = problem.box.logged_radius();

  ControlField c = project_box(initial_controls, problem.box);
  Evaluation eval = evaluate(problem, c);
  GradientFields g = to_fields(eval.gradient, weight);
  double stat = stationarity_with_fields(c, g, problem.box, config.probe_step, tau);
  report.history.push_back({0, eval.cost, stat, 0.0, 0});

  GradientFields g_prev;
  ControlField c_prev;
  bool have_prev = false;
  report.status = OptimizeStatus::max_iters;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (stat <= config.stationarity_tol) {
      report.status = OptimizeStatus::converged;
      break;
    }

    // Step seed: fixed restarts from initial_step; Barzilai-Borwein uses the
    // spectral quotient <dc,dc>/<dc,dg> once history exists.
    double s = config.initial_step;
    if (config.step_rule == StepRule::barzilai_borwein && have_prev) {
      std::vector<Field> dcu, dcw, dgu, dgw;
      dcu.reserve(N);
      for (int n = 0; n < N; ++n) {
        Field du = c.u[n];
        du.add_scaled(-1.0, c_prev.u[n]);
        dcu.push_back(std::move(du));
        Field dw = c.w[n];
        dw.add_scaled(-1.0, c_prev.w[n]);
        dcw.push_back(std::move(dw));
        Field gu = g.u[n];
        gu.add_scaled(-1.0, g_prev.u[n]);
        dgu.push_back(std::move(gu));
        Field gw = g.w[n];
        gw.add_scaled(-1.0, g_prev.w[n]);
        dgw.push_back(std::move(gw));
      }
      const double num = weighted_control_dot(dcu, dcw, dcu, dcw, tau);
      const double den = weighted_control_dot(dcu, dcw, dgu, dgw, tau);
      if (den > 0.0 && num > 0.0) {
        s = num / den;
        s = std::clamp(s, 1e-12 * config.initial_step, 1e12 * config.initial_step);
      }
    }

    int rejections = 0;
    bool stalled = false;
    ControlField candidate;
    Evaluation cand_eval;
    while (true) {
      candidate = arc_point(c, s, g, problem.box);
      const double decrease = gradient_dot_difference(eval.gradient, c, candidate);
      if (decrease <= 0.0) {
        // Projection absorbed the whole step; the iterate is stationary to
        // arc precision.
        stalled = s < 1e-14;
        if (stalled) break;
        s *= config.backtrack_factor;
        ++rejections;
        continue;
      }
      cand_eval = evaluate(problem, candidate);
      if (cand_eval.cost <= eval.cost - config.armijo_c1 * decrease) break;
      ++rejections;
      s *= config.backtrack_factor;
      if (s < 1e-14) {
        stalled = true;
        break;
      }
    }
    if (stalled) {
      report.status = OptimizeStatus::line_search_stall;
      break;
    }

    c_prev = std::move(c);
    g_prev = std::move(g);
    have_prev = true;
    c = std::move(candidate);
    eval = std::move(cand_eval);
    g = to_fields(eval.gradient, weight);
    stat = stationarity_with_fields(c, g, problem.box, config.probe_step, tau);
    report.history.push_back({iter, eval.cost, stat, s, rejections});

    if (stat <= config.stationarity_tol) {
      report.status = OptimizeStatus::converged;
      break;
    }
  }

  report.controls = std::move(c);
  report.trajectory = eval.traj;
  report.adjoint = eval.adj;
  report.trajectory_id = eval.traj->id();
  report.final_cost = eval.cost;
  report.final_stationarity = stat;
  return report;
}

std::pair<std::optional<double>, std::optional<double>> clamp_characterization_residual(
    const ControlField& controls, const AdjTrajectory& adj, const StateTrajectory& traj,
    const CostSpec& cost, const ControlBox& box) {
  if (adj.trajectory_id != traj.id()) throw MismatchedTrajectory();
  if (cost.gamma5 == 0.0 && cost.gamma6 == 0.0)
    throw InvalidArgument("zero-weight-requested: both gamma5 and gamma6 vanish");
  const int N = traj.time_grid().steps;
  const double tau = traj.time_grid().tau();
  const auto m = traj.domain().cell_count();

  std::optional<double> res_u, res_w;
  if (cost.gamma5 > 0.0) {
    double acc = 0.0;
    for (int n = 1; n <= N; ++n) {
      const Field& h_phi = traj.record(n).h_phi;
      const AdjSnapshot& a = adj.levels[n - 1];
      Field target(traj.domain());
      for (Eigen::Index i = 0; i < m; ++i) target[i] = h_phi[i] * a.q[i] / cost.gamma5;
      target.clamp(box.u_lo, box.u_hi);
      acc += tau * std::pow(l2_distance(controls.u[n - 1], target), 2);
    }
    res_u = std::sqrt(acc);
  }
  if (cost.gamma6 > 0.0) {
    double acc = 0.0;
    for (int n = 1; n <= N; ++n) {
      const AdjSnapshot& a = adj.levels[n - 1];
      Field target(traj.domain());
      for (Eigen::Index i = 0; i < m; ++i) target[i] = -a.r[i] / cost.gamma6;
      target.clamp(box.w_lo, box.w_hi);
      acc += tau * std::pow(l2_distance(controls.w[n - 1], target), 2);
    }
    res_w = std::sqrt(acc);
  }
  return {res_u, res_w};
}

}  // namespace tgc
