// Projected gradient descent over the control box with Armijo backtracking
// along the projection arc. Certifies stationarity of the discrete
// variational inequality; never claims global optimality (the reduced
// problem is nonconvex).
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tgc/cost.hpp"
#include "tgc/sensitivity.hpp"
#include "tgc/state.hpp"

namespace tgc {

// Scalar bounds broadcast over all cells and steps. u_lo >= 0 is required
// (the phase-equation control models a nonnegative drug dispensation).
struct ControlBox {
  double u_lo = 0.0, u_hi = 1.0;
  double w_lo = -1.0, w_hi = 1.0;

  void validate() const;
  // Radius of the open superset U_R used by the analysis; logged only.
  double logged_radius() const;
};

enum class StepRule { fixed, barzilai_borwein };

struct OptimizerConfig {
  int max_iters = 200;
  double armijo_c1 = 1e-4;        // in (0, 0.5)
  double backtrack_factor = 0.5;  // in (0, 1)
  double initial_step = 1.0;
  double stationarity_tol = 1e-5;
  double probe_step = 1.0;  // for the stationarity measure
  StepRule step_rule = StepRule::barzilai_borwein;

  void validate() const;
};

// Everything needed to evaluate the reduced cost at a control iterate.
struct Problem {
  ModelParams params;
  PotentialSpec potential;
  ProliferationH h;
  StateSnapshot initial;
  TimeGrid grid;
  ControlBox box;
  CostSpec cost;
  SolverOptions solver;

  const Domain& domain() const { return initial.mu.domain(); }
};

enum class OptimizeStatus { converged, max_iters, line_search_stall };

struct IterateRow {
  int iter = 0;
  double cost = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
  int armijo_rejections = 0;
};

struct OptimizationReport {
  OptimizeStatus status = OptimizeStatus::max_iters;
  std::vector<IterateRow> history;
  ControlField controls;
  std::shared_ptr<StateTrajectory> trajectory;
  std::shared_ptr<AdjTrajectory> adjoint;
  std::uint64_t trajectory_id = 0;
  double final_cost = 0.0;
  double final_stationarity = 0.0;
  double box_radius_logged = 0.0;
};

// Pointwise clamp onto the box; the L2(Q) projection.
ControlField project_box(const ControlField& controls, const ControlBox& box);

// || c - P_box(c - probe * grad_field) ||_{L2(Q)} / probe, where grad_field
// is the tau*vol-weighted gradient divided back to field units (tau is the
// time-step measure the gradient was built with). Zero iff the discrete
// variational inequality holds at the iterate.
double stationarity_measure(const ControlField& controls, const ControlGradient& gradient,
                            const ControlBox& box, double probe_step, double tau);

OptimizationReport optimize(const Problem& problem, const OptimizerConfig& config,
                            const ControlField& initial_controls);

// Box-midpoint initial controls, the default starting point.
ControlField midpoint_controls(const Domain& domain, int steps, const ControlBox& box);

// Weighted L2 norms of u - clamp(h(phi) q / gamma5) and w - clamp(-r/gamma6);
// both vanish at an exact discrete stationary point. A component with zero
// weight is skipped (nullopt); requesting the residual with both weights zero
// is an error.
std::pair<std::optional<double>, std::optional<double>> clamp_characterization_residual(
    const ControlField& controls, const AdjTrajectory& adj, const StateTrajectory& traj,
    const CostSpec& cost, const ControlBox& box);

}  // namespace tgc
