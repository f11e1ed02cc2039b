// Tangent (linearized) and adjoint solvers built from the stored forward
// Jacobians, so that both are exact linear-algebraic counterparts of the
// discrete forward map: the tangent stepper advances J dX = M dX_prev + S dc
// with the converged Newton Jacobian J of each step, and the adjoint stepper
// marches J^T backwards. Discretize-then-optimize: the resulting gradient is
// exact for the discrete cost, and the transposition is witnessed by
// duality_gap at roundoff level.
//
// Level bookkeeping: the adjoint unknown associated with forward step n
// (constraint between levels n-1 and n) is stored at level n-1 in the
// paper-style (p, q, r) scaling; level N holds the terminal data
// q = 0, p = gamma1*(phi_N - phi_Omega)/beta, r = gamma3*(sigma_N - sigma_Omega),
// which close the backward march.
#pragma once

#include <cstdint>
#include <vector>

#include "tgc/cost.hpp"
#include "tgc/grid.hpp"
#include "tgc/state.hpp"

namespace tgc {

// Control-space perturbation, same shape as ControlField.
struct Direction {
  std::vector<Field> k, l;

  static Direction zero(const Domain& domain, int steps);
  int steps() const { return static_cast<int>(k.size()); }
};

struct LinSnapshot {
  Field eta, xi, zeta;
};

struct LinTrajectory {
  std::uint64_t trajectory_id = 0;
  std::vector<LinSnapshot> levels;  // 0..N, level 0 identically zero
};

struct AdjSnapshot {
  Field p, q, r;
};

struct AdjTrajectory {
  std::uint64_t trajectory_id = 0;
  std::vector<AdjSnapshot> levels;  // 0..N, level N = terminal data
};

// Exact linearization of the discrete forward solve in direction (k, l).
LinTrajectory solve_linearized(const StateTrajectory& traj, const ModelParams& params,
                               const Direction& direction);

// Exact discrete adjoint for the tracking cost.
AdjTrajectory solve_adjoint(const StateTrajectory& traj, const ModelParams& params,
                            const CostSpec& cost);

// Generalized adjoint sweep for arbitrary per-level source data (exact dG/dX
// of some functional G, stacked layout, levels 1..N). Returns the plain
// gradient dG/dc per step. Used by solve_adjoint and by the duality witness.
struct PlainControlGradient {
  std::vector<Vector> du, dw;  // per step, one entry per cell
};

PlainControlGradient adjoint_sweep(const StateTrajectory& traj, const ModelParams& params,
                                   const std::vector<Vector>& sources,
                                   std::vector<Vector>* lambdas_out = nullptr);

// Transpose-consistency witness: draws random per-level source data g,
// returns |<g, Lin(direction)> - <AdjointSweep(g), direction>| / scale.
double duality_gap(const StateTrajectory& traj, const ModelParams& params,
                   const Direction& direction, std::uint64_t adjoint_source_seed);

}  // namespace tgc
