// Tracking-type cost over a trajectory and controls, its exact partial
// derivatives with respect to the discrete state unknowns (the adjoint
// sources), and the reduced gradient assembled from an adjoint solve.
//
// Conventions: all norms are the lumped L2 norm, time sums run over levels
// 1..N with the right-endpoint rule (matching backward Euler), and gradient
// objects carry the full tau * cellVolume weights so that directional
// derivatives are plain unweighted dot products.
#pragma once

#include <vector>

#include "tgc/grid.hpp"
#include "tgc/state.hpp"

namespace tgc {

struct AdjTrajectory;  // sensitivity.hpp

struct CostSpec {
  // gamma1, gamma3: terminal phi/sigma misfits; gamma2, gamma4: distributed
  // phi/sigma misfits; gamma5, gamma6: control costs.
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, gamma4 = 0.0, gamma5 = 0.0, gamma6 = 0.0;
  std::vector<Field> phi_Q, sigma_Q;  // per-step targets, index n-1 <-> level n
  Field phi_Omega, sigma_Omega;       // terminal targets

  // Shape and sign checks. The "not all weights zero" requirement binds when
  // a minimization problem is posed (require_any_positive); the cost and
  // adjoint evaluations themselves accept an all-zero spec.
  void validate(const Domain& domain, int steps, bool require_any_positive = true) const;

  static CostSpec tracking(const Domain& domain, int steps, double g1, double g2, double g3,
                           double g4, double g5, double g6, double phiQ_value, double sigmaQ_value,
                           double phiOmega_value, double sigmaOmega_value);
};

double evaluate_cost(const StateTrajectory& traj, const ControlField& controls,
                     const CostSpec& cost);

// Exact dJ/dX per level (stacked [mu; phi; sigma] layout, levels 1..N with
// the terminal contributions folded into level N), plus the raw terminal
// misfit fields gamma1*(phi_N - phi_Omega), gamma3*(sigma_N - sigma_Omega).
struct CostGradientSources {
  std::vector<Vector> per_level;
  Field terminal_phi;
  Field terminal_sigma;
};

CostGradientSources adjoint_source(const StateTrajectory& traj, const CostSpec& cost);

// Per-step gradient of the discrete reduced cost with respect to the control
// unknowns. Directional derivative = plain sum of gu.k + gw.l entries.
struct ControlGradient {
  std::vector<Field> gu, gw;
};

ControlGradient reduced_gradient(const StateTrajectory& traj, const AdjTrajectory& adj,
                                 const ControlField& controls, const CostSpec& cost);

}  // namespace tgc
