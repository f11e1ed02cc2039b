// Independent oracles and probes for the theorem-level properties of the
// solver stack: a finite-difference gradient oracle that never touches the
// adjoint path, a remainder-order probe for the differentiability of the
// control-to-state map, a Lipschitz continuous-dependence probe, separation
// and mass-identity reports, and a cross-check of the exact discrete adjoint
// against a direct discretization of the continuous adjoint equations.
#pragma once

#include <cstdint>
#include <vector>

#include "tgc/optimizer.hpp"
#include "tgc/rng.hpp"
#include "tgc/sensitivity.hpp"

namespace tgc {

// Central finite difference of the reduced cost along `direction`, with a
// scale-aware step: h = fd_step * (1 + max|c|). Uses only solve_state and
// evaluate_cost; probes run unconstrained around interior points.
double fd_gradient(const Problem& problem, const ControlField& base, const Direction& direction,
                   double fd_step);

// Directional value of the analytic reduced gradient, <grad, direction> with
// the plain-sum convention. The FD oracle above must match this.
double analytic_directional_derivative(const Problem& problem, const ControlField& base,
                                       const Direction& direction);

struct FrechetReport {
  std::vector<double> lambdas;
  std::vector<double> remainders;  // Y-norm of S(c+l d) - S(c) - l*Lin(d)
  double slope = 0.0;              // log-log least-squares fit
  bool monotone = true;            // remainders decrease with lambda
};

// Remainder order of the tangent approximation in the trajectory norm that
// mirrors the differentiability statement: sup-in-time L2 for the first and
// third components plus integrated H1 pieces, sup-in-time H1 plus a
// discrete-time H1(L2) piece for the middle component.
FrechetReport frechet_order_probe(const Problem& problem, const ControlField& base,
                                  const Direction& direction, const std::vector<double>& lambdas);

struct LipschitzReport {
  std::vector<double> ratios;  // state-difference / control-difference per pair
  double max_ratio = 0.0;
};

// State-difference over control-difference for one explicit pair; rejects
// identical pairs (zero denominator).
double lipschitz_ratio(const Problem& problem, const ControlField& c1, const ControlField& c2);

// Random control pairs at perturbation size eps around the base point.
LipschitzReport lipschitz_probe(const Problem& problem, const ControlField& base,
                                std::uint64_t seed, int n_pairs, double eps);

struct SeparationReport {
  bool applicable = false;  // false for non-singular potentials
  double min_phi = 0.0;
  double max_phi = 0.0;
  double margin_lo = 0.0;  // min phi - r_-
  double margin_hi = 0.0;  // r_+ - max phi
};

SeparationReport separation_report(const StateTrajectory& traj, const PotentialSpec& potential);

struct MassReport {
  std::vector<double> combined;  // relative residual per step
  std::vector<double> sigma;
  double max_combined = 0.0;
  double max_sigma = 0.0;
};

// Re-evaluates both discrete mass identities from the trajectory snapshots;
// a detector for corrupted or unconverged steps.
MassReport mass_identity_residuals(const StateTrajectory& traj, const ModelParams& params,
                                   const ControlField& controls);

struct CrosscheckReport {
  std::vector<double> taus;
  std::vector<double> deviations;  // weighted L2(Q) gap between the gradients
  std::vector<double> orders;      // log2(dev_i / dev_{i+1})
};

// Direct backward-Euler discretization of the continuous adjoint system,
// compared against the exact discrete adjoint gradient; started from the base
// time grid and refined by tau-halving `levels` times.
CrosscheckReport continuous_adjoint_crosscheck(const Problem& problem, const ControlField& base,
                                               int levels);

// Uniform random direction with entries in [-amplitude, amplitude].
Direction random_direction(const Domain& domain, int steps, Rng& rng, double amplitude);

}  // namespace tgc
