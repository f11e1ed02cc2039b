// Fully implicit (backward Euler) time stepping for the coupled
// chemical-potential / order-parameter / nutrient system
//
//   alpha*dt(mu) + dt(phi) - lap(mu)   = (P*sigma - A - u) h(phi)
//   mu = beta*dt(phi) - lap(phi) + F'(phi) - chi*sigma
//   dt(sigma) - lap(sigma) + chi*lap(phi) = B(sigma_s - sigma) - D*sigma*h(phi) + w
//
// with homogeneous Neumann boundaries. Each step solves the coupled residual
// system by Newton iteration with an analytic Jacobian and a sparse direct
// factorization; the Jacobian at the converged state is stored so that the
// tangent and adjoint steppers are exact transposes of the forward
// linearization.
#pragma once

#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <vector>

#include "tgc/grid.hpp"
#include "tgc/potentials.hpp"

namespace tgc {

struct ModelParams {
  double alpha = 1.0;    // relaxation of mu, > 0
  double beta = 1.0;     // viscous relaxation of phi, > 0
  double chi = 1.0;      // chemotaxis coefficient, > 0
  double P = 0.0;        // proliferation rate, >= 0
  double A = 0.0;        // apoptosis rate, >= 0
  double B = 0.0;        // nutrient supply rate, >= 0
  double D = 0.0;        // nutrient consumption rate, >= 0
  double sigma_s = 0.0;  // vasculature nutrient level, >= 0

  void validate() const;
};

struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  double tau() const { return T / static_cast<double>(steps); }
  void validate() const;
};

struct StateSnapshot {
  Field mu, phi, sigma;
};

// Per-step piecewise-constant controls. u[n] and w[n] act on the interval
// (t_n, t_{n+1}] and enter the step residual at the new time level.
struct ControlField {
  std::vector<Field> u, w;

  static ControlField constant(const Domain& domain, int steps, double u_value, double w_value);
  int steps() const { return static_cast<int>(u.size()); }
  void check_shape(const Domain& domain, int steps) const;
};

struct SolverOptions {
  double newton_tol = 1e-12;        // relative residual tolerance
  int newton_max_iters = 25;
  int damping_max_halvings = 6;     // on residual increase
  double separation_margin = 1e-10; // guard distance from r-, r+
  bool store_factorizations = true;
};

using SparseLUSolver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

// Everything the tangent/adjoint steppers need from one converged forward
// step: the Jacobian at the converged state (and optionally its
// factorization) plus the proliferation weight h(phi) for control injection.
struct StepRecord {
  SpMat jacobian;
  std::shared_ptr<SparseLUSolver> lu;  // null when factorizations are not stored
  Field h_phi;                         // h(phi^{n+1})
  int newton_iters = 0;
  double residual_norm = 0.0;

  // Stored factorization, or a fresh one from the stored Jacobian.
  std::shared_ptr<SparseLUSolver> factorization() const;
};

// Per-run monitor series.
struct Monitors {
  std::vector<double> min_phi, max_phi;            // per level 0..N
  std::vector<double> mass_mu, mass_phi, mass_sigma;
  std::vector<double> norm2_phi, norm2_sigma;      // cost integrand samples
  std::vector<double> mass_residual_combined;      // per step 1..N, relative
  std::vector<double> mass_residual_sigma;
  std::vector<int> newton_iters;                   // per step
  std::vector<double> newton_residual;             // per step
};

class StateTrajectory {
 public:
  StateTrajectory(Domain domain, TimeGrid grid, ModelParams params, PotentialSpec potential);

  std::uint64_t id() const { return id_; }
  const Domain& domain() const { return domain_; }
  const TimeGrid& time_grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const PotentialSpec& potential() const { return potential_; }

  int levels() const { return static_cast<int>(snapshots_.size()); }
  const StateSnapshot& snapshot(int level) const { return snapshots_.at(level); }
  const StepRecord& record(int step) const { return records_.at(step - 1); }  // steps 1..N
  bool has_records() const { return !records_.empty(); }

  const Monitors& monitors() const { return monitors_; }

  std::vector<StateSnapshot>& snapshots() { return snapshots_; }
  const std::vector<StateSnapshot>& snapshots() const { return snapshots_; }
  std::vector<StepRecord>& records() { return records_; }
  Monitors& monitors() { return monitors_; }

 private:
  std::uint64_t id_;
  Domain domain_;
  TimeGrid grid_;
  ModelParams params_;
  PotentialSpec potential_;
  std::vector<StateSnapshot> snapshots_;
  std::vector<StepRecord> records_;
  Monitors monitors_;
};

// Shared pieces of one implicit step; built once per solve.
struct StepContext {
  const ModelParams& params;
  const PotentialSpec& potential;
  const ProliferationH& h;
  const SparseOperator& laplacian;
  double tau;
  const SolverOptions& opts;
  int step_index;  // 1-based, for error reporting
};

// One backward-Euler step from `prev` with controls (u, w) for this step.
// Returns the new snapshot and its converged-state record.
std::pair<StateSnapshot, StepRecord> step_state(const StateSnapshot& prev, const Field& u,
                                                const Field& w, const StepContext& ctx);

// The three discrete residual fields for a candidate transition prev -> next.
std::array<Field, 3> state_residual(const StateSnapshot& prev, const StateSnapshot& next,
                                    const Field& u, const Field& w, const StepContext& ctx);

// Full forward solve. Initial data must be interior for singular variants.
StateTrajectory solve_state(const ModelParams& params, const PotentialSpec& potential,
                            const ProliferationH& h, const ControlField& controls,
                            const StateSnapshot& initial, const TimeGrid& grid,
                            const SolverOptions& opts = {});

// Relative residuals of the two discrete mass identities (combined
// mu/phi-mass and sigma-mass) for one transition. The Laplacian terms vanish
// under integration, so converged steps satisfy both to Newton tolerance.
std::pair<double, double> mass_identity_residual_pair(const StateSnapshot& prev,
                                                      const StateSnapshot& next, const Field& u,
                                                      const Field& w, const ModelParams& params,
                                                      const ProliferationH& h, double tau);

}  // namespace tgc
