// Run configuration: an INI-like text format with strict validation.
//
// Sections and keys are fixed; unknown keys are rejected with their line
// number. Every numeric constraint of the model is re-checked at parse time
// and violations name the assumption from the model's documented registry
// (A1..A7, see README) so that a bad input fails loudly before any solve.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tgc/cost.hpp"
#include "tgc/optimizer.hpp"
#include "tgc/state.hpp"

namespace tgc {

// Spatial profile presets used for initial data and cost targets.
struct FieldPreset {
  enum class Kind { constant, cosine, gaussian };
  Kind kind = Kind::constant;
  double value = 0.0;      // constant level
  double amplitude = 0.0;  // cosine / gaussian amplitude
  double offset = 0.0;     // additive offset for cosine / gaussian
  double width = 0.1;      // gaussian standard deviation (absolute units)

  Field materialize(const Domain& domain) const;
};

struct RunConfig {
  // [domain]
  int dim = 1;
  std::vector<double> lengths{1.0};
  std::vector<std::int64_t> cells{64};
  // [time]
  double T = 1.0;
  int steps = 50;
  // [model]
  ModelParams model;
  // [potential]
  PotentialSpec potential;
  // [h]
  std::string h_variant = "quintic_smoothstep";
  // [init]
  FieldPreset mu0, phi0, sigma0;
  // [cost]
  double gamma1 = 0.0, gamma2 = 1.0, gamma3 = 0.0, gamma4 = 1.0, gamma5 = 1e-2, gamma6 = 1e-2;
  FieldPreset phi_Q, sigma_Q, phi_Omega, sigma_Omega;
  // [box]
  ControlBox box;
  // [optimizer]
  OptimizerConfig optimizer;
  // [solver]
  SolverOptions solver;
  // [output]
  std::string output_directory = "out";
  int snapshot_cadence = 10;
  // [run]
  std::uint64_t seed = 1;

  Domain domain() const;
  TimeGrid time_grid() const { return TimeGrid{T, steps}; }
  StateSnapshot initial_snapshot(const Domain& domain) const;
  CostSpec cost_spec(const Domain& domain) const;
  Problem problem() const;

  // Effective configuration as INI text (defaults filled in), suitable for
  // echoing into the run log and for byte-stable comparison.
  std::string echo() const;
};

// Parses the documented INI format. `overrides` are "section.key=value"
// entries that take precedence over file values, which take precedence over
// defaults. Throws ParseError (with line number) or ValidationError.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides = {});

RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

}  // namespace tgc
