// Error types shared across the toolkit. Every failure mode that callers are
// expected to branch on gets its own type; everything else is a plain
// std::runtime_error with a descriptive message.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tgc {

struct DomainMismatch : std::runtime_error {
  explicit DomainMismatch(const std::string& what) : std::runtime_error("domain-mismatch: " + what) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error("shape-mismatch: " + what) {}
};

struct InvalidArgument : std::runtime_error {
  explicit InvalidArgument(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation of a singular potential outside its effective domain. Signals
// loss of the separation property to the caller.
struct PotentialDomainViolation : std::runtime_error {
  double value;
  explicit PotentialDomainViolation(double r)
      : std::runtime_error("domain-violation: potential argument " + std::to_string(r) +
                           " outside the effective domain"),
        value(r) {}
};

struct NewtonDivergence : std::runtime_error {
  int step;
  int iterations;
  double residual;
  NewtonDivergence(int step_, int iters, double res)
      : std::runtime_error("newton-divergence: step " + std::to_string(step_) + " stalled after " +
                           std::to_string(iters) + " iterations, residual " + std::to_string(res)),
        step(step_),
        iterations(iters),
        residual(res) {}
};

// A Newton iterate tried to push the order parameter out of (r-, r+) and the
// pull-back could not recover. Reports the offending cell, step, and value.
struct SeparationViolation : std::runtime_error {
  int step;
  std::int64_t cell;
  double value;
  SeparationViolation(int step_, std::int64_t cell_, double value_)
      : std::runtime_error("separation-violation: step " + std::to_string(step_) + ", cell " +
                           std::to_string(cell_) + ", phi = " + std::to_string(value_)),
        step(step_),
        cell(cell_),
        value(value_) {}
};

struct MissingJacobians : std::runtime_error {
  MissingJacobians() : std::runtime_error("missing-jacobians: trajectory carries no step records") {}
};

struct MismatchedTrajectory : std::runtime_error {
  MismatchedTrajectory()
      : std::runtime_error("mismatched-trajectory: adjoint was built from a different trajectory") {}
};

// Config file problems carry the offending line when known.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("parse-error (line " + std::to_string(line_) + "): " + what), line(line_) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error("validation-error: " + what) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error("format-error: " + what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error("io-error: " + what) {}
};

}  // namespace tgc
