// Double-well potentials F = F1 + F2 and the proliferation interpolant h.
//
// Variants:
//   regular             F(r) = (r^2-1)^2/4 on all of R
//   logarithmic         F(r) = (1+r)ln(1+r) + (1-r)ln(1-r) - k r^2 on (-1,1)
//   yosida_logarithmic  logarithmic with the convex part replaced by its
//                       Yosida regularization F1_eps (globally Lipschitz F').
//
// The logarithmic variant is singular: derivative evaluations outside the
// open interval throw PotentialDomainViolation, which the state solver treats
// as loss of separation.
#pragma once

#include <limits>

#include "tgc/errors.hpp"

namespace tgc {

enum class PotentialVariant { regular, logarithmic, yosida_logarithmic };

struct PotentialSpec {
  PotentialVariant variant = PotentialVariant::regular;
  double k = 2.0;    // well depth of the logarithmic variants, k > 1
  double eps = 0.1;  // Yosida parameter, in (0,1)

  bool singular() const { return variant == PotentialVariant::logarithmic; }
  // Effective domain endpoints for F' evaluation.
  double r_minus() const {
    return singular() ? -1.0 : -std::numeric_limits<double>::infinity();
  }
  double r_plus() const {
    return singular() ? 1.0 : std::numeric_limits<double>::infinity();
  }

  static PotentialSpec regular() { return {PotentialVariant::regular, 2.0, 0.1}; }
  static PotentialSpec logarithmic(double k) { return {PotentialVariant::logarithmic, k, 0.1}; }
  static PotentialSpec yosida(double k, double eps) {
    return {PotentialVariant::yosida_logarithmic, k, eps};
  }
};

// F^(order)(r), order in 0..3. The yosida_logarithmic variant provides orders
// 0..2 only (the regularized convex part is C^1 with Lipschitz derivative);
// order 3 throws InvalidArgument.
double potential_eval(const PotentialSpec& spec, double r, int order);

// Resolvent of the convex logarithmic part: the unique s* in (-1,1) with
// s* + eps*F1'(s*) = r, solved by safeguarded Newton to residual <= 1e-14.
double yosida_resolvent(double r, double eps);

// F1_eps'(r) = (r - resolvent(r))/eps. Lipschitz with constant 1/eps.
double yosida_prime(double r, double eps);

// Moreau envelope F1_eps(r) = (r-s*)^2/(2 eps) + F1(s*).
double yosida_envelope(double r, double eps);

// Quintic smoothstep interpolant: h(-1)=0, h(1)=1, C^2 clamps at +-1,
// h > 0 on (-1, 1).
struct ProliferationH {
  // sup |h| and sup |h'| over R (h' peaks at r = 0 with value 15/16).
  static constexpr double h_inf = 1.0;
  static constexpr double hprime_inf = 15.0 / 16.0;
};

// h^(order)(r), order in 0..2; defined on all of R.
double h_eval(const ProliferationH& h, double r, int order);

}  // namespace tgc
