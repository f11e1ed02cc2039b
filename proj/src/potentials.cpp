#include "tgc/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace tgc {

namespace {

// Convex logarithmic part F1(s) = (1+s)ln(1+s) + (1-s)ln(1-s) and derivatives.
double f1_log(double s) { return (1.0 + s) * std::log(1.0 + s) + (1.0 - s) * std::log(1.0 - s); }
double f1_log_prime(double s) { return std::log((1.0 + s) / (1.0 - s)); }
double f1_log_second(double s) { return 2.0 / (1.0 - s * s); }

double eval_regular(double r, int order) {
  switch (order) {
    case 0: {
      const double t = r * r - 1.0;
      return 0.25 * t * t;
    }
    case 1:
      return r * r * r - r;
    case 2:
      return 3.0 * r * r - 1.0;
    default:
      return 6.0 * r;
  }
}

double eval_logarithmic(double r, double k, int order) {
  if (order == 0) {
    // F itself is finite up to the closed endpoints (x ln x -> 0).
    if (r < -1.0 || r > 1.0) throw PotentialDomainViolation(r);
    const double a = 1.0 + r, b = 1.0 - r;
    const double fa = a > 0.0 ? a * std::log(a) : 0.0;
    const double fb = b > 0.0 ? b * std::log(b) : 0.0;
    return fa + fb - k * r * r;
  }
  if (!(r > -1.0 && r < 1.0)) throw PotentialDomainViolation(r);
  switch (order) {
    case 1:
      return f1_log_prime(r) - 2.0 * k * r;
    case 2:
      return f1_log_second(r) - 2.0 * k;
    default: {
      const double t = 1.0 - r * r;
      return 4.0 * r / (t * t);
    }
  }
}

}  // namespace

double yosida_resolvent(double r, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("yosida: eps must be in (0,1)");
  if (r == 0.0) return 0.0;

  // g(s) = s + eps*ln((1+s)/(1-s)) - r is strictly increasing on (-1,1) with
  // g -> -inf / +inf at the endpoints; bracket and refine with Newton,
  // falling back to bisection whenever the Newton step leaves the bracket.
  double lo = -1.0, hi = 1.0;
  double s = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);
  const double tol = 1e-14;
  double g = s + eps * f1_log_prime(s) - r;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(g) <= tol) return s;
    if (g > 0.0)
      hi = s;
    else
      lo = s;
    const double dg = 1.0 + eps * f1_log_second(s);
    double next = s - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
    g = s + eps * f1_log_prime(s) - r;
  }
  return s;
}

double yosida_prime(double r, double eps) { return (r - yosida_resolvent(r, eps)) / eps; }

double yosida_envelope(double r, double eps) {
  const double s = yosida_resolvent(r, eps);
  const double d = r - s;
  return d * d / (2.0 * eps) + f1_log(s);
}

double potential_eval(const PotentialSpec& spec, double r, int order) {
  if (order < 0 || order > 3) throw InvalidArgument("potential_eval: order must be 0..3");
  switch (spec.variant) {
    case PotentialVariant::regular:
      return eval_regular(r, order);
    case PotentialVariant::logarithmic:
      return eval_logarithmic(r, spec.k, order);
    case PotentialVariant::yosida_logarithmic: {
      switch (order) {
        case 0:
          return yosida_envelope(r, spec.eps) - spec.k * r * r;
        case 1:
          return yosida_prime(r, spec.eps) - 2.0 * spec.k * r;
        case 2: {
          // d/dr F1_eps'(r) = F1''(s*) / (1 + eps F1''(s*)) via the resolvent
          // derivative ds*/dr = 1/(1 + eps F1''(s*)).
          const double s = yosida_resolvent(r, spec.eps);
          const double f2 = f1_log_second(s);
          return f2 / (1.0 + spec.eps * f2) - 2.0 * spec.k;
        }
        default:
          throw InvalidArgument(
              "potential_eval: yosida_logarithmic has no third derivative; use the "
              "logarithmic variant");
      }
    }
  }
  throw InvalidArgument("potential_eval: unknown variant");
}

double h_eval(const ProliferationH&, double r, int order) {
  if (order < 0 || order > 2) throw InvalidArgument("h_eval: order must be 0..2");
  const double s = std::clamp(0.5 * (r + 1.0), 0.0, 1.0);
  switch (order) {
    case 0:
      return ((6.0 * s - 15.0) * s + 10.0) * s * s * s;
    case 1:
      // d/dr = d/ds * 1/2
      return 0.5 * (((30.0 * s - 60.0) * s + 30.0) * s * s);
    default:
      return 0.25 * (((120.0 * s - 180.0) * s + 60.0) * s);
  }
}

}  // namespace tgc
