#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tgc/errors.hpp"
#include "tgc/potentials.hpp"
#include "tgc/rng.hpp"

using namespace tgc;

namespace {

// Independent bisection oracle for the resolvent equation
// s + eps*ln((1+s)/(1-s)) = r on (-1, 1).
double resolvent_bisection(double r, double eps) {
  double lo = -1.0 + 1e-16, hi = 1.0 - 1e-16;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid + eps * std::log((1.0 + mid) / (1.0 - mid)) - r;
    if (g > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double central_diff(const PotentialSpec& spec, double r, int order, double h) {
  return (potential_eval(spec, r + h, order - 1) - potential_eval(spec, r - h, order - 1)) /
         (2.0 * h);
}

}  // namespace

TEST_CASE("regular potential values") {
  const PotentialSpec spec = PotentialSpec::regular();
  CHECK(potential_eval(spec, 0.0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(potential_eval(spec, 1.0, 0) == 0.0);
  CHECK(potential_eval(spec, 2.0, 1) == doctest::Approx(6.0));
  CHECK(potential_eval(spec, 0.0, 2) == doctest::Approx(-1.0));
  CHECK(potential_eval(spec, 1.0, 3) == doctest::Approx(6.0));
}

TEST_CASE("logarithmic potential values and domain") {
  const PotentialSpec spec = PotentialSpec::logarithmic(2.0);
  CHECK(potential_eval(spec, 0.0, 1) == 0.0);
  // F'(1/2) = ln 3 - 2k*(1/2)
  CHECK(potential_eval(spec, 0.5, 1) == doctest::Approx(std::log(3.0) - 2.0).epsilon(1e-14));
  // F is finite at the closed endpoints but derivatives are not.
  CHECK(potential_eval(spec, 1.0, 0) == doctest::Approx(2.0 * std::log(2.0) - 2.0));
  CHECK_THROWS_AS(potential_eval(spec, 1.0, 1), PotentialDomainViolation);
  CHECK_THROWS_AS(potential_eval(spec, -1.2, 0), PotentialDomainViolation);

  // Convexity of the logarithmic part: F'' + 2k = 2/(1-r^2) > 0.
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const double r = rng.uniform(-0.99, 0.99);
    CHECK(potential_eval(spec, r, 2) + 2.0 * spec.k > 0.0);
  }
}

TEST_CASE("derivative consistency against central differences") {
  Rng rng(17);
  const PotentialSpec variants[] = {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0),
                                    PotentialSpec::yosida(2.0, 0.1)};
  for (const PotentialSpec& spec : variants) {
    const int max_order = spec.variant == PotentialVariant::yosida_logarithmic ? 2 : 3;
    for (int order = 1; order <= max_order; ++order) {
      for (int i = 0; i < 50; ++i) {
        const double r = rng.uniform(-0.9, 0.9);
        const double h = 1e-6;
        const double fd = central_diff(spec, r, order, h);
        const double an = potential_eval(spec, r, order);
        CHECK(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
      }
    }
  }
}

TEST_CASE("yosida resolvent") {
  CHECK(yosida_resolvent(0.0, 0.1) == 0.0);

  // Bisection oracle cross-check.
  for (double r : {0.5, -0.3, 0.95, 2.0, -1.5}) {
    const double s = yosida_resolvent(r, 0.1);
    CHECK(std::abs(s - resolvent_bisection(r, 0.1)) <= 1e-10);
    CHECK(s > -1.0);
    CHECK(s < 1.0);
  }
  {
    const double s = yosida_resolvent(0.5, 0.1);
    CHECK(s > 0.0);
    CHECK(s < 0.5);
    CHECK(std::abs(s + 0.1 * std::log((1.0 + s) / (1.0 - s)) - 0.5) <= 1e-13);
  }

  // Monotone and 1-Lipschitz.
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const double r1 = rng.symmetric(2.0);
    const double r2 = rng.symmetric(2.0);
    const double s1 = yosida_resolvent(r1, 0.2);
    const double s2 = yosida_resolvent(r2, 0.2);
    if (r1 < r2) CHECK(s1 < s2);
    if (r1 > r2) CHECK(s1 > s2);
    CHECK(std::abs(s1 - s2) <= std::abs(r1 - r2) + 1e-14);
  }
}

TEST_CASE("yosida derivative bounds") {
  CHECK(yosida_prime(0.0, 0.3) == 0.0);

  // |F1_eps'| <= |F1'| inside (-1,1), and it grows monotonically as eps drops.
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const double r = rng.uniform(-0.95, 0.95);
    const double exact = std::log((1.0 + r) / (1.0 - r));
    const double loose = yosida_prime(r, 0.2);
    const double tight = yosida_prime(r, 0.05);
    CHECK(std::abs(loose) <= std::abs(exact) + 1e-12);
    CHECK(std::abs(tight) <= std::abs(exact) + 1e-12);
    CHECK(std::abs(loose) <= std::abs(tight) + 1e-12);
  }
  CHECK(yosida_prime(0.9, 0.1) < std::log(19.0));

  // Moreau envelope squeeze: 0 <= F1_eps <= F1.
  for (int i = 0; i < 50; ++i) {
    const double r = rng.uniform(-0.99, 0.99);
    const double f1 = (1.0 + r) * std::log(1.0 + r) + (1.0 - r) * std::log(1.0 - r);
    const double env = yosida_envelope(r, 0.1);
    CHECK(env >= -1e-14);
    CHECK(env <= f1 + 1e-12);
  }
}

TEST_CASE("yosida variant has no third derivative") {
  const PotentialSpec spec = PotentialSpec::yosida(2.0, 0.1);
  CHECK_THROWS_AS(potential_eval(spec, 0.3, 3), InvalidArgument);
}

TEST_CASE("proliferation interpolant") {
  const ProliferationH h;
  CHECK(h_eval(h, -1.0, 0) == 0.0);
  CHECK(h_eval(h, 1.0, 0) == 1.0);
  CHECK(h_eval(h, 0.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h_eval(h, -3.0, 0) == 0.0);
  CHECK(h_eval(h, 5.0, 0) == 1.0);

  // C2 clamps.
  for (double r : {-1.0, 1.0, -2.0, 2.0}) {
    CHECK(h_eval(h, r, 1) == 0.0);
    CHECK(h_eval(h, r, 2) == 0.0);
  }

  // Range and positivity on (-1, 1].
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.symmetric(3.0);
    const double v = h_eval(h, r, 0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (r > -1.0 + 1e-12) CHECK(h_eval(h, std::min(r, 1.0), 0) >= 0.0);
  }
  CHECK(h_eval(h, -0.999, 0) > 0.0);

  // FD consistency away from the clamp seams.
  for (int order = 1; order <= 2; ++order) {
    for (int i = 0; i < 50; ++i) {
      const double r = rng.uniform(-0.95, 0.95);
      const double fd =
          (h_eval(h, r + 1e-6, order - 1) - h_eval(h, r - 1e-6, order - 1)) / 2e-6;
      CHECK(std::abs(fd - h_eval(h, r, order)) <= 1e-6 * (1.0 + std::abs(h_eval(h, r, order))));
    }
  }

  // The derivative peaks at r = 0 with value 15/16.
  CHECK(h_eval(h, 0.0, 1) == doctest::Approx(15.0 / 16.0).epsilon(1e-15));
  CHECK(ProliferationH::hprime_inf == doctest::Approx(15.0 / 16.0));
}
