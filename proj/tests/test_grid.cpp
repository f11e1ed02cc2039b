#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tgc/errors.hpp"
#include "tgc/grid.hpp"
#include "tgc/rng.hpp"

using namespace tgc;

namespace {

Field random_field(const Domain& domain, Rng& rng, double amp = 1.0) {
  Field f(domain);
  for (std::int64_t i = 0; i < f.size(); ++i) f[i] = rng.symmetric(amp);
  return f;
}

}  // namespace

TEST_CASE("build_domain") {
  const Domain d1 = build_domain(1, {1.0, 0.0}, {8, 0});
  CHECK(d1.cell_size(0) == doctest::Approx(0.125));
  CHECK(d1.cell_count() == 8);

  const Domain d2 = build_domain(2, {1.0, 2.0}, {4, 8});
  CHECK(d2.cell_size(0) == doctest::Approx(0.25));
  CHECK(d2.cell_size(1) == doctest::Approx(0.25));
  CHECK(d2.cell_count() == 32);
  CHECK(d2.cell_volume() == doctest::Approx(0.0625));

  CHECK_THROWS_WITH_AS(build_domain(3, {1.0, 1.0}, {4, 4}), doctest::Contains("invalid-dimension"),
                       InvalidArgument);
  CHECK_THROWS_WITH_AS(build_domain(1, {-1.0, 0.0}, {4, 0}),
                       doctest::Contains("nonpositive-length"), InvalidArgument);
  CHECK_THROWS_WITH_AS(build_domain(1, {1.0, 0.0}, {1, 0}),
                       doctest::Contains("cell-count-too-small"), InvalidArgument);
}

TEST_CASE("laplacian kernel and eigenpair") {
  const Domain d = build_domain(1, {1.0, 0.0}, {32, 0});
  const SparseOperator L = assemble_neumann_laplacian(d);

  Field c(d, 3.7);
  const Field Lc = L.apply(c);
  for (std::int64_t i = 0; i < Lc.size(); ++i) CHECK(Lc[i] == 0.0);

  // Discrete eigenpair of the reflection stencil: f_j = cos(pi x_j) at cell
  // centers has eigenvalue -(2/dx^2)(1 - cos(pi dx)).
  const double dx = d.cell_size(0);
  Field f(d);
  for (std::int64_t i = 0; i < f.size(); ++i)
    f[i] = std::cos(std::numbers::pi * d.center(i, 0));
  const double lambda = -(2.0 / (dx * dx)) * (1.0 - std::cos(std::numbers::pi * dx));
  const Field Lf = L.apply(f);
  for (std::int64_t i = 0; i < f.size(); ++i)
    CHECK(Lf[i] == doctest::Approx(lambda * f[i]).epsilon(1e-10));
}

TEST_CASE("laplacian row and column sums vanish") {
  for (int dim : {1, 2}) {
    const Domain d = dim == 1 ? build_domain(1, {1.0, 0.0}, {32, 0})
                              : build_domain(2, {1.0, 2.0}, {8, 12});
    const SparseOperator L = assemble_neumann_laplacian(d);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      const Field f = random_field(d, rng);
      const double mass = integrate(L.apply(f));
      CHECK(std::abs(mass) <= 1e-13 * (1.0 + l2_norm(f)));
    }
  }
}

TEST_CASE("laplacian symmetry and negative semidefiniteness") {
  for (int dim : {1, 2}) {
    const Domain d = dim == 1 ? build_domain(1, {2.0, 0.0}, {24, 0})
                              : build_domain(2, {1.0, 1.0}, {9, 7});
    const SparseOperator L = assemble_neumann_laplacian(d);
    CHECK(L.symmetric);
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const Field f = random_field(d, rng);
      const Field g = random_field(d, rng);
      const double lhs = inner_product(L.apply(f), g);
      const double rhs = inner_product(f, L.apply(g));
      CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + l2_norm(f) * l2_norm(g)));
      CHECK(inner_product(L.apply(f), f) <= 1e-13 * (1.0 + l2_norm(f) * l2_norm(f)));
    }
  }
}

TEST_CASE("laplacian consistency order") {
  // f(x) = cos(2 pi x) has zero boundary slope; the ghost-reflection stencil
  // must hit the continuous Laplacian at second order.
  auto max_error = [](std::int64_t n) {
    const Domain d = build_domain(1, {1.0, 0.0}, {n, 0});
    const SparseOperator L = assemble_neumann_laplacian(d);
    Field f(d);
    for (std::int64_t i = 0; i < n; ++i)
      f[i] = std::cos(2.0 * std::numbers::pi * d.center(i, 0));
    const Field Lf = L.apply(f);
    double err = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double exact = -4.0 * std::numbers::pi * std::numbers::pi * f[i];
      err = std::max(err, std::abs(Lf[i] - exact));
    }
    return err;
  };
  const double order = std::log2(max_error(32) / max_error(64));
  CHECK(order >= 1.9);
}

TEST_CASE("inner products and integrate") {
  const Domain d = build_domain(1, {1.0, 0.0}, {16, 0});
  Field one(d, 1.0);
  CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate(Field(d, 2.5)) == doctest::Approx(2.5).epsilon(1e-14));

  // Midpoint rule is exact for linear integrands.
  Field x(d);
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = d.center(i, 0);
  CHECK(integrate(x) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(9);
  const Field f = random_field(d, rng);
  CHECK(inner_product(f, f) >= 0.0);
  Field zero(d);
  CHECK(inner_product(zero, zero) == 0.0);

  const Domain other = build_domain(1, {1.0, 0.0}, {8, 0});
  CHECK_THROWS_AS(inner_product(f, Field(other)), DomainMismatch);
}

TEST_CASE("field container") {
  const Domain d = build_domain(2, {1.0, 1.0}, {4, 4});
  Field f(d, 2.0);
  Field g(d, 1.0);
  f.add_scaled(3.0, g);  // 2 + 3
  CHECK(f[0] == doctest::Approx(5.0));
  f.combine(1.0, g, -1.0);  // 1 - 5
  CHECK(f[5] == doctest::Approx(-4.0));
  f.clamp(-1.0, 1.0);
  CHECK(f.min() == -1.0);
  CHECK(f.max() == -1.0);
  CHECK(f.all_finite());
  CHECK_THROWS_AS(Field(d, Vector::Zero(3)), ShapeMismatch);
}
