#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "tgc/errors.hpp"
#include "tgc/kernels.hpp"
#include "tgc/rng.hpp"

using namespace tgc;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double amp = 3.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.symmetric(amp);
  return v;
}

}  // namespace

TEST_CASE("backend selection") {
  kernels::select_backend("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_THROWS_AS(kernels::select_backend("turbo"), InvalidArgument);
  kernels::select_backend("auto");
  if (kernels::simd_backend() != nullptr)
    CHECK(std::string(kernels::active().name) != "scalar");
}

// Elementwise kernels must agree bit for bit across backends: both sides use
// fused multiply-add, and tails share the scalar code path.
TEST_CASE("elementwise equivalence scalar vs simd") {
  const kernels::Backend* simd = kernels::simd_backend();
  if (simd == nullptr) return;  // nothing to compare on this machine
  const kernels::Backend& ref = kernels::scalar_backend();
  Rng rng(42);

  for (std::size_t n : {std::size_t(1), std::size_t(4), std::size_t(7), std::size_t(64),
                        std::size_t(1023)}) {
    const std::vector<double> x = random_vec(rng, n);
    const std::vector<double> y0 = random_vec(rng, n);
    const double a = rng.symmetric(2.0), b = rng.symmetric(2.0);

    std::vector<double> ys = y0, yv = y0;
    ref.axpy(n, a, x.data(), ys.data());
    simd->axpy(n, a, x.data(), yv.data());
    CHECK(ys == yv);

    ys = y0;
    yv = y0;
    ref.axpby(n, a, x.data(), b, ys.data());
    simd->axpby(n, a, x.data(), b, yv.data());
    CHECK(ys == yv);

    ys = y0;
    yv = y0;
    ref.scal(n, a, ys.data());
    simd->scal(n, a, yv.data());
    CHECK(ys == yv);

    std::vector<double> cs(n), cv(n);
    ref.clamp(n, x.data(), -1.0, 1.0, cs.data());
    simd->clamp(n, x.data(), -1.0, 1.0, cv.data());
    CHECK(cs == cv);

    double mn_s, mx_s, mn_v, mx_v;
    ref.minmax(n, x.data(), &mn_s, &mx_s);
    simd->minmax(n, x.data(), &mn_v, &mx_v);
    CHECK(mn_s == mn_v);
    CHECK(mx_s == mx_v);
  }
}

// Reductions reassociate across lanes, so they agree to a few ulps only;
// both backends are compensated, which keeps the agreement tight.
TEST_CASE("reduction equivalence scalar vs simd") {
  const kernels::Backend* simd = kernels::simd_backend();
  if (simd == nullptr) return;
  const kernels::Backend& ref = kernels::scalar_backend();
  Rng rng(7);

  for (std::size_t n : {std::size_t(5), std::size_t(128), std::size_t(1000)}) {
    const std::vector<double> x = random_vec(rng, n);
    const std::vector<double> y = random_vec(rng, n);

    const double ds = ref.dot(n, x.data(), y.data());
    const double dv = simd->dot(n, x.data(), y.data());
    CHECK(std::abs(ds - dv) <= 1e-14 * (1.0 + std::abs(ds)));

    const double ss = ref.sum(n, x.data());
    const double sv = simd->sum(n, x.data());
    CHECK(std::abs(ss - sv) <= 1e-14 * (1.0 + std::abs(ss)));

    const double es = ref.diff_norm2(n, x.data(), y.data());
    const double ev = simd->diff_norm2(n, x.data(), y.data());
    CHECK(std::abs(es - ev) <= 1e-14 * (1.0 + std::abs(es)));
  }
}

TEST_CASE("compensated summation survives cancellation") {
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(kernels::scalar_backend().sum(v.size(), v.data()) == 2.0);
  if (const kernels::Backend* simd = kernels::simd_backend())
    CHECK(simd->sum(v.size(), v.data()) == 2.0);
}

TEST_CASE("axpy against plain arithmetic") {
  // fma(a, x, y) differs from a*x + y by less than one ulp of the result.
  Rng rng(3);
  const std::size_t n = 33;
  const std::vector<double> x = random_vec(rng, n);
  std::vector<double> y = random_vec(rng, n);
  const std::vector<double> y0 = y;
  const double a = 1.7;
  kernels::scalar_backend().axpy(n, a, x.data(), y.data());
  for (std::size_t i = 0; i < n; ++i) {
    const double plain = a * x[i] + y0[i];
    CHECK(std::abs(y[i] - plain) <= 1e-15 * (1.0 + std::abs(plain)));
  }
}
