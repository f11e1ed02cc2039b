#include "tgc/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>

#include "tgc/errors.hpp"

#if defined(__aarch64__) || defined(__ARM_NEON)
#include <arm_neon.h>
#define TGC_HAVE_NEON 1
#else
#define TGC_HAVE_NEON 0
#endif

namespace tgc::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels. std::fma is used wherever the SIMD variants fuse,
// so elementwise results match the vector paths bit for bit.
// ---------------------------------------------------------------------------

namespace {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpby_scalar(std::size_t n, double a, const double* x, double b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], b * y[i]);
}

void scal_scalar(std::size_t n, double a, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void clamp_scalar(std::size_t n, const double* x, double lo, double hi, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    v = v < lo ? lo : v;
    v = v > hi ? hi : v;
    out[i] = v;
  }
}

// Neumaier-compensated accumulation: the running error term absorbs the
// rounding of each addition regardless of operand magnitudes.
struct Compensated {
  double s = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double result() const { return s + c; }
};

double dot_scalar(std::size_t n, const double* x, const double* y) {
  Compensated acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i] * y[i]);
  return acc.result();
}

double sum_scalar(std::size_t n, const double* x) {
  Compensated acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
  return acc.result();
}

double diff_norm2_scalar(std::size_t n, const double* x, const double* y) {
  Compensated acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc.add(d * d);
  }
  return acc.result();
}

void minmax_scalar(std::size_t n, const double* x, double* mn, double* mx) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lo = x[i] < lo ? x[i] : lo;
    hi = x[i] > hi ? x[i] : hi;
  }
  *mn = lo;
  *mx = hi;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{"scalar",     axpy_scalar, axpby_scalar,      scal_scalar,
                         clamp_scalar, dot_scalar,  sum_scalar,        diff_norm2_scalar,
                         minmax_scalar};
  return b;
}

// ---------------------------------------------------------------------------
// NEON kernels (aarch64). Two-lane doubles; fused ops mirror the scalar fma.
// ---------------------------------------------------------------------------

#if TGC_HAVE_NEON

namespace {

void axpy_neon(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpby_neon(std::size_t n, double a, const double* x, double b, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(y + i, vfmaq_f64(by, va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], b * y[i]);
}

void scal_neon(std::size_t n, double a, double* x) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void clamp_neon(std::size_t n, const double* x, double lo, double hi, double* out) {
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vminq_f64(vhi, vmaxq_f64(vlo, vld1q_f64(x + i))));
  for (; i < n; ++i) {
    double v = x[i];
    v = v < lo ? lo : v;
    v = v > hi ? hi : v;
    out[i] = v;
  }
}

double dot_neon(std::size_t n, const double* x, const double* y) {
  Compensated lane0, lane1;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t p = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    lane0.add(vgetq_lane_f64(p, 0));
    lane1.add(vgetq_lane_f64(p, 1));
  }
  Compensated total;
  total.add(lane0.result());
  total.add(lane1.result());
  for (; i < n; ++i) total.add(x[i] * y[i]);
  return total.result();
}

double sum_neon(std::size_t n, const double* x) {
  Compensated acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
  return acc.result();
}

double diff_norm2_neon(std::size_t n, const double* x, const double* y) {
  Compensated lane0, lane1;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    const float64x2_t p = vmulq_f64(d, d);
    lane0.add(vgetq_lane_f64(p, 0));
    lane1.add(vgetq_lane_f64(p, 1));
  }
  Compensated total;
  total.add(lane0.result());
  total.add(lane1.result());
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    total.add(d * d);
  }
  return total.result();
}

void minmax_neon(std::size_t n, const double* x, double* mn, double* mx) {
  float64x2_t vlo = vdupq_n_f64(std::numeric_limits<double>::infinity());
  float64x2_t vhi = vdupq_n_f64(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    vlo = vminq_f64(vlo, v);
    vhi = vmaxq_f64(vhi, v);
  }
  double lo = std::min(vgetq_lane_f64(vlo, 0), vgetq_lane_f64(vlo, 1));
  double hi = std::max(vgetq_lane_f64(vhi, 0), vgetq_lane_f64(vhi, 1));
  for (; i < n; ++i) {
    lo = x[i] < lo ? x[i] : lo;
    hi = x[i] > hi ? x[i] : hi;
  }
  *mn = lo;
  *mx = hi;
}

const Backend neon_backend{"neon",     axpy_neon, axpby_neon,      scal_neon,
                           clamp_neon, dot_neon,  sum_neon,        diff_norm2_neon,
                           minmax_neon};

}  // namespace

#endif  // TGC_HAVE_NEON

#if defined(TGC_HAVE_AVX2_TU)
// Defined in kernels_avx2.cpp, compiled with -mavx2 -mfma.
const Backend* avx2_backend_if_supported();
#endif

const Backend* simd_backend() {
#if defined(TGC_HAVE_AVX2_TU)
  return avx2_backend_if_supported();
#elif TGC_HAVE_NEON
  return &neon_backend;
#else
  return nullptr;
#endif
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

namespace {

const Backend* g_active = nullptr;
std::mutex g_select_mutex;

const Backend* resolve_auto() {
  if (const Backend* simd = simd_backend()) return simd;
  return &scalar_backend();
}

}  // namespace

const Backend& active() {
  if (g_active == nullptr) {
    std::lock_guard<std::mutex> lock(g_select_mutex);
    if (g_active == nullptr) {
      const char* env = std::getenv("TGC_KERNELS");
      std::string name = env ? env : "auto";
      if (name == "scalar")
        g_active = &scalar_backend();
      else if (name == "simd" && simd_backend() != nullptr)
        g_active = simd_backend();
      else
        g_active = resolve_auto();
    }
  }
  return *g_active;
}

void select_backend(const std::string& name) {
  std::lock_guard<std::mutex> lock(g_select_mutex);
  if (name == "scalar") {
    g_active = &scalar_backend();
  } else if (name == "simd") {
    const Backend* simd = simd_backend();
    if (simd == nullptr) throw InvalidArgument("kernels: no SIMD backend available on this CPU");
    g_active = simd;
  } else if (name == "auto") {
    g_active = resolve_auto();
  } else {
    throw InvalidArgument("kernels: unknown backend '" + name + "'");
  }
}

}  // namespace tgc::kernels
