// Data-parallel inner loops used by the field containers and solvers:
// fused multiply-add updates, compensated reductions, and box clamps.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on aarch64). The
// active backend is chosen once at runtime: explicitly via select_backend(),
// via the TGC_KERNELS environment variable ("scalar", "simd", "auto"), or by
// CPU detection. Elementwise kernels are bit-identical across backends (both
// sides use fused multiply-add); reductions are compensated (Neumaier) in
// every backend and agree to a few ulps. tests/test_kernels.cpp pins both
// statements down.
#pragma once

#include <cstddef>
#include <string>

namespace tgc::kernels {

struct Backend {
  const char* name;
  // y[i] += a*x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // y[i] = a*x[i] + b*y[i]
  void (*axpby)(std::size_t n, double a, const double* x, double b, double* y);
  // x[i] *= a
  void (*scal)(std::size_t n, double a, double* x);
  // out[i] = min(hi, max(lo, x[i]))
  void (*clamp)(std::size_t n, const double* x, double lo, double hi, double* out);
  // sum_i x[i]*y[i], compensated
  double (*dot)(std::size_t n, const double* x, const double* y);
  // sum_i x[i], compensated
  double (*sum)(std::size_t n, const double* x);
  // sum_i (x[i]-y[i])^2, compensated
  double (*diff_norm2)(std::size_t n, const double* x, const double* y);
  // min/max over x
  void (*minmax)(std::size_t n, const double* x, double* mn, double* mx);
};

// The scalar reference backend (always available).
const Backend& scalar_backend();

// The SIMD backend for this target, or nullptr if the build has none or the
// CPU lacks the required features.
const Backend* simd_backend();

// Currently active backend. Defaults to "auto" resolution on first use.
const Backend& active();

// Select by name: "scalar", "simd", or "auto". Throws InvalidArgument for
// unknown names or when "simd" is requested but unavailable.
void select_backend(const std::string& name);

// Convenience forwarders through the active backend.
inline void axpy(std::size_t n, double a, const double* x, double* y) { active().axpy(n, a, x, y); }
inline void axpby(std::size_t n, double a, const double* x, double b, double* y) {
  active().axpby(n, a, x, b, y);
}
inline void scal(std::size_t n, double a, double* x) { active().scal(n, a, x); }
inline void clamp(std::size_t n, const double* x, double lo, double hi, double* out) {
  active().clamp(n, x, lo, hi, out);
}
inline double dot(std::size_t n, const double* x, const double* y) { return active().dot(n, x, y); }
inline double sum(std::size_t n, const double* x) { return active().sum(n, x); }
inline double diff_norm2(std::size_t n, const double* x, const double* y) {
  return active().diff_norm2(n, x, y);
}
inline void minmax(std::size_t n, const double* x, double* mn, double* mx) {
  active().minmax(n, x, mn, mx);
}

}  // namespace tgc::kernels
