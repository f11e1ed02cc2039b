// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here runs unless the CPU reports both features.
#include <immintrin.h>

#include <cmath>
#include <limits>

#include "tgc/kernels.hpp"

namespace tgc::kernels {

namespace {

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpby_avx2(std::size_t n, double a, const double* x, double b, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], b * y[i]);
}

void scal_avx2(std::size_t n, double a, double* x) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void clamp_avx2(std::size_t n, const double* x, double lo, double hi, double* out) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_min_pd(vhi, _mm256_max_pd(vlo, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) {
    double v = x[i];
    v = v < lo ? lo : v;
    v = v > hi ? hi : v;
    out[i] = v;
  }
}

// Vectorized Neumaier accumulation: four independent compensated lanes,
// merged by a scalar compensated pass at the end.
struct CompensatedLanes {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();

  void add(__m256d v) {
    const __m256d t = _mm256_add_pd(s, v);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
    const __m256d abs_s = _mm256_and_pd(s, abs_mask);
    const __m256d abs_v = _mm256_and_pd(v, abs_mask);
    // |s| >= |v| ? (s - t) + v : (v - t) + s
    const __m256d big_s = _mm256_add_pd(_mm256_sub_pd(s, t), v);
    const __m256d big_v = _mm256_add_pd(_mm256_sub_pd(v, t), s);
    const __m256d mask = _mm256_cmp_pd(abs_s, abs_v, _CMP_GE_OQ);
    c = _mm256_add_pd(c, _mm256_blendv_pd(big_v, big_s, mask));
    s = t;
  }

  void merge(double& total_s, double& total_c) const {
    alignas(32) double ls[4];
    alignas(32) double lc[4];
    _mm256_store_pd(ls, s);
    _mm256_store_pd(lc, c);
    for (int k = 0; k < 4; ++k) {
      const double v = ls[k] + lc[k];
      const double t = total_s + v;
      if (std::abs(total_s) >= std::abs(v))
        total_c += (total_s - t) + v;
      else
        total_c += (v - t) + total_s;
      total_s = t;
    }
  }
};

void scalar_comp_add(double& s, double& c, double v) {
  const double t = s + v;
  if (std::abs(s) >= std::abs(v))
    c += (s - t) + v;
  else
    c += (v - t) + s;
  s = t;
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  CompensatedLanes lanes;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    lanes.add(_mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = 0.0, c = 0.0;
  lanes.merge(s, c);
  for (; i < n; ++i) scalar_comp_add(s, c, x[i] * y[i]);
  return s + c;
}

double sum_avx2(std::size_t n, const double* x) {
  CompensatedLanes lanes;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) lanes.add(_mm256_loadu_pd(x + i));
  double s = 0.0, c = 0.0;
  lanes.merge(s, c);
  for (; i < n; ++i) scalar_comp_add(s, c, x[i]);
  return s + c;
}

double diff_norm2_avx2(std::size_t n, const double* x, const double* y) {
  CompensatedLanes lanes;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    lanes.add(_mm256_mul_pd(d, d));
  }
  double s = 0.0, c = 0.0;
  lanes.merge(s, c);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    scalar_comp_add(s, c, d * d);
  }
  return s + c;
}

void minmax_avx2(std::size_t n, const double* x, double* mn, double* mx) {
  __m256d vlo = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d vhi = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    vlo = _mm256_min_pd(vlo, v);
    vhi = _mm256_max_pd(vhi, v);
  }
  alignas(32) double ls[4];
  alignas(32) double lh[4];
  _mm256_store_pd(ls, vlo);
  _mm256_store_pd(lh, vhi);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    lo = ls[k] < lo ? ls[k] : lo;
    hi = lh[k] > hi ? lh[k] : hi;
  }
  for (; i < n; ++i) {
    lo = x[i] < lo ? x[i] : lo;
    hi = x[i] > hi ? x[i] : hi;
  }
  *mn = lo;
  *mx = hi;
}

const Backend avx2_backend{"avx2",     axpy_avx2, axpby_avx2,      scal_avx2,
                           clamp_avx2, dot_avx2,  sum_avx2,        diff_norm2_avx2,
                           minmax_avx2};

}  // namespace

const Backend* avx2_backend_if_supported() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_backend;
  return nullptr;
}

}  // namespace tgc::kernels
