// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma;
// nothing in it may run before dispatch.cpp has confirmed CPU support.

#include "gkt/simd.hpp"

#if defined(GKT_HAVE_AVX2_TU) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace gkt::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// exp(x) for x in [-708.39, 709]; x below that range flushes to 0.
// Range reduction x = k ln2 + r with |r| <= ln2/2, then the degree-13 Taylor
// polynomial of e^r (truncation error < 5e-18 relative) and scaling by 2^k.
inline __m256d exp_pd(__m256d x) {
  const __m256d lower = _mm256_set1_pd(-708.3964185322641);
  const __m256d upper = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lower), upper);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m256i k64 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(k));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

double sqdist(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; k + 4 <= len; k += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < len; ++k) {
    const double diff = a[k] - b[k];
    total += diff * diff;
  }
  return total;
}

void sqdist_rows(const double* x, const double* rows, std::size_t count, std::size_t d,
                 double* out) {
  if (d >= 4) {
    for (std::size_t r = 0; r < count; ++r) out[r] = sqdist(x, rows + r * d, d);
    return;
  }
  // Low dimension: vectorize across four rows at a time.
  std::size_t r = 0;
  for (; r + 4 <= count; r += 4) {
    const double* base = rows + r * d;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const __m256d v = _mm256_set_pd(base[3 * d + k], base[2 * d + k], base[d + k], base[k]);
      const __m256d diff = _mm256_sub_pd(v, _mm256_set1_pd(x[k]));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out + r, acc);
  }
  for (; r < count; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = rows[r * d + k] - x[k];
      acc += diff * diff;
    }
    out[r] = acc;
  }
}

void exp_neg_scaled(const double* src, double* dst, std::size_t len, double scale) {
  const __m256d neg = _mm256_set1_pd(-scale);
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4)
    _mm256_storeu_pd(dst + k, exp_pd(_mm256_mul_pd(neg, _mm256_loadu_pd(src + k))));
  if (k < len) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; k + t < len; ++t) buf[t] = src[k + t];
    alignas(32) double res[4];
    _mm256_store_pd(res, exp_pd(_mm256_mul_pd(neg, _mm256_load_pd(buf))));
    for (std::size_t t = 0; k + t < len; ++t) dst[k + t] = res[t];
  }
}

double exp_neg_scaled_sum(const double* src, std::size_t len, double scale) {
  const __m256d neg = _mm256_set1_pd(-scale);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    acc0 = _mm256_add_pd(acc0, exp_pd(_mm256_mul_pd(neg, _mm256_loadu_pd(src + k))));
    acc1 = _mm256_add_pd(acc1, exp_pd(_mm256_mul_pd(neg, _mm256_loadu_pd(src + k + 4))));
  }
  for (; k + 4 <= len; k += 4)
    acc0 = _mm256_add_pd(acc0, exp_pd(_mm256_mul_pd(neg, _mm256_loadu_pd(src + k))));
  double total = hsum(_mm256_add_pd(acc0, acc1));
  if (k < len) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; k + t < len; ++t) buf[t] = src[k + t];
    alignas(32) double res[4];
    _mm256_store_pd(res, exp_pd(_mm256_mul_pd(neg, _mm256_load_pd(buf))));
    for (std::size_t t = 0; k + t < len; ++t) total += res[t];
  }
  return total;
}

double dot(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= len; k += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < len; ++k) total += a[k] * b[k];
  return total;
}

double sum(const double* a, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + k));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + k + 4));
  }
  for (; k + 4 <= len; k += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + k));
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < len; ++k) total += a[k];
  return total;
}

void gather(const double* row, const std::uint32_t* idx, std::size_t len, double* out) {
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    _mm256_storeu_pd(out + k, _mm256_i32gather_pd(row, vi, 8));
  }
  for (; k < len; ++k) out[k] = row[idx[k]];
}

void gather_add(const double* row, const std::uint32_t* idx, std::size_t len, double* acc) {
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    const __m256d g = _mm256_i32gather_pd(row, vi, 8);
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), g));
  }
  for (; k < len; ++k) acc[k] += row[idx[k]];
}

}  // namespace

const KernelTable* avx2_kernels_impl() noexcept {
  static const KernelTable table{sqdist, sqdist_rows, exp_neg_scaled, exp_neg_scaled_sum,
                                 dot,    sum,         gather,         gather_add};
  return &table;
}

}  // namespace gkt::simd

#else

namespace gkt::simd {
const KernelTable* avx2_kernels_impl() noexcept { return nullptr; }
}  // namespace gkt::simd

#endif
