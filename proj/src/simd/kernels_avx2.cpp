// Compiled with -mavx2 only; callers reach it through avx2_kernels() after
// a CPUID check.
#include "bcmf/simd/kernels.hpp"

#include <immintrin.h>

namespace bcmf::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

double horizontal_sum(__m256d v) {
  // ((l0 + l2) + (l1 + l3)), fixed order
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

void partial_residual(cspan y, cspan s, cspan total, cspan own, mspan out) {
  const std::size_t n = y.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d others = _mm256_sub_pd(_mm256_loadu_pd(&total[i]), _mm256_loadu_pd(&own[i]));
    const __m256d scaled = _mm256_mul_pd(_mm256_loadu_pd(&s[i]), others);
    _mm256_storeu_pd(&out[i], _mm256_sub_pd(_mm256_loadu_pd(&y[i]), scaled));
  }
  for (; i < n; ++i) {
    const double others = total[i] - own[i];
    const double scaled = s[i] * others;
    out[i] = y[i] - scaled;
  }
}

void residual2(cspan y, cspan s1, cspan f1, cspan s2, cspan f2, mspan out) {
  const std::size_t n = y.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(&s1[i]), _mm256_loadu_pd(&f1[i]));
    const __m256d p2 = _mm256_mul_pd(_mm256_loadu_pd(&s2[i]), _mm256_loadu_pd(&f2[i]));
    const __m256d r = _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(&y[i]), p1), p2);
    _mm256_storeu_pd(&out[i], r);
  }
  for (; i < n; ++i) {
    const double p1 = s1[i] * f1[i];
    const double p2 = s2[i] * f2[i];
    out[i] = (y[i] - p1) - p2;
  }
}

void multiply(cspan a, cspan b, mspan out) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i])));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void replace_component(mspan total, cspan fresh, cspan stale) {
  const std::size_t n = total.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d delta = _mm256_sub_pd(_mm256_loadu_pd(&fresh[i]), _mm256_loadu_pd(&stale[i]));
    _mm256_storeu_pd(&total[i], _mm256_add_pd(_mm256_loadu_pd(&total[i]), delta));
  }
  for (; i < n; ++i) {
    const double delta = fresh[i] - stale[i];
    total[i] = total[i] + delta;
  }
}

double scaled_sse(cspan y, cspan s, cspan fit) {
  const std::size_t n = y.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d e = _mm256_sub_pd(_mm256_loadu_pd(&y[i]),
                                    _mm256_mul_pd(_mm256_loadu_pd(&s[i]), _mm256_loadu_pd(&fit[i])));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(e, e));
  }
  double total = horizontal_sum(acc);
  for (; i < n; ++i) {
    const double e = y[i] - s[i] * fit[i];
    total += e * e;
  }
  return total;
}

double dot(cspan a, cspan b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i])));
  }
  double total = horizontal_sum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum(cspan a) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(&a[i]));
  double total = horizontal_sum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", partial_residual, residual2, multiply,
                             replace_component, scaled_sse, dot, sum};
  return t;
}

}  // namespace bcmf::simd::avx2
