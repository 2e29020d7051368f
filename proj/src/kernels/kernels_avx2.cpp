// Compiled with -mavx2 on x86; see CMakeLists. The scalar backend in
// kernels.cpp remains the reference implementation.

#include "kernels_detail.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace roomfit::kernels::detail {

namespace {

void v_min_inplace(float* dst, const float* src, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(dst + i);
    const __m256 b = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(dst + i, _mm256_min_ps(a, b));
  }
  for (; i < n; ++i) dst[i] = std::min(dst[i], src[i]);
}

void v_max_inplace(float* dst, const float* src, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(dst + i);
    const __m256 b = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(dst + i, _mm256_max_ps(a, b));
  }
  for (; i < n; ++i) dst[i] = std::max(dst[i], src[i]);
}

// adds the four lanes in a fixed order so results are reproducible
double hsum(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

double v_sum_sq_neg(const float* v, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  const __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 x = _mm256_loadu_ps(v + i);
    const __m256 neg = _mm256_and_ps(x, _mm256_cmp_ps(x, zero, _CMP_LT_OQ));
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(neg));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(neg, 1));
    acc0 = _mm256_fmadd_pd(lo, lo, acc0);
    acc1 = _mm256_fmadd_pd(hi, hi, acc1);
  }
  double acc = hsum(acc0) + hsum(acc1);
  for (; i < n; ++i)
    if (v[i] < 0.0f) acc += static_cast<double>(v[i]) * static_cast<double>(v[i]);
  return acc;
}

MaskedDiff v_masked_sq_diff(const float* a, const float* b, const uint8_t* ignore, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  int64_t count = 0;
  size_t i = 0;
  const __m128i zero8 = _mm_setzero_si128();
  for (; i + 8 <= n; i += 8) {
    const __m128i ig = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(ignore + i));
    const __m256i keep32 = _mm256_cvtepu8_epi32(_mm_cmpeq_epi8(ig, zero8));
    const __m256 keep = _mm256_castsi256_ps(_mm256_cmpeq_epi32(keep32, _mm256_set1_epi32(255)));
    const __m256 diff =
        _mm256_and_ps(_mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)), keep);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(diff));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(diff, 1));
    acc0 = _mm256_fmadd_pd(lo, lo, acc0);
    acc1 = _mm256_fmadd_pd(hi, hi, acc1);
    count += _mm_popcnt_u32(static_cast<unsigned>(_mm256_movemask_ps(keep)));
  }
  MaskedDiff out;
  out.sum = hsum(acc0) + hsum(acc1);
  out.count = count;
  for (; i < n; ++i) {
    if (ignore[i]) continue;
    const double d = static_cast<double>(a[i] - b[i]);
    out.sum += d * d;
    ++out.count;
  }
  return out;
}

HingeSum v_depth_hinge(const float* d, const float* near_bound, const float* far_bound,
                       const uint8_t* sel, size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  const __m256 inf = _mm256_set1_ps(std::numeric_limits<float>::infinity());
  const __m256 absmask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  const __m128i zero8 = _mm_setzero_si128();
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  int64_t count = 0;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i sb = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(sel + i));
    const __m256i sel32 = _mm256_cvtepu8_epi32(_mm_cmpeq_epi8(sb, zero8));
    // selected where the byte was non-zero, i.e. cmpeq-with-zero failed
    const __m256 selected =
        _mm256_castsi256_ps(_mm256_cmpeq_epi32(sel32, _mm256_setzero_si256()));
    const __m256 dv = _mm256_loadu_ps(d + i);
    const __m256 nb = _mm256_loadu_ps(near_bound + i);
    const __m256 fb = _mm256_loadu_ps(far_bound + i);
    const __m256 dfin = _mm256_cmp_ps(_mm256_and_ps(dv, absmask), inf, _CMP_LT_OQ);
    const __m256 nfin = _mm256_cmp_ps(_mm256_and_ps(nb, absmask), inf, _CMP_LT_OQ);
    const __m256 ffin = _mm256_cmp_ps(_mm256_and_ps(fb, absmask), inf, _CMP_LT_OQ);
    const __m256 active =
        _mm256_and_ps(_mm256_and_ps(selected, dfin), _mm256_or_ps(nfin, ffin));
    const __m256 over = _mm256_max_ps(zero, _mm256_sub_ps(dv, fb));
    const __m256 under = _mm256_max_ps(zero, _mm256_sub_ps(nb, dv));
    const __m256 h = _mm256_and_ps(_mm256_add_ps(over, under), active);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(h)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(h, 1)));
    count += _mm_popcnt_u32(static_cast<unsigned>(_mm256_movemask_ps(active)));
  }
  HingeSum out;
  out.sum = hsum(acc0) + hsum(acc1);
  out.count = count;
  for (; i < n; ++i) {
    if (!sel[i]) continue;
    const float dvs = d[i];
    if (!std::isfinite(dvs)) continue;
    if (!std::isfinite(near_bound[i]) && !std::isfinite(far_bound[i])) continue;
    const float over = std::max(0.0f, dvs - far_bound[i]);
    const float under = std::max(0.0f, near_bound[i] - dvs);
    out.sum += static_cast<double>(over + under);
    ++out.count;
  }
  return out;
}

}  // namespace

const Backend* avx2_backend() {
  static const Backend b{v_min_inplace, v_max_inplace, v_sum_sq_neg,
                         v_masked_sq_diff, v_depth_hinge, "avx2"};
  static const bool supported = __builtin_cpu_supports("avx2") &&
                                __builtin_cpu_supports("fma") &&
                                __builtin_cpu_supports("popcnt");
  return supported ? &b : nullptr;
}

}  // namespace roomfit::kernels::detail

#else  // !__AVX2__

namespace roomfit::kernels::detail {
const Backend* avx2_backend() { return nullptr; }
}  // namespace roomfit::kernels::detail

#endif
