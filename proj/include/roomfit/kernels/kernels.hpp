#pragma once

#include <cstddef>
#include <cstdint>

namespace roomfit::kernels {

// Elementwise float kernels behind runtime CPU dispatch (AVX2 when the
// machine supports it, scalar otherwise). Scalar and vector variants are
// equivalence-tested; reductions accumulate in double.

// dst[i] = min(dst[i], src[i]); max_inplace analogous
void min_inplace(float* dst, const float* src, size_t n);
void max_inplace(float* dst, const float* src, size_t n);

// sum of v[i]^2 over entries with v[i] < 0
double sum_sq_neg(const float* v, size_t n);

struct MaskedDiff {
  double sum = 0.0;     // sum of (a-b)^2 where ignore == 0
  int64_t count = 0;    // entries considered
};
MaskedDiff masked_sq_diff(const float* a, const float* b, const uint8_t* ignore, size_t n);

struct HingeSum {
  double sum = 0.0;     // max(0, d-far) + max(0, near-d) over counted pixels
  int64_t count = 0;    // selected pixels with finite d and at least one finite bound
};
// near uses -inf when absent, far uses +inf; sel != 0 selects a pixel
HingeSum depth_hinge(const float* d, const float* near_bound, const float* far_bound,
                     const uint8_t* sel, size_t n);

const char* active_backend();  // "avx2" or "scalar"
void force_scalar(bool on);    // test hook

}  // namespace roomfit::kernels
