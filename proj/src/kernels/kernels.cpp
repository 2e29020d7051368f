#include "roomfit/kernels/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "kernels_detail.hpp"

namespace roomfit::kernels {

namespace detail {

namespace {

void s_min_inplace(float* dst, const float* src, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = std::min(dst[i], src[i]);
}

void s_max_inplace(float* dst, const float* src, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = std::max(dst[i], src[i]);
}

double s_sum_sq_neg(const float* v, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (v[i] < 0.0f) acc += static_cast<double>(v[i]) * static_cast<double>(v[i]);
  return acc;
}

MaskedDiff s_masked_sq_diff(const float* a, const float* b, const uint8_t* ignore, size_t n) {
  MaskedDiff out;
  for (size_t i = 0; i < n; ++i) {
    if (ignore[i]) continue;
    // element op at float precision, accumulation in double: every backend
    // computes the same per-element term
    const double d = static_cast<double>(a[i] - b[i]);
    out.sum += d * d;
    ++out.count;
  }
  return out;
}

HingeSum s_depth_hinge(const float* d, const float* near_bound, const float* far_bound,
                       const uint8_t* sel, size_t n) {
  HingeSum out;
  for (size_t i = 0; i < n; ++i) {
    if (!sel[i]) continue;
    const float dv = d[i];
    if (!std::isfinite(dv)) continue;
    if (!std::isfinite(near_bound[i]) && !std::isfinite(far_bound[i])) continue;
    const float over = std::max(0.0f, dv - far_bound[i]);
    const float under = std::max(0.0f, near_bound[i] - dv);
    out.sum += static_cast<double>(over + under);
    ++out.count;
  }
  return out;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{s_min_inplace, s_max_inplace, s_sum_sq_neg,
                         s_masked_sq_diff, s_depth_hinge, "scalar"};
  return b;
}

}  // namespace detail

namespace {

std::atomic<bool> g_force_scalar{false};

const detail::Backend& active() {
  if (!g_force_scalar.load(std::memory_order_relaxed)) {
    if (const detail::Backend* v = detail::avx2_backend()) return *v;
  }
  return detail::scalar_backend();
}

}  // namespace

void min_inplace(float* dst, const float* src, size_t n) { active().min_inplace(dst, src, n); }
void max_inplace(float* dst, const float* src, size_t n) { active().max_inplace(dst, src, n); }
double sum_sq_neg(const float* v, size_t n) { return active().sum_sq_neg(v, n); }
MaskedDiff masked_sq_diff(const float* a, const float* b, const uint8_t* ignore, size_t n) {
  return active().masked_sq_diff(a, b, ignore, n);
}
HingeSum depth_hinge(const float* d, const float* near_bound, const float* far_bound,
                     const uint8_t* sel, size_t n) {
  return active().depth_hinge(d, near_bound, far_bound, sel, n);
}

const char* active_backend() { return active().name; }
void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

}  // namespace roomfit::kernels
