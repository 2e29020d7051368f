#pragma once

#include "roomfit/kernels/kernels.hpp"

namespace roomfit::kernels::detail {

struct Backend {
  void (*min_inplace)(float*, const float*, size_t);
  void (*max_inplace)(float*, const float*, size_t);
  double (*sum_sq_neg)(const float*, size_t);
  MaskedDiff (*masked_sq_diff)(const float*, const float*, const uint8_t*, size_t);
  HingeSum (*depth_hinge)(const float*, const float*, const float*, const uint8_t*, size_t);
  const char* name;
};

const Backend& scalar_backend();
// null when the binary or the CPU lacks AVX2
const Backend* avx2_backend();

}  // namespace roomfit::kernels::detail
