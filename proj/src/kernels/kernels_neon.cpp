/* Copyright 2026 The REFRAIN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "kernels_internal.h"

#ifdef REFRAIN_HAVE_NEON_KERNELS

#include <arm_neon.h>

#include <limits>

namespace refrain::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_norm_neon(const double* a, std::size_t n) {
  return dot_neon(a, a, n);
}

void scale_neon(double* a, std::size_t n, double factor) {
  const float64x2_t f = vdupq_n_f64(factor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), f));
  for (; i < n; ++i) a[i] *= factor;
}

double max_dot_neon(const double* query, const double* rows, std::size_t dim,
                    std::size_t n_rows) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n_rows; ++r) {
    double d = dot_neon(query, rows + r * dim, dim);
    if (d > best) best = d;
  }
  return best;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{dot_neon, squared_norm_neon, scale_neon,
                                 max_dot_neon};
  return table;
}

}  // namespace refrain::kernels::detail

#endif  // REFRAIN_HAVE_NEON_KERNELS
