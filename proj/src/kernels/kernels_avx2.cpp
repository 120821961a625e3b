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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "kernels_internal.h"

#ifdef REFRAIN_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <limits>

namespace refrain::kernels::detail {
namespace {

inline double horizontal_sum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_norm_avx2(const double* a, std::size_t n) {
  return dot_avx2(a, a, n);
}

void scale_avx2(double* a, std::size_t n, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), f));
  }
  for (; i < n; ++i) a[i] *= factor;
}

double max_dot_avx2(const double* query, const double* rows, std::size_t dim,
                    std::size_t n_rows) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n_rows; ++r) {
    double d = dot_avx2(query, rows + r * dim, dim);
    if (d > best) best = d;
  }
  return best;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{dot_avx2, squared_norm_avx2, scale_avx2,
                                 max_dot_avx2};
  return table;
}

}  // namespace refrain::kernels::detail

#endif  // REFRAIN_HAVE_AVX2_KERNELS
