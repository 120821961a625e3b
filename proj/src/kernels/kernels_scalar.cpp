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

#include <limits>

#include "kernels_internal.h"

namespace refrain::kernels {
namespace {

double dot_ref(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_norm_ref(const double* a, std::size_t n) {
  return dot_ref(a, a, n);
}

void scale_ref(double* a, std::size_t n, double factor) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= factor;
}

double max_dot_ref(const double* query, const double* rows, std::size_t dim,
                   std::size_t n_rows) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n_rows; ++r) {
    double d = dot_ref(query, rows + r * dim, dim);
    if (d > best) best = d;
  }
  return best;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_ref, squared_norm_ref, scale_ref,
                                 max_dot_ref};
  return table;
}

}  // namespace refrain::kernels
