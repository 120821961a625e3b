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

#pragma once

// Dense double-precision kernels behind the embedding similarity path.
// Each kernel has a scalar reference and vectorized variants; the active
// variant is picked at startup from the CPU's capabilities and may be
// overridden with REFRAIN_ISA=scalar|avx2|neon or set_active_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace refrain::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

bool isa_supported(Isa isa);
// Best ISA the running CPU supports.
Isa detected_isa();
Isa active_isa();
// Throws ConfigError when the ISA is not supported on this CPU or build.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void scale(std::span<double> a, double factor);
// Maximum of dot(query, row) over the row-major matrix `rows` whose row
// length is query.size(). Returns -infinity for an empty matrix.
double max_dot(std::span<const double> query, std::span<const double> rows);

// Per-ISA entry points, exposed for equivalence tests and benchmarks.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_norm)(const double* a, std::size_t n);
  void (*scale)(double* a, std::size_t n, double factor);
  double (*max_dot)(const double* query, const double* rows, std::size_t dim,
                    std::size_t n_rows);
};

const KernelTable& scalar_table();
// Table for `isa`; throws ConfigError when unsupported.
const KernelTable& table_for(Isa isa);

}  // namespace refrain::kernels
