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

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.h"
#include "refrain/errors.h"

namespace refrain::kernels {
namespace {

Isa initial_isa() {
  if (const char* forced = std::getenv("REFRAIN_ISA")) {
    std::string_view name(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (name == to_string(isa) && isa_supported(isa)) return isa;
    }
  }
  return detected_isa();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&table_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active_isa_slot() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "scalar";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(REFRAIN_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#ifdef REFRAIN_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return active_isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  const KernelTable& table = table_for(isa);
  active_table().store(&table, std::memory_order_relaxed);
  active_isa_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& table_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("kernel ISA '" + std::string(to_string(isa)) +
                      "' is not supported on this CPU");
  }
  switch (isa) {
#ifdef REFRAIN_HAVE_AVX2_KERNELS
    case Isa::kAvx2:
      return detail::avx2_table();
#endif
#ifdef REFRAIN_HAVE_NEON_KERNELS
    case Isa::kNeon:
      return detail::neon_table();
#endif
    default:
      return scalar_table();
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dot: dimension mismatch");
  return active_table().load(std::memory_order_relaxed)->dot(a.data(), b.data(),
                                                             a.size());
}

double squared_norm(std::span<const double> a) {
  return active_table().load(std::memory_order_relaxed)->squared_norm(a.data(),
                                                                      a.size());
}

void scale(std::span<double> a, double factor) {
  active_table().load(std::memory_order_relaxed)->scale(a.data(), a.size(),
                                                        factor);
}

double max_dot(std::span<const double> query, std::span<const double> rows) {
  if (query.empty()) throw ConfigError("max_dot: empty query");
  if (rows.size() % query.size() != 0) {
    throw ConfigError("max_dot: matrix size is not a multiple of the row length");
  }
  return active_table().load(std::memory_order_relaxed)->max_dot(
      query.data(), rows.data(), query.size(), rows.size() / query.size());
}

}  // namespace refrain::kernels
