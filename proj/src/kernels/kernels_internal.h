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

#include "refrain/kernels.h"

namespace refrain::kernels::detail {

#if defined(__x86_64__) || defined(_M_X64)
#define REFRAIN_HAVE_AVX2_KERNELS 1
const KernelTable& avx2_table();
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define REFRAIN_HAVE_NEON_KERNELS 1
const KernelTable& neon_table();
#endif

}  // namespace refrain::kernels::detail
