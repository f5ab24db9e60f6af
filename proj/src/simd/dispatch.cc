/* Copyright 2026 The LookLab Authors. All Rights Reserved.

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

#include <cstdlib>
#include <cstring>

#include "looklab/errors.h"
#include "looklab/simd/kernels.h"

namespace looklab::simd {
namespace {

constexpr KernelTable kScalarTable{
    Isa::kScalar,
    &scalar::dot_f32,
    &scalar::axpy_f32,
    &scalar::dot_f32_acc64,
    &scalar::sq_dist_f32_acc64,
    &scalar::dot_f64,
    &scalar::sq_dist_f64,
    &scalar::gemm_f32,
};

#ifdef LOOKLAB_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{
    Isa::kAvx2,
    &avx2::dot_f32,
    &avx2::axpy_f32,
    &avx2::dot_f32_acc64,
    &avx2::sq_dist_f32_acc64,
    &avx2::dot_f64,
    &avx2::sq_dist_f64,
    &avx2::gemm_f32,
};
#endif

const KernelTable& select_table() {
  const char* forced = std::getenv("LOOKLAB_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
    return kScalarTable;
  }
#ifdef LOOKLAB_HAVE_AVX2_KERNELS
  if (isa_available(Isa::kAvx2)) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(LOOKLAB_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw ConfigError("SIMD variant not available on this CPU: " +
                      std::string(isa_name(isa)));
  }
#ifdef LOOKLAB_HAVE_AVX2_KERNELS
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& kernels() {
  static const KernelTable& table = select_table();
  return table;
}

}  // namespace looklab::simd
