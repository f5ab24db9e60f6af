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

#ifndef LOOKLAB_SIMD_KERNELS_H_
#define LOOKLAB_SIMD_KERNELS_H_

#include <cstddef>
#include <string_view>

namespace looklab::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Inner-loop kernels used by the network layers, the losses and the
// retrieval scans. Every entry has a scalar reference implementation; wider
// variants must agree with it (exactly for integer-valued data, within
// rounding otherwise).
struct KernelTable {
  Isa isa;
  // sum_i x[i]*y[i], float accumulation.
  float (*dot_f32)(const float* x, const float* y, size_t n);
  // y[i] += a*x[i]
  void (*axpy_f32)(float a, const float* x, float* y, size_t n);
  // Float inputs, double accumulation. Used for similarity scoring.
  double (*dot_f32_acc64)(const float* x, const float* y, size_t n);
  double (*sq_dist_f32_acc64)(const float* x, const float* y, size_t n);
  double (*dot_f64)(const double* x, const double* y, size_t n);
  double (*sq_dist_f64)(const double* x, const double* y, size_t n);
  // C[m x n] += A[m x k] * B[k x n], row-major with leading dimensions.
  void (*gemm_f32)(size_t m, size_t n, size_t k, const float* a, size_t lda, const float* b,
                   size_t ldb, float* c, size_t ldc);
};

// True when the running CPU can execute the given variant.
bool isa_available(Isa isa);

// Table for a specific variant. Throws looklab::ConfigError when the CPU
// lacks it.
const KernelTable& kernels_for(Isa isa);

// The active table: the widest available variant, unless the environment
// variable LOOKLAB_SIMD=scalar forces the reference path. Resolved once.
const KernelTable& kernels();

namespace scalar {
float dot_f32(const float* x, const float* y, size_t n);
void axpy_f32(float a, const float* x, float* y, size_t n);
double dot_f32_acc64(const float* x, const float* y, size_t n);
double sq_dist_f32_acc64(const float* x, const float* y, size_t n);
double dot_f64(const double* x, const double* y, size_t n);
double sq_dist_f64(const double* x, const double* y, size_t n);
void gemm_f32(size_t m, size_t n, size_t k, const float* a, size_t lda, const float* b,
              size_t ldb, float* c, size_t ldc);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define LOOKLAB_HAVE_AVX2_KERNELS 1
namespace avx2 {
float dot_f32(const float* x, const float* y, size_t n);
void axpy_f32(float a, const float* x, float* y, size_t n);
double dot_f32_acc64(const float* x, const float* y, size_t n);
double sq_dist_f32_acc64(const float* x, const float* y, size_t n);
double dot_f64(const double* x, const double* y, size_t n);
double sq_dist_f64(const double* x, const double* y, size_t n);
void gemm_f32(size_t m, size_t n, size_t k, const float* a, size_t lda, const float* b,
              size_t ldb, float* c, size_t ldc);
}  // namespace avx2
#endif

}  // namespace looklab::simd

#endif  // LOOKLAB_SIMD_KERNELS_H_
