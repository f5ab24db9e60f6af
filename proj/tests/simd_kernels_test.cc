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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "looklab/rng.h"
#include "looklab/simd/kernels.h"

namespace looklab::simd {
namespace {

std::vector<float> random_floats(Rng& rng, size_t n) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(-2.0, 2.0));
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!isa_available(Isa::kAvx2)) GTEST_SKIP() << "no AVX2 on this CPU";
  }
  const KernelTable& ref = kernels_for(Isa::kScalar);
  const KernelTable& wide() { return kernels_for(Isa::kAvx2); }
};

TEST_F(KernelEquivalence, DotAndDistanceAgreeWithScalarAcrossLengths) {
  Rng rng(7);
  for (size_t n : {0, 1, 3, 7, 8, 9, 15, 16, 17, 31, 64, 100, 2048}) {
    const auto x = random_floats(rng, n);
    const auto y = random_floats(rng, n);
    const double scale = static_cast<double>(n) + 1.0;
    EXPECT_NEAR(ref.dot_f32(x.data(), y.data(), n), wide().dot_f32(x.data(), y.data(), n),
                1e-4 * scale);
    EXPECT_NEAR(ref.dot_f32_acc64(x.data(), y.data(), n),
                wide().dot_f32_acc64(x.data(), y.data(), n), 1e-12 * scale);
    EXPECT_NEAR(ref.sq_dist_f32_acc64(x.data(), y.data(), n),
                wide().sq_dist_f32_acc64(x.data(), y.data(), n), 1e-12 * scale);
    std::vector<double> xd(x.begin(), x.end()), yd(y.begin(), y.end());
    EXPECT_NEAR(ref.dot_f64(xd.data(), yd.data(), n), wide().dot_f64(xd.data(), yd.data(), n),
                1e-12 * scale);
    EXPECT_NEAR(ref.sq_dist_f64(xd.data(), yd.data(), n),
                wide().sq_dist_f64(xd.data(), yd.data(), n), 1e-12 * scale);
  }
}

TEST_F(KernelEquivalence, AxpyMatchesScalar) {
  Rng rng(11);
  for (size_t n : {1, 5, 8, 13, 64, 257}) {
    const auto x = random_floats(rng, n);
    auto y1 = random_floats(rng, n);
    auto y2 = y1;
    ref.axpy_f32(0.37f, x.data(), y1.data(), n);
    wide().axpy_f32(0.37f, x.data(), y2.data(), n);
    for (size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-6);
  }
}

TEST_F(KernelEquivalence, IntegerValuedInputsAreExact) {
  Rng rng(3);
  std::vector<float> x(77), y(77);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(rng.uniform_int(-9, 9));
    y[i] = static_cast<float>(rng.uniform_int(-9, 9));
  }
  EXPECT_EQ(ref.dot_f32(x.data(), y.data(), x.size()),
            wide().dot_f32(x.data(), y.data(), x.size()));
  EXPECT_EQ(ref.sq_dist_f32_acc64(x.data(), y.data(), x.size()),
            wide().sq_dist_f32_acc64(x.data(), y.data(), x.size()));
}

TEST_F(KernelEquivalence, GemmMatchesScalarOnAllTailShapes) {
  Rng rng(21);
  for (size_t m : {1, 2, 3, 4, 5, 9}) {
    for (size_t n : {1, 7, 8, 15, 16, 17, 40}) {
      for (size_t k : {1, 3, 27}) {
        // Padded leading dimensions catch stride mistakes.
        const size_t lda = k + 2, ldb = n + 3, ldc = n + 1;
        const auto a = random_floats(rng, m * lda);
        const auto b = random_floats(rng, k * ldb);
        auto c1 = random_floats(rng, m * ldc);
        auto c2 = c1;
        ref.gemm_f32(m, n, k, a.data(), lda, b.data(), ldb, c1.data(), ldc);
        wide().gemm_f32(m, n, k, a.data(), lda, b.data(), ldb, c2.data(), ldc);
        for (size_t i = 0; i < c1.size(); ++i) ASSERT_NEAR(c1[i], c2[i], 1e-4) << m << n << k;
      }
    }
  }
}

TEST_F(KernelEquivalence, GemmIntegerValuedIsExact) {
  Rng rng(5);
  const size_t m = 6, n = 37, k = 19;
  std::vector<float> a(m * k), b(k * n), c1(m * n, 1.0f);
  for (float& v : a) v = static_cast<float>(rng.uniform_int(-5, 5));
  for (float& v : b) v = static_cast<float>(rng.uniform_int(-5, 5));
  auto c2 = c1;
  ref.gemm_f32(m, n, k, a.data(), k, b.data(), n, c1.data(), n);
  wide().gemm_f32(m, n, k, a.data(), k, b.data(), n, c2.data(), n);
  EXPECT_EQ(c1, c2);
}

TEST(KernelDispatch, ActiveTableIsAvailable) {
  EXPECT_TRUE(isa_available(kernels().isa));
  EXPECT_TRUE(isa_available(Isa::kScalar));
  const float a[2] = {3, 4};
  EXPECT_FLOAT_EQ(kernels().dot_f32(a, a, 2), 25.0f);
}

}  // namespace
}  // namespace looklab::simd
