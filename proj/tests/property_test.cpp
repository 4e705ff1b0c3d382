// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#include "msgemm/proptest.hpp"

#include <gtest/gtest.h>

namespace msgemm::proptest {
namespace {

void expect_clean(const Report& r) {
  EXPECT_TRUE(r.ok()) << r.failures << " of " << r.cases << " cases failed";
  for (const auto& msg : r.messages) ADD_FAILURE() << msg;
}

TEST(PropertyTest, ExactOracleAllDepths) {
  CaseGen gen;
  gen.seed = env_seed(1);
  const auto r = run_oracle_suite(gen, env_cases(300));
  expect_clean(r);
}

TEST(PropertyTest, ExactOracleTails) {
  CaseGen gen;
  gen.seed = env_seed(2);
  gen.d_min = 2;
  gen.scales = ScaleChoice::kNone;
  gen.divisibility = Divisibility::kTail;
  expect_clean(run_oracle_suite(gen, env_cases(200)));
}

TEST(PropertyTest, ExactOracleGroupScales) {
  CaseGen gen;
  gen.seed = env_seed(3);
  gen.scales = ScaleChoice::kPerGroup;
  expect_clean(run_oracle_suite(gen, env_cases(200)));
}

TEST(PropertyTest, FloatOracle) {
  CaseGen gen;
  gen.seed = env_seed(4);
  gen.mode = Mode::kF32;
  const auto r = run_oracle_suite(gen, env_cases(200));
  expect_clean(r);
  EXPECT_GT(r.max_rel, 0.0);  // the two summation orders really differ
}

TEST(PropertyTest, FormulaSuite) {
  CaseGen gen;
  gen.seed = env_seed(5);
  gen.d_max = 3;
  expect_clean(run_formula_suite(gen, env_cases(100)));
}

TEST(PropertyTest, GeneratorRespectsShapes) {
  CaseGen gen;
  for (std::size_t n = 0; n < 500; ++n) {
    const auto c = generate_case(gen, case_seed(9, n));
    ASSERT_GE(c.m, 1u);
    ASSERT_LE(c.m, 64u);
    ASSERT_LE(c.k, 48u);
    ASSERT_GE(c.k, 1u);
    ASSERT_LE(c.b, 8u);
    if (const auto* g = std::get_if<PerGroupScale>(&c.scales)) {
      ASSERT_TRUE(g->group_size == c.d || g->group_size == 2 * c.d);
      ASSERT_EQ(c.k % g->group_size, 0u);
    }
  }
  // Same seed, same case.
  const auto a = generate_case(gen, 1234), b = generate_case(gen, 1234);
  EXPECT_EQ(a.codes, b.codes);
  EXPECT_EQ(a.x, b.x);
}

TEST(PropertyTest, FormulaCountsScaleWithBatch) {
  const auto cb = int4_codebook();
  std::vector<Code> codes(5 * 12);
  for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = static_cast<Code>(i * 7 % 16);
  const auto pwm = pack_codes(codes, 5, 12, 4);
  for (unsigned d : {1u, 2u, 3u}) {
    const auto one = msgemm_counted<std::int64_t>(pwm, ActivationMatrix<std::int64_t>(12, 1), d, cb).ops;
    const auto four = msgemm_counted<std::int64_t>(pwm, ActivationMatrix<std::int64_t>(12, 4), d, cb).ops;
    EXPECT_EQ(four.fma, 4 * one.fma);
    EXPECT_EQ(four.add, 4 * one.add);
    EXPECT_EQ(four.mem_weights, 4 * one.mem_weights);
  }
  const auto shaped = msgemm_counted<std::int64_t>(pack_codes(std::vector<Code>(18, 3), 3, 6, 4),
                                                   ActivationMatrix<std::int64_t>(6, 2), 3, cb);
  EXPECT_EQ(shaped.ops.fma, 49152u);
  EXPECT_EQ(shaped.ops.add, 6u);
}

}  // namespace
}  // namespace msgemm::proptest
