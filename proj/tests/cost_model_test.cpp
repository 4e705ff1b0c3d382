// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#include "msgemm/cost_model.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "msgemm/gemm.hpp"

namespace msgemm {
namespace {

// Exact rational evaluation of m*k / (2^(4d)*k + (k/d - 1)*m), computed
// offline and rounded to double.
constexpr double kMlp1[] = {0.9987199024687595, 1.920075002929802, 1.500045777764214, 0.17910513025132};
constexpr double kMlp2[] = {0.9997559189650964, 1.9797003383276945, 2.4004688415706195, 0.6316114109483423};

TEST(CostModelTest, MlpSpeedups) {
  for (unsigned d = 1; d <= 4; ++d) {
    EXPECT_NEAR(speedup(12288, 49152, d), kMlp1[d - 1], 1e-12) << "mlp1 d=" << d;
    EXPECT_NEAR(speedup(49152, 12288, d), kMlp2[d - 1], 1e-12) << "mlp2 d=" << d;
  }
  EXPECT_NEAR(speedup(49152, 12288, 3), 49152.0 / 20476.0, 1e-12);
  EXPECT_NEAR(speedup(12288, 49152, 2), 49152.0 / 25599.0, 1e-12);
  EXPECT_NEAR(speedup(12288, 49152, 3), 49152.0 / 32767.0, 1e-12);
  EXPECT_NEAR(speedup(49152, 12288, 4), 49152.0 / 77820.0, 1e-12);
}

TEST(CostModelTest, ReportFields) {
  const auto r = cost({12, 4, 1}, 2);
  EXPECT_EQ(r.c_lut, Count{1024});
  EXPECT_EQ(r.c_y, Count{12});
  EXPECT_EQ(r.c_total, Count{1036});
  EXPECT_EQ(r.m_lut, Count{4});
  EXPECT_EQ(r.m_y, Count{48});
  EXPECT_EQ(r.m_total, Count{52});
  EXPECT_EQ(r.c_naive, Count{48});
  EXPECT_EQ(r.m_naive, r.m_total);
  EXPECT_DOUBLE_EQ(r.speedup, 48.0 / 1036.0);

  const auto batched = cost({3, 6, 2}, 3);
  EXPECT_EQ(batched.c_lut, Count{49152});
  EXPECT_EQ(batched.c_y, Count{6});
  EXPECT_EQ(batched.m_total, Count{6 * 2 + 3 * 6});
}

TEST(CostModelTest, SpeedupIndependentOfBatch) {
  for (unsigned d : {1u, 2u, 3u, 4u, 6u, 8u}) {
    EXPECT_EQ(cost({49152, 12288, 7}, d).speedup, cost({49152, 12288, 1}, d).speedup) << d;
  }
}

TEST(CostModelTest, LargeDepthStaysExact) {
  const auto r = cost({12288, 49152, 1}, 8);
  EXPECT_EQ(to_string(r.c_lut), "211106232532992");  // 2^32 * 49152
  const auto r16 = cost({1, 16, 1}, 16);
  EXPECT_EQ(to_string(r16.c_lut), "295147905179352825856");  // 2^64 * 16
  EXPECT_EQ(to_string(Count{0}), "0");
}

TEST(CostModelTest, LargeMLimitApproachesDepth) {
  const double s = speedup(std::uint64_t{1} << 40, 12288, 3);
  EXPECT_NEAR(s, 12288.0 / (12288.0 / 3 - 1), 1e-5);
  EXPECT_NEAR(s, 3.0, 1e-3);
}

TEST(CostModelTest, MonotoneOverheads) {
  const GemmDims dims{96, 720, 1};  // 720 is divisible by 1..6
  Count prev_lut = 0, prev_y = ~Count{0};
  for (unsigned d = 1; d <= 6; ++d) {
    const auto r = cost(dims, d);
    EXPECT_GT(r.c_lut, prev_lut);
    EXPECT_LT(r.c_y, prev_y);
    prev_lut = r.c_lut;
    prev_y = r.c_y;
  }
}

TEST(CostModelTest, Errors) {
  EXPECT_THROW(cost({12, 4, 1}, 3), Error);
  EXPECT_THROW(cost({12, 4, 1}, 0), Error);
  EXPECT_THROW(cost({0, 4, 1}, 1), Error);
  EXPECT_THROW(cost({1, 17 * 16, 1}, 17), Error);
  EXPECT_THROW(sweep({}, 1, 4), Error);
  EXPECT_THROW(sweep({*preset("mlp1")}, 3, 2), Error);
  EXPECT_FALSE(preset("mlp3").has_value());
}

TEST(CostModelTest, SweepPresetsAndSkips) {
  const auto res = sweep({*preset("mlp2"), *preset("mlp1")}, 1, 4);
  ASSERT_EQ(res.rows.size(), 8u);
  for (unsigned d = 1; d <= 4; ++d) {
    EXPECT_EQ(res.rows[d - 1].name, "mlp2");
    EXPECT_NEAR(res.rows[d - 1].report.speedup, kMlp2[d - 1], 1e-12);
    EXPECT_NEAR(res.rows[d + 3].report.speedup, kMlp1[d - 1], 1e-12);
  }
  EXPECT_TRUE(res.skipped.empty());

  // 49152 = 2^14 * 3, so 5 and 7 are skipped.
  const auto wide = sweep({*preset("mlp1")}, 1, 8);
  EXPECT_EQ(wide.rows.size(), 6u);
  ASSERT_EQ(wide.skipped.size(), 2u);
  EXPECT_EQ(wide.skipped[0].d, 5u);
  EXPECT_EQ(wide.skipped[1].d, 7u);

  const auto single = sweep({{"custom", {12, 4, 1}}}, 2, 2);
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_EQ(single.rows[0].report.c_total, cost({12, 4, 1}, 2).c_total);
}

TEST(CostModelTest, CsvLayout) {
  std::ostringstream os;
  write_sweep_csv(os, sweep({{"custom", {12, 4, 1}}}, 2, 2));
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "preset,m,k,b,d,c_lut,c_y,c_total,c_naive,speedup");
  EXPECT_EQ(row.substr(0, row.rfind(',')), "custom,12,4,1,2,1024,12,1036,48");
  EXPECT_NEAR(std::stod(row.substr(row.rfind(',') + 1)), 48.0 / 1036.0, 1e-15);
}

TEST(CostModelTest, FormulaMatchesInstrumentedRun) {
  std::mt19937_64 rng(17);
  const auto cb = int4_codebook();
  for (int t = 0; t < 25; ++t) {
    const unsigned d = 1 + rng() % 3;
    const std::size_t m = 1 + rng() % 64, k = d * (1 + rng() % (48 / d));
    std::vector<Code> codes(m * k);
    for (auto& c : codes) c = static_cast<Code>(rng() % 16);
    const auto out = msgemm_counted<std::int64_t>(pack_codes(codes, m, k, 4), ActivationMatrix<std::int64_t>(k, 1), d, cb);
    EXPECT_EQ(Count{out.ops.fma + out.ops.add}, cost({m, k, 1}, d).c_total);
  }
}

}  // namespace
}  // namespace msgemm
