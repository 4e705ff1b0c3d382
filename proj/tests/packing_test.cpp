// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#include "msgemm/packing.hpp"

#include <gtest/gtest.h>

#include <random>

namespace msgemm {
namespace {

RowMajorMatrix<double> grid(std::size_t m, std::size_t k, std::vector<double> v) {
  return RowMajorMatrix<double>(m, k, std::move(v));
}

TEST(PackingTest, NibbleLayoutLowNibbleIsEvenColumn) {
  const auto pwm = pack(grid(1, 4, {2, 4, 3, 5}), int4_codebook());
  ASSERT_EQ(pwm.data().size(), 2u);
  EXPECT_EQ(pwm.data()[0], 0x42);
  EXPECT_EQ(pwm.data()[1], 0x53);
}

TEST(PackingTest, ZerosPackToZeroBytes) {
  const auto pwm = pack(RowMajorMatrix<double>(5, 7), int4_codebook());
  EXPECT_EQ(pwm.row_bytes(), 4u);
  for (auto b : pwm.data()) EXPECT_EQ(b, 0);
}

TEST(PackingTest, RejectsUnrepresentable) {
  try {
    pack(grid(1, 1, {8}), int4_codebook());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnrepresentable);
  }
}

TEST(PackingTest, UnpackReturnsUnscaledValues) {
  const auto cb = int4_codebook();
  const auto pwm = pack(grid(1, 4, {2, 4, 3, 5}), cb);
  EXPECT_EQ(unpack(pwm, cb, 0, 1), 4.0);
  EXPECT_THROW(unpack(pwm, cb, 0, 4), Error);
  EXPECT_THROW(unpack(pwm, cb, 1, 0), Error);
  EXPECT_EQ(unpack(pack(grid(1, 1, {-1}), cb), cb, 0, 0), -1.0);

  const auto scaled = pack(grid(1, 2, {6, -4}), cb, PerRowScale{{2.0f}});
  EXPECT_EQ(unpack(scaled, cb, 0, 0), 3.0);
  EXPECT_EQ(unpack(scaled, cb, 0, 1), -2.0);
  const auto deq = dequantize<double>(scaled, cb);
  EXPECT_EQ(deq(0, 0), 6.0);
  EXPECT_EQ(deq(0, 1), -4.0);
}

TEST(PackingTest, GroupIndexConcatenatesCodesLowFirst) {
  const auto pwm = pack(grid(1, 4, {2, 4, 3, 5}), int4_codebook());
  EXPECT_EQ(pwm.group_index(0, 0, 2), 66u);  // 0b0100'0010
  EXPECT_EQ(pwm.group_index(0, 1, 2), 83u);  // 0b0101'0011
  EXPECT_EQ(pwm.group_index(0, 0, 4), 0x5342u);
  EXPECT_EQ(pwm.group_index(0, 3, 1), 5u);
  EXPECT_THROW(pwm.group_index(0, 2, 2), Error);
  EXPECT_THROW(pwm.group_index(0, 0, 0), Error);
  EXPECT_THROW(pwm.group_index(0, 0, 9), Error);  // 36 bits
}

TEST(PackingTest, GroupIndexOfZeroRowIsZero) {
  const auto pwm = pack(RowMajorMatrix<double>(3, 12), int4_codebook());
  for (unsigned d = 1; d <= 4; ++d) {
    for (std::size_t j = 0; j < 12 / d; ++j) EXPECT_EQ(pwm.group_index(2, j, d), 0u);
  }
}

// Independent re-encoding: each element is encoded again from its value and
// shifted into place, without touching the packed bytes.
TEST(PackingTest, GroupIndexMatchesReencodingAcrossWidths) {
  std::mt19937_64 rng(42);
  for (unsigned w : {2u, 3u, 4u, 5u, 8u}) {
    const auto cb = signed_int_codebook(w);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t m = 1 + rng() % 5, k = 1 + rng() % 23;
      RowMajorMatrix<double> W(m, k);
      for (auto& v : W.data()) v = cb.values()[rng() % cb.size()];
      const auto pwm = pack(W, cb);
      for (unsigned d = 1; d * w <= 32 && d <= 6; ++d) {
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < k / d; ++j) {
            std::uint64_t expect = 0;
            for (unsigned r = 0; r < d; ++r) expect |= std::uint64_t{cb.encode(W(i, j * d + r))} << (w * r);
            ASSERT_EQ(pwm.group_index(i, j, d), expect) << "w=" << w << " d=" << d << " i=" << i << " j=" << j;
          }
        }
      }
    }
  }
}

TEST(PackingTest, UnpackPackIdentityRandomGrids) {
  std::mt19937_64 rng(7);
  const auto cb = int4_codebook();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 9, k = 1 + rng() % 17;
    RowMajorMatrix<double> W(m, k);
    for (auto& v : W.data()) v = static_cast<double>(static_cast<int>(rng() % 16) - 8);
    const auto pwm = pack(W, cb);
    EXPECT_EQ(pwm.data().size(), m * ((k + 1) / 2));
    EXPECT_EQ(unpack_all(pwm, cb), W);
  }
}

TEST(PackingTest, PerGroupScalesDivideOut) {
  const auto cb = int4_codebook();
  // Two groups of two columns: scales 2 and -3.
  const auto pwm = pack(grid(1, 4, {2, -4, 9, -21}), cb, PerGroupScale{2, {2.0f, -3.0f}});
  EXPECT_EQ(unpack(pwm, cb, 0, 0), 1.0);
  EXPECT_EQ(unpack(pwm, cb, 0, 1), -2.0);
  EXPECT_EQ(unpack(pwm, cb, 0, 2), -3.0);
  EXPECT_EQ(unpack(pwm, cb, 0, 3), 7.0);
  EXPECT_EQ(dequantize<double>(pwm, cb), grid(1, 4, {2, -4, 9, -21}));
}

TEST(PackingTest, ScaleShapeMismatch) {
  const auto cb = int4_codebook();
  const auto W = grid(2, 4, {1, 2, 3, 4, 5, 6, 7, 0});
  EXPECT_THROW(pack(W, cb, PerRowScale{{1.0f}}), Error);
  EXPECT_THROW(pack(W, cb, PerGroupScale{3, {1, 1, 1, 1}}), Error);  // 3 does not divide 4
  EXPECT_THROW(pack(W, cb, PerGroupScale{2, {1, 1, 1}}), Error);
  EXPECT_THROW(pack(W, cb, PerGroupScale{0, {}}), Error);
  EXPECT_THROW(pack(W, cb, PerRowScale{{1.0f, 0.0f}}), Error);
}

TEST(PackingTest, RawConstructorValidates) {
  EXPECT_THROW(PackedWeightMatrix(2, 4, 4, {0, 0, 0}), Error);
  EXPECT_THROW(PackedWeightMatrix(1, 3, 4, {0x00, 0x10}), Error);  // padding nibble set
  EXPECT_THROW(PackedWeightMatrix(1, 2, 3, {0, 9}), Error);         // 9 needs 4 bits
  EXPECT_NO_THROW(PackedWeightMatrix(1, 3, 4, {0xff, 0x0f}));
}

TEST(PackingTest, QuantizeNearest) {
  const auto cb = int4_codebook();
  const auto pwm = quantize_nearest(grid(1, 4, {2.2, -7.9, 12.0, 0.49}), cb);
  EXPECT_EQ(unpack_all(pwm, cb), grid(1, 4, {2, -8, 7, 0}));
}

TEST(PackingTest, NonNibbleWidthsUseWholeBytes) {
  const auto cb = signed_int_codebook(3);
  const auto pwm = pack(grid(1, 3, {-4, 3, -1}), cb);
  EXPECT_EQ(pwm.row_bytes(), 3u);
  EXPECT_EQ(pwm.data()[0], 4);
  EXPECT_EQ(pwm.data()[2], 7);

  const auto two = pack(grid(1, 5, {1, -1, -2, 0, 1}), signed_int_codebook(2));
  EXPECT_EQ(two.row_bytes(), 2u);
  EXPECT_EQ(two.data()[0], 0b00'10'11'01);
  EXPECT_EQ(two.data()[1], 0b01);
}

}  // namespace
}  // namespace msgemm
