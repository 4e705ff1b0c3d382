// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#include "msgemm/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <random>

namespace msgemm {
namespace {

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

PackedWeightMatrix running_example(ScaleSpec scales = NoScale{}) {
  std::vector<Code> codes{2, 4, 3, 5};
  for (std::size_t i = 1; i < 12; ++i) {
    for (std::size_t j = 0; j < 4; ++j) codes.push_back(static_cast<Code>((i * 4 + j) % 16));
  }
  return pack_codes(codes, 12, 4, 4, std::move(scales));
}

// Golden bytes produced by an independent struct.pack encoder.
constexpr std::string_view kGoldenNoScale =
    "4d534757010000000c0000000000000004000000000000000400000000004253547698badcfe1032547698badcfe1032547698badcfe";
constexpr std::string_view kGoldenPerRow =
    "4d534757010000000c0000000000000004000000000000000401000000004253547698badcfe1032547698badcfe1032547698badcfe"
    "0000803f0000004000004040000080400000a0400000c0400000e0400000004100001041000020410000304100004041";

TEST(IoTest, GoldenWeightFile) {
  EXPECT_EQ(io::serialize_weights(running_example()), from_hex(kGoldenNoScale));
  PerRowScale q;
  for (int i = 0; i < 12; ++i) q.q.push_back(static_cast<float>(i + 1));
  EXPECT_EQ(io::serialize_weights(running_example(q)), from_hex(kGoldenPerRow));
  EXPECT_EQ(io::deserialize_weights(from_hex(kGoldenPerRow)), running_example(q));
}

TEST(IoTest, WeightRoundTripAllScaleModes) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = 1 + rng() % 20, k = 2 * (1 + rng() % 12) + rng() % 2;
    std::vector<Code> codes(m * k);
    for (auto& c : codes) c = static_cast<Code>(rng() % 16);
    ScaleSpec scales = NoScale{};
    if (t % 3 == 1) {
      PerRowScale s;
      for (std::size_t i = 0; i < m; ++i) s.q.push_back(std::uniform_real_distribution<float>(0.1f, 3.0f)(rng));
      scales = s;
    } else if (t % 3 == 2) {
      PerGroupScale s{k, {}};
      for (std::size_t i = 0; i < m; ++i) s.q.push_back(-std::uniform_real_distribution<float>(0.1f, 3.0f)(rng));
      scales = s;
    }
    const auto pwm = pack_codes(codes, m, k, 4, scales);
    EXPECT_EQ(io::deserialize_weights(io::serialize_weights(pwm)), pwm);
  }
}

TEST(IoTest, CorruptWeightFilesAreFormatErrors) {
  const auto good = from_hex(kGoldenNoScale);
  auto expect_format = [](std::vector<std::uint8_t> bytes) {
    try {
      io::deserialize_weights(bytes);
      ADD_FAILURE() << "accepted corrupt file";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kFormat) << e.what();
    }
  };
  auto bad = good;
  bad[0] = 'X';
  expect_format(bad);
  bad = good;
  bad[4] = 2;  // version
  expect_format(bad);
  expect_format({good.begin(), good.end() - 1});
  bad = good;
  bad.push_back(0);
  expect_format(bad);
  bad = good;
  bad[25] = 1;  // claims per-row scales that are absent
  expect_format(bad);
  bad = good;
  bad[24] = 9;  // width
  expect_format(bad);
  bad = good;
  bad[12] = 0xff;  // huge m
  expect_format(bad);
  bad = good;
  bad[20] = 0xff;  // huge k
  expect_format(bad);
  bad = good;
  bad[26] = 2;  // group size without per-group mode
  expect_format(bad);
  expect_format({});
}

TEST(IoTest, ActivationAndOutputFiles) {
  ColMajorMatrix<float> x(3, 2, {1.0f, -2.5f, 3.25f, 0.0f, 1e-3f, -7.0f});
  const auto bytes = io::serialize_activations(x);
  EXPECT_EQ(bytes.size(), 4 + 4 + 8 + 8 + 6 * 4u);
  EXPECT_EQ(io::deserialize_activations(bytes), x);
  EXPECT_EQ(io::detect_kind(bytes), io::FileKind::kActivations);
  EXPECT_THROW(io::deserialize_outputs(bytes), Error);

  const auto ybytes = io::serialize_outputs(x);
  EXPECT_EQ(io::detect_kind(ybytes), io::FileKind::kOutputs);
  EXPECT_EQ(io::deserialize_outputs(ybytes), x);
  // k=1, b=1, value 1.0f
  EXPECT_EQ(io::serialize_activations(ColMajorMatrix<float>(1, 1, {1.0f})),
            from_hex("4d5347410100000001000000000000000100000000000000" "0000803f"));
}

TEST(IoTest, FilesOnDisk) {
  const std::string path = ::testing::TempDir() + "w.msgw";
  io::save_weights(path, running_example());
  EXPECT_EQ(io::load_weights(path), running_example());
  std::remove(path.c_str());
  try {
    io::load_weights(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(IoTest, CsvMatrix) {
  const auto m = io::parse_csv_matrix("# weights\n2, 4,3,5\n-1 0 7 -8\n\n");
  EXPECT_EQ(m, RowMajorMatrix<double>(2, 4, {2, 4, 3, 5, -1, 0, 7, -8}));
  EXPECT_THROW(io::parse_csv_matrix("1,2\n3\n"), Error);
  EXPECT_THROW(io::parse_csv_matrix("1,x\n"), Error);
}

}  // namespace
}  // namespace msgemm
