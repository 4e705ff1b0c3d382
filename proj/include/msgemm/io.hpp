// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "msgemm/error.hpp"
#include "msgemm/matrix.hpp"
#include "msgemm/packing.hpp"

// Binary formats, all little-endian:
//
//   weights (MSGW): magic, u32 version, u64 m, u64 k, u8 width, u8 scale mode,
//                   u32 group size, m rows of packed codes, f32 scales
//   activations (MSGA): magic, u32 version, u64 k, u64 b, f32 column-major
//   outputs (MSGY): magic, u32 version, u64 m, u64 b, f32 column-major

namespace msgemm::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::string_view kWeightMagic = "MSGW";
inline constexpr std::string_view kActivationMagic = "MSGA";
inline constexpr std::string_view kOutputMagic = "MSGY";

enum class FileKind { kWeights, kActivations, kOutputs, kUnknown };

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view m) {
    auto got = take(m.size());
    if (!std::equal(m.begin(), m.end(), got.begin())) {
      throw Error(ErrorKind::kFormat, "bad magic, expected '" + std::string(m) + "'");
    }
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw Error(ErrorKind::kFormat, "truncated file");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw Error(ErrorKind::kFormat, std::to_string(remaining()) + " trailing bytes");
  }

 private:
  std::uint64_t get(int n) {
    auto b = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void check_version(ByteReader& r) {
  const auto v = r.u32();
  if (v != kFormatVersion) throw Error(ErrorKind::kFormat, "unsupported format version " + std::to_string(v));
}

// Rejects dimensions whose payload cannot possibly be present, before any
// allocation happens.
inline void check_payload(std::uint64_t rows, std::uint64_t cols, std::uint64_t elem_bytes, std::size_t remaining) {
  if (cols != 0 && rows > remaining / elem_bytes / cols) throw Error(ErrorKind::kFormat, "truncated payload");
}

inline std::vector<std::uint8_t> serialize_matrix(std::string_view magic, const ColMajorMatrix<float>& a) {
  ByteWriter w;
  w.magic(magic);
  w.u32(kFormatVersion);
  w.u64(a.rows());
  w.u64(a.cols());
  for (float v : a.data()) w.f32(v);
  return std::move(w).take();
}

inline ColMajorMatrix<float> deserialize_matrix(std::string_view magic, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(magic);
  check_version(r);
  const auto rows = r.u64();
  const auto cols = r.u64();
  check_payload(rows, cols, 4, r.remaining());
  std::vector<float> data(rows * cols);
  for (auto& v : data) v = r.f32();
  r.expect_end();
  return ColMajorMatrix<float>(rows, cols, std::move(data));
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_weights(const PackedWeightMatrix& pwm) {
  ByteWriter w;
  w.magic(kWeightMagic);
  w.u32(kFormatVersion);
  w.u64(pwm.rows());
  w.u64(pwm.cols());
  w.u8(static_cast<std::uint8_t>(pwm.width()));
  w.u8(static_cast<std::uint8_t>(scale_mode(pwm.scales())));
  const auto* grp = std::get_if<PerGroupScale>(&pwm.scales());
  w.u32(grp ? static_cast<std::uint32_t>(grp->group_size) : 0u);
  w.raw(pwm.data());
  if (const auto* row = std::get_if<PerRowScale>(&pwm.scales())) {
    for (float q : row->q) w.f32(q);
  } else if (grp) {
    for (float q : grp->q) w.f32(q);
  }
  return std::move(w).take();
}

inline PackedWeightMatrix deserialize_weights(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kWeightMagic);
  detail::check_version(r);
  const auto m = r.u64();
  const auto k = r.u64();
  const unsigned width = r.u8();
  const auto mode = r.u8();
  const auto group_size = r.u32();
  if (width < Codebook::kMinWidth || width > Codebook::kMaxWidth) {
    throw Error(ErrorKind::kFormat, "unsupported code width " + std::to_string(width));
  }
  if (mode > 2) throw Error(ErrorKind::kFormat, "unknown scale mode " + std::to_string(mode));
  if ((mode == 2) != (group_size != 0)) throw Error(ErrorKind::kFormat, "group size inconsistent with scale mode");
  if (k > (std::uint64_t{1} << 48)) throw Error(ErrorKind::kFormat, "column count too large");
  const std::uint64_t rb = packed_row_bytes(k, width);
  detail::check_payload(m, rb, 1, r.remaining());
  auto payload = r.take(m * rb);
  std::vector<std::uint8_t> data(payload.begin(), payload.end());

  ScaleSpec scales = NoScale{};
  auto read_scales = [&](std::uint64_t n) {
    detail::check_payload(n, 1, 4, r.remaining());
    std::vector<float> q(n);
    for (auto& v : q) v = r.f32();
    return q;
  };
  if (mode == 1) {
    scales = PerRowScale{read_scales(m)};
  } else if (mode == 2) {
    if (k % group_size != 0) throw Error(ErrorKind::kFormat, "group size does not divide k");
    scales = PerGroupScale{group_size, read_scales(m * (k / group_size))};
  }
  r.expect_end();
  try {
    return PackedWeightMatrix(m, k, width, std::move(data), std::move(scales));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

inline std::vector<std::uint8_t> serialize_activations(const ColMajorMatrix<float>& x) {
  return detail::serialize_matrix(kActivationMagic, x);
}
inline ColMajorMatrix<float> deserialize_activations(std::span<const std::uint8_t> bytes) {
  return detail::deserialize_matrix(kActivationMagic, bytes);
}
inline std::vector<std::uint8_t> serialize_outputs(const ColMajorMatrix<float>& y) {
  return detail::serialize_matrix(kOutputMagic, y);
}
inline ColMajorMatrix<float> deserialize_outputs(std::span<const std::uint8_t> bytes) {
  return detail::deserialize_matrix(kOutputMagic, bytes);
}

inline FileKind detect_kind(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return FileKind::kUnknown;
  const std::string_view head(reinterpret_cast<const char*>(bytes.data()), 4);
  if (head == kWeightMagic) return FileKind::kWeights;
  if (head == kActivationMagic) return FileKind::kActivations;
  if (head == kOutputMagic) return FileKind::kOutputs;
  return FileKind::kUnknown;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

inline void save_weights(const std::string& path, const PackedWeightMatrix& pwm) {
  write_file(path, serialize_weights(pwm));
}
inline PackedWeightMatrix load_weights(const std::string& path) { return deserialize_weights(read_file(path)); }
inline void save_activations(const std::string& path, const ColMajorMatrix<float>& x) {
  write_file(path, serialize_activations(x));
}
inline ColMajorMatrix<float> load_activations(const std::string& path) {
  return deserialize_activations(read_file(path));
}
inline void save_outputs(const std::string& path, const ColMajorMatrix<float>& y) {
  write_file(path, serialize_outputs(y));
}
inline ColMajorMatrix<float> load_outputs(const std::string& path) { return deserialize_outputs(read_file(path)); }

/// Comma- or whitespace-separated numbers, one matrix row per line. Blank
/// lines and lines starting with '#' are skipped.
inline RowMajorMatrix<double> parse_csv_matrix(std::string_view text) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    if (line.find_first_not_of(' ') == std::string::npos || line[line.find_first_not_of(' ')] == '#') continue;
    std::istringstream ls(line);
    std::size_t n = 0;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || used == 0) throw Error(ErrorKind::kFormat, "bad number '" + tok + "' in CSV");
      values.push_back(v);
      ++n;
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      throw Error(ErrorKind::kFormat, "CSV row " + std::to_string(rows + 1) + " has " + std::to_string(n) +
                                          " values, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return RowMajorMatrix<double>(rows, cols, std::move(values));
}

inline RowMajorMatrix<double> load_csv_matrix(const std::string& path) {
  const auto bytes = read_file(path);
  return parse_csv_matrix(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace msgemm::io
