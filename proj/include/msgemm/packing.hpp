// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "msgemm/codebook.hpp"
#include "msgemm/error.hpp"
#include "msgemm/matrix.hpp"

namespace msgemm {

struct NoScale {
  bool operator==(const NoScale&) const = default;
};

/// One scale per row: y(i) = q(i) * sum_j M(i,j) x(j).
struct PerRowScale {
  std::vector<float> q;
  bool operator==(const PerRowScale&) const = default;
};

/// Every `group_size` consecutive columns of a row share one scale.
/// q is m x (k / group_size), row-major.
struct PerGroupScale {
  std::size_t group_size = 0;
  std::vector<float> q;
  bool operator==(const PerGroupScale&) const = default;
};

using ScaleSpec = std::variant<NoScale, PerRowScale, PerGroupScale>;

enum class ScaleMode : std::uint8_t { kNone = 0, kPerRow = 1, kPerGroup = 2 };

inline ScaleMode scale_mode(const ScaleSpec& s) { return static_cast<ScaleMode>(s.index()); }

namespace detail {

inline void check_scale_values(std::span<const float> q) {
  for (float v : q) {
    if (!std::isfinite(v) || v == 0.0f) {
      throw Error(ErrorKind::kInvalidArgument, "scales must be finite and nonzero");
    }
  }
}

inline void validate_scales(const ScaleSpec& scales, std::size_t m, std::size_t k) {
  if (const auto* row = std::get_if<PerRowScale>(&scales)) {
    if (row->q.size() != m) {
      std::ostringstream os;
      os << "per-row scales: expected " << m << " values, got " << row->q.size();
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
    check_scale_values(row->q);
  } else if (const auto* grp = std::get_if<PerGroupScale>(&scales)) {
    if (grp->group_size == 0 || k % grp->group_size != 0) {
      std::ostringstream os;
      os << "group size " << grp->group_size << " must be positive and divide k=" << k;
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
    const std::size_t expected = m * (k / grp->group_size);
    if (grp->q.size() != expected) {
      std::ostringstream os;
      os << "per-group scales: expected " << expected << " values, got " << grp->q.size();
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
    check_scale_values(grp->q);
  }
}

}  // namespace detail

/// Scale that applies to element (i, j); 1 when there are no scales.
inline double scale_at(const ScaleSpec& scales, std::size_t k, std::size_t i, std::size_t j) {
  if (const auto* row = std::get_if<PerRowScale>(&scales)) return row->q[i];
  if (const auto* grp = std::get_if<PerGroupScale>(&scales)) {
    return grp->q[i * (k / grp->group_size) + j / grp->group_size];
  }
  return 1.0;
}

/// Codes per storage byte. Widths 2, 4 and 8 are packed densely (lowest
/// column in the least-significant bits); any other width takes a whole byte.
constexpr unsigned codes_per_byte(unsigned width) noexcept {
  return (width == 2 || width == 4 || width == 8) ? 8 / width : 1;
}

constexpr std::size_t packed_row_bytes(std::size_t k, unsigned width) noexcept {
  const unsigned per = codes_per_byte(width);
  return (k + per - 1) / per;
}

/// m x k weight codes, row-major, plus optional shared scales.
///
/// For int4, column j of a row lives in byte j/2 of that row, even columns in
/// the low nibble. With this order, d consecutive codes read straight out of
/// storage already form the table index with code(j*d) as its lowest field.
class PackedWeightMatrix {
 public:
  PackedWeightMatrix() = default;

  PackedWeightMatrix(std::size_t m, std::size_t k, unsigned width, std::vector<std::uint8_t> data,
                     ScaleSpec scales = NoScale{})
      : m_(m), k_(k), width_(width), data_(std::move(data)), scales_(std::move(scales)) {
    if (width_ < Codebook::kMinWidth || width_ > Codebook::kMaxWidth) {
      throw Error(ErrorKind::kInvalidArgument, "unsupported code width");
    }
    if (data_.size() != m_ * row_bytes()) {
      std::ostringstream os;
      os << "packed payload has " << data_.size() << " bytes, expected " << m_ * row_bytes();
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
    if (codes_per_byte(width_) == 1 && width_ < 8) {
      for (std::uint8_t b : data_) {
        if (b >= (1u << width_)) throw Error(ErrorKind::kFormat, "stored code exceeds code width");
      }
    } else if (k_ % codes_per_byte(width_) != 0) {
      // Padding bits after the last column must be zero.
      const std::size_t used_bits = (k_ % codes_per_byte(width_)) * width_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (data_[(i + 1) * row_bytes() - 1] >> used_bits) {
          throw Error(ErrorKind::kFormat, "nonzero padding bits in packed row");
        }
      }
    }
    detail::validate_scales(scales_, m_, k_);
  }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return k_; }
  unsigned width() const noexcept { return width_; }
  std::size_t row_bytes() const noexcept { return packed_row_bytes(k_, width_); }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<const std::uint8_t> row_data(std::size_t i) const {
    return std::span<const std::uint8_t>(data_).subspan(i * row_bytes(), row_bytes());
  }
  const ScaleSpec& scales() const noexcept { return scales_; }

  Code code(std::size_t i, std::size_t j) const {
    check_bounds(i, j);
    return code_unchecked(i, j);
  }

  Code code_unchecked(std::size_t i, std::size_t j) const noexcept {
    const std::uint8_t* row = data_.data() + i * row_bytes();
    const unsigned per = codes_per_byte(width_);
    if (per == 1) return row[j];
    const unsigned shift = static_cast<unsigned>(j % per) * width_;
    return (row[j / per] >> shift) & ((1u << width_) - 1u);
  }

  /// Concatenation of the d codes of block j in row i, code(i, j*d) lowest:
  /// sum_r code(i, j*d + r) << (width * r).
  std::uint32_t group_index(std::size_t i, std::size_t j, unsigned d) const {
    if (d == 0 || d * width_ > 32) {
      throw Error(ErrorKind::kInvalidArgument, "group index needs 1 <= d and d*width <= 32");
    }
    if (i >= m_ || j >= k_ / d) {
      std::ostringstream os;
      os << "block (" << i << ", " << j << ") outside " << m_ << " rows x " << k_ / d << " blocks";
      throw Error(ErrorKind::kOutOfRange, os.str());
    }
    return group_index_unchecked(i, j, d);
  }

  std::uint32_t group_index_unchecked(std::size_t i, std::size_t j, unsigned d) const noexcept {
    const std::uint8_t* row = data_.data() + i * row_bytes();
    if (codes_per_byte(width_) == 1) {
      std::uint32_t idx = 0;
      for (unsigned r = 0; r < d; ++r) idx |= static_cast<std::uint32_t>(row[j * d + r]) << (width_ * r);
      return idx;
    }
    // Dense widths: the index is a contiguous little-endian bit field.
    const std::size_t bit = j * d * width_;
    const std::size_t first = bit / 8;
    const unsigned nbits = d * width_;
    const std::size_t avail = row_bytes() - first;
    const std::size_t nbytes = std::min<std::size_t>(avail, (bit % 8 + nbits + 7) / 8);
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < nbytes; ++b) word |= static_cast<std::uint64_t>(row[first + b]) << (8 * b);
    word >>= bit % 8;
    const std::uint64_t mask = (nbits == 64) ? ~0ull : ((1ull << nbits) - 1);
    return static_cast<std::uint32_t>(word & mask);
  }

  bool operator==(const PackedWeightMatrix&) const = default;

 private:
  void check_bounds(std::size_t i, std::size_t j) const {
    if (i >= m_ || j >= k_) {
      std::ostringstream os;
      os << "element (" << i << ", " << j << ") outside " << m_ << "x" << k_;
      throw Error(ErrorKind::kOutOfRange, os.str());
    }
  }

  std::size_t m_ = 0;
  std::size_t k_ = 0;
  unsigned width_ = 4;
  std::vector<std::uint8_t> data_;
  ScaleSpec scales_;
};

/// Packs raw codes (row-major m x k).
inline PackedWeightMatrix pack_codes(std::span<const Code> codes, std::size_t m, std::size_t k, unsigned width,
                                     ScaleSpec scales = NoScale{}) {
  if (codes.size() != m * k) throw Error(ErrorKind::kShapeMismatch, "code grid does not match m x k");
  if (width < Codebook::kMinWidth || width > Codebook::kMaxWidth) {
    throw Error(ErrorKind::kInvalidArgument, "unsupported code width");
  }
  const std::size_t rb = packed_row_bytes(k, width);
  const unsigned per = codes_per_byte(width);
  std::vector<std::uint8_t> data(m * rb, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const Code c = codes[i * k + j];
      if (c >= (1u << width)) throw Error(ErrorKind::kOutOfRange, "code exceeds code width");
      data[i * rb + j / per] |= static_cast<std::uint8_t>(c << ((j % per) * width));
    }
  }
  return PackedWeightMatrix(m, k, width, std::move(data), std::move(scales));
}

/// Packs real weights. Each weight divided by its scale must be exactly one of
/// the codebook values.
inline PackedWeightMatrix pack(const RowMajorMatrix<double>& weights, const Codebook& cb,
                               ScaleSpec scales = NoScale{}) {
  const std::size_t m = weights.rows();
  const std::size_t k = weights.cols();
  detail::validate_scales(scales, m, k);
  std::vector<Code> codes(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v = weights(i, j) / scale_at(scales, k, i, j);
      auto c = cb.find(v);
      if (!c) {
        std::ostringstream os;
        os << "weight (" << i << ", " << j << ") = " << weights(i, j) << " is not representable";
        throw Error(ErrorKind::kUnrepresentable, os.str());
      }
      codes[i * k + j] = *c;
    }
  }
  return pack_codes(codes, m, k, cb.width(), std::move(scales));
}

/// Rounds each scaled weight to the nearest codebook value before packing.
inline PackedWeightMatrix quantize_nearest(const RowMajorMatrix<double>& weights, const Codebook& cb,
                                           ScaleSpec scales = NoScale{}) {
  const std::size_t m = weights.rows();
  const std::size_t k = weights.cols();
  detail::validate_scales(scales, m, k);
  std::vector<Code> codes(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) codes[i * k + j] = cb.nearest(weights(i, j) / scale_at(scales, k, i, j));
  }
  return pack_codes(codes, m, k, cb.width(), std::move(scales));
}

/// Decoded value at (i, j) with the scale not applied.
inline double unpack(const PackedWeightMatrix& pwm, const Codebook& cb, std::size_t i, std::size_t j) {
  return cb.decode(pwm.code(i, j));
}

/// Dense weights with scales applied.
template <typename T>
RowMajorMatrix<T> dequantize(const PackedWeightMatrix& pwm, const Codebook& cb) {
  if (pwm.width() != cb.width()) throw Error(ErrorKind::kShapeMismatch, "codebook width differs from matrix");
  RowMajorMatrix<T> out(pwm.rows(), pwm.cols());
  for (std::size_t i = 0; i < pwm.rows(); ++i) {
    for (std::size_t j = 0; j < pwm.cols(); ++j) {
      out(i, j) = static_cast<T>(cb.decode(pwm.code_unchecked(i, j)) * scale_at(pwm.scales(), pwm.cols(), i, j));
    }
  }
  return out;
}

/// Decoded values without scales.
inline RowMajorMatrix<double> unpack_all(const PackedWeightMatrix& pwm, const Codebook& cb) {
  RowMajorMatrix<double> out(pwm.rows(), pwm.cols());
  for (std::size_t i = 0; i < pwm.rows(); ++i) {
    for (std::size_t j = 0; j < pwm.cols(); ++j) out(i, j) = cb.decode(pwm.code_unchecked(i, j));
  }
  return out;
}

}  // namespace msgemm
