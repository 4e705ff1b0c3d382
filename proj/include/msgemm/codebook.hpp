// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "msgemm/error.hpp"

namespace msgemm {

using Code = std::uint32_t;

/// Bijection between w-bit codes and the scalar values they stand for.
///
/// `decode` maps a code to its value and `encode` is its inverse. A codebook
/// is a plain value table; nothing about the arithmetic of the underlying
/// datatype is assumed, so int4, uint4 and fp8-like alphabets are all handled
/// the same way. Only finite, pairwise distinct values are accepted.
class Codebook {
 public:
  static constexpr unsigned kMinWidth = 2;
  static constexpr unsigned kMaxWidth = 8;

  Codebook(unsigned width, std::vector<double> values) : width_(width), values_(std::move(values)) {
    if (width_ < kMinWidth || width_ > kMaxWidth) {
      std::ostringstream os;
      os << "codebook width must be in [" << kMinWidth << ", " << kMaxWidth << "], got " << width_;
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
    if (values_.size() != (std::size_t{1} << width_)) {
      std::ostringstream os;
      os << "width " << width_ << " codebook needs " << (1u << width_) << " values, got "
         << values_.size();
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
    sorted_.reserve(values_.size());
    for (std::size_t c = 0; c < values_.size(); ++c) {
      if (!std::isfinite(values_[c])) {
        throw Error(ErrorKind::kInvalidArgument, "codebook values must be finite");
      }
      sorted_.emplace_back(values_[c], static_cast<Code>(c));
    }
    std::sort(sorted_.begin(), sorted_.end());
    for (std::size_t i = 1; i < sorted_.size(); ++i) {
      if (sorted_[i - 1].first == sorted_[i].first) {
        std::ostringstream os;
        os << "duplicate codebook value " << sorted_[i].first;
        throw Error(ErrorKind::kInvalidArgument, os.str());
      }
    }
    if (auto z = find(0.0)) zero_code_ = *z;
  }

  unsigned width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::optional<Code> zero_code() const noexcept { return zero_code_; }

  double decode(Code code) const {
    if (code >= values_.size()) {
      std::ostringstream os;
      os << "code " << code << " exceeds " << width_ << "-bit range";
      throw Error(ErrorKind::kOutOfRange, os.str());
    }
    return values_[code];
  }

  Code encode(double value) const {
    if (auto c = find(value)) return *c;
    std::ostringstream os;
    os << "value " << value << " is not in the codebook";
    throw Error(ErrorKind::kUnrepresentable, os.str());
  }

  std::optional<Code> find(double value) const noexcept {
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), value,
                               [](const auto& e, double v) { return e.first < v; });
    if (it == sorted_.end() || it->first != value) return std::nullopt;
    return it->second;
  }

  /// Code whose value is closest to `value`; ties go to the smaller value.
  Code nearest(double value) const {
    if (std::isnan(value)) throw Error(ErrorKind::kUnrepresentable, "cannot quantize NaN");
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), value,
                               [](const auto& e, double v) { return e.first < v; });
    if (it == sorted_.begin()) return it->second;
    if (it == sorted_.end()) return std::prev(it)->second;
    auto lo = std::prev(it);
    return (value - lo->first <= it->first - value) ? lo->second : it->second;
  }

  bool operator==(const Codebook& other) const { return width_ == other.width_ && values_ == other.values_; }

 private:
  unsigned width_;
  std::vector<double> values_;
  std::vector<std::pair<double, Code>> sorted_;
  std::optional<Code> zero_code_;
};

/// Two's-complement signed integers of `width` bits (int4 by default).
inline Codebook signed_int_codebook(unsigned width = 4) {
  if (width < Codebook::kMinWidth || width > Codebook::kMaxWidth) {
    throw Error(ErrorKind::kInvalidArgument, "unsupported integer codebook width");
  }
  const std::size_t n = std::size_t{1} << width;
  std::vector<double> values(n);
  for (std::size_t c = 0; c < n; ++c) {
    values[c] = c < n / 2 ? static_cast<double>(c) : static_cast<double>(c) - static_cast<double>(n);
  }
  return Codebook(width, std::move(values));
}

inline Codebook unsigned_int_codebook(unsigned width = 4) {
  if (width < Codebook::kMinWidth || width > Codebook::kMaxWidth) {
    throw Error(ErrorKind::kInvalidArgument, "unsupported integer codebook width");
  }
  std::vector<double> values(std::size_t{1} << width);
  for (std::size_t c = 0; c < values.size(); ++c) values[c] = static_cast<double>(c);
  return Codebook(width, std::move(values));
}

inline Codebook int4_codebook() { return signed_int_codebook(4); }
inline Codebook uint4_codebook() { return unsigned_int_codebook(4); }

/// Arbitrary alphabet; width is inferred from the number of values.
inline Codebook custom_codebook(std::vector<double> values) {
  unsigned width = 0;
  while ((std::size_t{1} << width) < values.size()) ++width;
  if ((std::size_t{1} << width) != values.size()) {
    std::ostringstream os;
    os << "custom codebook size " << values.size() << " is not a power of two";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  return Codebook(width, std::move(values));
}

}  // namespace msgemm
