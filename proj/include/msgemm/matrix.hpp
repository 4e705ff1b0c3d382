// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "msgemm/error.hpp"

namespace msgemm {

/// Dense matrix with contiguous columns. Used for activations (k x b) and
/// outputs (m x b): each column is one activation / output vector.
template <typename T>
class ColMajorMatrix {
 public:
  ColMajorMatrix() = default;
  ColMajorMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ColMajorMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      std::ostringstream os;
      os << "column-major payload has " << data_.size() << " elements, expected " << rows_ << "x" << cols_;
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  std::span<const T> col(std::size_t c) const { return std::span<const T>(data_).subspan(c * rows_, rows_); }
  std::span<T> col(std::size_t c) { return std::span<T>(data_).subspan(c * rows_, rows_); }

  T& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  bool operator==(const ColMajorMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
using ActivationMatrix = ColMajorMatrix<T>;
template <typename T>
using OutputMatrix = ColMajorMatrix<T>;

/// Dense row-major matrix; the unpacked form of a weight matrix.
template <typename T>
class RowMajorMatrix {
 public:
  RowMajorMatrix() = default;
  RowMajorMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RowMajorMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      std::ostringstream os;
      os << "row-major payload has " << data_.size() << " elements, expected " << rows_ << "x" << cols_;
      throw Error(ErrorKind::kShapeMismatch, os.str());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }
  std::span<const T> row(std::size_t r) const { return std::span<const T>(data_).subspan(r * cols_, cols_); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool operator==(const RowMajorMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace msgemm
