// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "msgemm/error.hpp"
#include "msgemm/matrix.hpp"

namespace msgemm {

inline constexpr double kF32RelTolerance = 1e-5;

struct ErrorStats {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::size_t worst_row = 0;
  std::size_t worst_col = 0;
};

/// Element-wise error of `y` against `ref`, where ref = W x.
///
/// The relative error of element (i, c) is |y - ref| / sum_j |W(i,j) x(j,c)|.
/// The denominator is the magnitude of the dot product before cancellation,
/// which bounds |ref| from above and is what floating-point summation error
/// scales with; plain |ref| is meaningless when the sum cancels to ~0.
template <typename T>
ErrorStats compare_outputs(const OutputMatrix<T>& y, const OutputMatrix<T>& ref, const RowMajorMatrix<T>& W,
                           const ActivationMatrix<T>& X) {
  if (y.rows() != ref.rows() || y.cols() != ref.cols()) throw Error(ErrorKind::kShapeMismatch, "output shapes differ");
  ErrorStats s;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const double diff = std::abs(static_cast<double>(y(i, c)) - static_cast<double>(ref(i, c)));
      double mag = 0.0;
      for (std::size_t j = 0; j < W.cols(); ++j) {
        mag += std::abs(static_cast<double>(W(i, j)) * static_cast<double>(X(j, c)));
      }
      const double rel = mag > 0.0 ? diff / mag : diff;
      if (diff > s.max_abs) s.max_abs = diff;
      if (rel > s.max_rel) {
        s.max_rel = rel;
        s.worst_row = i;
        s.worst_col = c;
      }
    }
  }
  return s;
}

}  // namespace msgemm
