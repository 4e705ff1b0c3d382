// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "msgemm/codebook.hpp"
#include "msgemm/error.hpp"
#include "msgemm/lut.hpp"
#include "msgemm/matrix.hpp"
#include "msgemm/op_count.hpp"
#include "msgemm/packing.hpp"

namespace msgemm {

/// One table read performed while producing an output element.
struct LookupEvent {
  std::size_t row = 0;
  std::size_t column = 0;  // activation / output column
  std::size_t block = 0;
  std::uint32_t index = 0;
  bool operator==(const LookupEvent&) const = default;
};

using LookupTrace = std::vector<LookupEvent>;

struct GemmOptions {
  std::size_t budget_bytes = kDefaultTableBudget;
  unsigned workers = 1;
  /// Record every table read. Forces a single worker.
  LookupTrace* trace = nullptr;
  /// Build and consume one block at a time even when the whole table fits.
  bool force_streaming = false;
};

template <typename T>
struct CountedOutput {
  OutputMatrix<T> y;
  OpCount ops;
};

namespace detail {

inline void validate_gemm(const PackedWeightMatrix& pwm, std::size_t x_rows, unsigned d, const Codebook& cb) {
  if (d == 0) throw Error(ErrorKind::kInvalidArgument, "depth d must be at least 1");
  if (pwm.cols() != x_rows) {
    std::ostringstream os;
    os << "weights are " << pwm.rows() << "x" << pwm.cols() << " but activations have " << x_rows << " rows";
    throw Error(ErrorKind::kShapeMismatch, os.str());
  }
  if (pwm.width() != cb.width()) throw Error(ErrorKind::kShapeMismatch, "codebook width differs from weight width");
  if (const auto* grp = std::get_if<PerGroupScale>(&pwm.scales())) {
    if (grp->group_size < d || grp->group_size % d != 0) {
      std::ostringstream os;
      os << "group size " << grp->group_size << " must be a multiple of d=" << d;
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
  }
}

// Phase 2 for a contiguous row range, given a fully built table.
template <typename T>
void consume_rows(const PackedWeightMatrix& pwm, const LookupTable<T>& table, std::span<const T> alphabet,
                  std::span<const T> x, std::size_t col, std::size_t row_lo, std::size_t row_hi, std::span<T> y,
                  OpCount& ops, LookupTrace* trace) {
  const unsigned d = table.depth();
  const std::size_t k = pwm.cols();
  const std::size_t nb = table.num_blocks();
  const ScaleSpec& scales = pwm.scales();
  const auto* per_row = std::get_if<PerRowScale>(&scales);
  const auto* per_group = std::get_if<PerGroupScale>(&scales);
  const std::size_t blocks_per_group = per_group ? per_group->group_size / d : nb;
  const std::size_t groups = per_group ? k / per_group->group_size : 1;

  auto lookup = [&](std::size_t i, std::size_t j) -> T {
    const std::uint32_t idx = pwm.group_index_unchecked(i, j, d);
    if (trace) trace->push_back({i, col, j, idx});
    ops.mem_weights += d;
    return table(idx, j);
  };

  for (std::size_t i = row_lo; i < row_hi; ++i) {
    T acc{};
    if (per_group) {
      for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t j0 = g * blocks_per_group;
        T partial = lookup(i, j0);
        for (std::size_t j = j0 + 1; j < j0 + blocks_per_group; ++j) {
          partial += lookup(i, j);
          ++ops.add;
        }
        const T scaled = static_cast<T>(per_group->q[i * groups + g]) * partial;
        ++ops.mul;
        if (g == 0) {
          acc = scaled;
        } else {
          acc += scaled;
          ++ops.add;
        }
      }
    } else if (nb > 0) {
      acc = lookup(i, 0);
      for (std::size_t j = 1; j < nb; ++j) {
        acc += lookup(i, j);
        ++ops.add;
      }
    }
    for (std::size_t c = nb * d; c < k; ++c) {
      acc += alphabet[pwm.code_unchecked(i, c)] * x[c];
      ++ops.fma;
      ++ops.mem_weights;
    }
    if (per_row) {
      acc *= static_cast<T>(per_row->q[i]);
      ++ops.mul;
    }
    y[i] = acc;
  }
}

// Materializes the whole table for column `col`, then consumes it.
template <typename T>
void column_full_table(const PackedWeightMatrix& pwm, std::span<const T> x, std::size_t col, const Codebook& cb,
                       unsigned d, const GemmOptions& opts, std::span<const T> alphabet, std::span<T> y,
                       OpCount& ops, bool counted) {
  const std::size_t m = pwm.rows();
  const auto table = build_lut<T>(x, cb, d, LutOptions{opts.budget_bytes, opts.workers}, counted ? &ops : nullptr);
  if (pwm.cols() % d != 0) ops.mem_activations += pwm.cols() % d;

  const std::size_t workers = opts.trace ? 1 : std::max<std::size_t>(1, std::min<std::size_t>(opts.workers, m));
  if (workers == 1) {
    consume_rows<T>(pwm, table, alphabet, x, col, 0, m, y, ops, opts.trace);
    return;
  }
  std::vector<OpCount> partial(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        consume_rows<T>(pwm, table, alphabet, x, col, m * w / workers, m * (w + 1) / workers, y, partial[w],
                        nullptr);
      });
    }
  }
  for (const auto& p : partial) ops += p;
}

// Builds one block at a time and folds it into every row before moving on.
// Summation order per row matches column_full_table exactly.
template <typename T>
void column_streaming(const PackedWeightMatrix& pwm, std::span<const T> x, std::size_t col, const Codebook& cb,
                      unsigned d, std::span<const T> alphabet, std::span<T> y, OpCount& ops, LookupTrace* trace,
                      bool counted) {
  const std::size_t m = pwm.rows();
  const std::size_t k = pwm.cols();
  const std::size_t nb = k / d;
  const ScaleSpec& scales = pwm.scales();
  const auto* per_row = std::get_if<PerRowScale>(&scales);
  const auto* per_group = std::get_if<PerGroupScale>(&scales);
  const std::size_t blocks_per_group = per_group ? per_group->group_size / d : nb;
  const std::size_t groups = per_group ? k / per_group->group_size : 1;

  std::vector<T> block(lut_block_size(cb.width(), d));
  std::vector<T> partial(per_group ? m : 0);
  std::fill(y.begin(), y.end(), T{});
  for (std::size_t j = 0; j < nb; ++j) {
    build_lut_block_into<T>(x, cb, d, j, block, counted ? &ops : nullptr);
    const std::size_t g = j / blocks_per_group;
    const bool group_start = j % blocks_per_group == 0;
    const bool group_end = (j + 1) % blocks_per_group == 0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t idx = pwm.group_index_unchecked(i, j, d);
      if (trace) trace->push_back({i, col, j, idx});
      ops.mem_weights += d;
      const T v = block[idx];
      if (per_group) {
        if (group_start) {
          partial[i] = v;
        } else {
          partial[i] += v;
          ++ops.add;
        }
        if (group_end) {
          const T scaled = static_cast<T>(per_group->q[i * groups + g]) * partial[i];
          ++ops.mul;
          if (g == 0) {
            y[i] = scaled;
          } else {
            y[i] += scaled;
            ++ops.add;
          }
        }
      } else if (j == 0) {
        y[i] = v;
      } else {
        y[i] += v;
        ++ops.add;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = nb * d; c < k; ++c) {
      y[i] += alphabet[pwm.code_unchecked(i, c)] * x[c];
      ++ops.fma;
      ++ops.mem_weights;
    }
    if (per_row) {
      y[i] *= static_cast<T>(per_row->q[i]);
      ++ops.mul;
    }
  }
  ops.mem_activations += k % d;
}

template <typename T>
CountedOutput<T> msgemm_impl(const PackedWeightMatrix& pwm, const ActivationMatrix<T>& X, unsigned d,
                             const Codebook& cb, const GemmOptions& opts, bool counted) {
  validate_gemm(pwm, X.rows(), d, cb);
  const std::size_t bs = lut_block_size(cb.width(), d);
  const std::size_t nb = pwm.cols() / d;
  check_budget(bs, 1, sizeof(T), opts.budget_bytes);
  const bool fits = nb == 0 || bs <= opts.budget_bytes / sizeof(T) / nb;
  const bool streaming = opts.force_streaming || !fits;

  const auto alphabet = decoded_alphabet<T>(cb);
  CountedOutput<T> out{OutputMatrix<T>(pwm.rows(), X.cols()), {}};
  for (std::size_t c = 0; c < X.cols(); ++c) {
    if (streaming) {
      column_streaming<T>(pwm, X.col(c), c, cb, d, alphabet, out.y.col(c), out.ops, opts.trace, counted);
    } else {
      column_full_table<T>(pwm, X.col(c), c, cb, d, opts, alphabet, out.y.col(c), out.ops, counted);
    }
  }
  return out;
}

template <typename T>
using WideAccumulator =
    std::conditional_t<std::is_integral_v<T>, __int128, std::conditional_t<std::is_same_v<T, float>, double, long double>>;

}  // namespace detail

/// Two-phase look-up-table GeMM: for each activation column, build the
/// depth-d table over that column (phase 1), then sum k/d table entries per
/// output row addressed by the packed weight bits (phase 2). Columns beyond
/// the last full block (k mod d of them) are handled by direct multiply-add.
/// Shared scales are applied to the summed table entries, per row or per
/// group. Falls back to block-at-a-time streaming when the full table does not
/// fit in `opts.budget_bytes`.
///
/// Use T = std::int64_t for exact integer results (integer activations and
/// integer-valued scales) or float for the usual f32 path.
template <typename T>
OutputMatrix<T> msgemm(const PackedWeightMatrix& pwm, const ActivationMatrix<T>& X, unsigned d, const Codebook& cb,
                       const GemmOptions& opts = {}) {
  return detail::msgemm_impl<T>(pwm, X, d, cb, opts, false).y;
}

/// Same result as msgemm plus the executed operation counts. With d | k and
/// no scales: fma = 2^(width*d) * k * b, add = (k/d - 1) * m * b,
/// mem_weights = m * k * b and mem_activations = k * b.
template <typename T>
CountedOutput<T> msgemm_counted(const PackedWeightMatrix& pwm, const ActivationMatrix<T>& X, unsigned d,
                                const Codebook& cb, const GemmOptions& opts = {}) {
  return detail::msgemm_impl<T>(pwm, X, d, cb, opts, true);
}

/// Reference triple loop with a wide accumulator (128-bit integer or a wider
/// float type).
template <typename T>
OutputMatrix<T> naive_gemm(const RowMajorMatrix<T>& W, const ActivationMatrix<T>& X, OpCount* counter = nullptr) {
  if (W.cols() != X.rows()) {
    std::ostringstream os;
    os << "weights are " << W.rows() << "x" << W.cols() << " but activations have " << X.rows() << " rows";
    throw Error(ErrorKind::kShapeMismatch, os.str());
  }
  const std::size_t m = W.rows();
  const std::size_t k = W.cols();
  OutputMatrix<T> Y(m, X.cols());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    const auto x = X.col(c);
    for (std::size_t i = 0; i < m; ++i) {
      detail::WideAccumulator<T> acc{};
      for (std::size_t j = 0; j < k; ++j) {
        acc += static_cast<detail::WideAccumulator<T>>(W(i, j)) * static_cast<detail::WideAccumulator<T>>(x[j]);
      }
      Y(i, c) = static_cast<T>(acc);
    }
  }
  if (counter) {
    const auto b = static_cast<std::uint64_t>(X.cols());
    counter->fma += static_cast<std::uint64_t>(m) * k * b;
    counter->mem_weights += static_cast<std::uint64_t>(m) * k * b;
    counter->mem_activations += static_cast<std::uint64_t>(k) * b;
  }
  return Y;
}

/// Naive reference on the dequantized (scale-applied) weights.
template <typename T>
OutputMatrix<T> naive_gemm(const PackedWeightMatrix& pwm, const ActivationMatrix<T>& X, const Codebook& cb,
                           OpCount* counter = nullptr) {
  return naive_gemm<T>(dequantize<T>(pwm, cb), X, counter);
}

}  // namespace msgemm
