// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

#include "msgemm/codebook.hpp"
#include "msgemm/error.hpp"
#include "msgemm/op_count.hpp"

namespace msgemm {

inline constexpr unsigned kMaxTableDepth = 4;
inline constexpr std::size_t kDefaultTableBudget = std::size_t{1} << 30;

struct LutOptions {
  std::size_t budget_bytes = kDefaultTableBudget;
  unsigned workers = 1;
};

/// Entries in one block of a depth-d table: 2^(width*d).
inline std::size_t lut_block_size(unsigned width, unsigned depth) {
  if (depth == 0) throw Error(ErrorKind::kInvalidArgument, "table depth must be at least 1");
  if (depth > kMaxTableDepth || width * depth > 32) {
    std::ostringstream os;
    os << "depth " << depth << " cannot be materialized (max " << kMaxTableDepth << ", width*depth <= 32)";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  return std::size_t{1} << (width * depth);
}

/// Look-up table of depth d over one activation vector x.
///
/// Block j holds every linear combination sum_r b(i_r) * x(j*d + r) of d
/// codebook values with the j-th d-slice of x. Blocks are stored one after
/// another; inside a block the entry for codes (i_0, ..., i_{d-1}) sits at
/// i_0 | i_1 << w | ... , the same index `PackedWeightMatrix::group_index`
/// yields, so phase 2 addresses the table with raw packed weight bits.
template <typename T>
class LookupTable {
 public:
  LookupTable(unsigned depth, unsigned width, std::size_t num_blocks)
      : depth_(depth),
        width_(width),
        num_blocks_(num_blocks),
        block_size_(lut_block_size(width, depth)),
        entries_(block_size_ * num_blocks) {}

  unsigned depth() const noexcept { return depth_; }
  unsigned width() const noexcept { return width_; }
  std::size_t num_blocks() const noexcept { return num_blocks_; }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::span<const T> entries() const noexcept { return entries_; }
  std::span<const T> block(std::size_t j) const {
    return std::span<const T>(entries_).subspan(j * block_size_, block_size_);
  }
  std::span<T> block(std::size_t j) { return std::span<T>(entries_).subspan(j * block_size_, block_size_); }

  const T& operator()(std::uint32_t idx, std::size_t j) const noexcept { return entries_[j * block_size_ + idx]; }

  /// Entry addressed by individual codes, i_0 first.
  T at(std::span<const Code> codes, std::size_t j) const {
    if (codes.size() != depth_) throw Error(ErrorKind::kInvalidArgument, "need exactly depth codes");
    if (j >= num_blocks_) throw Error(ErrorKind::kOutOfRange, "block index out of range");
    std::uint32_t idx = 0;
    for (unsigned r = 0; r < depth_; ++r) {
      if (codes[r] >> width_) throw Error(ErrorKind::kOutOfRange, "code exceeds table width");
      idx |= codes[r] << (width_ * r);
    }
    return (*this)(idx, j);
  }

 private:
  unsigned depth_;
  unsigned width_;
  std::size_t num_blocks_;
  std::size_t block_size_;
  std::vector<T> entries_;
};

namespace detail {

template <typename T>
std::vector<T> decoded_alphabet(const Codebook& cb) {
  std::vector<T> out(cb.size());
  for (std::size_t c = 0; c < cb.size(); ++c) out[c] = static_cast<T>(cb.values()[c]);
  return out;
}

// Fills one block: idx is walked from 0 upward and split into its d fields.
// Each entry costs exactly d multiply-adds starting from zero. This is the
// instrumented path.
template <typename T>
void fill_block_direct(std::span<const T> alphabet, std::span<const T> xs, unsigned width, unsigned d,
                       std::span<T> out) {
  const std::uint32_t mask = (1u << width) - 1u;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    T acc{};
    for (unsigned r = 0; r < d; ++r) acc += alphabet[(idx >> (width * r)) & mask] * xs[r];
    out[idx] = acc;
  }
}

// Same values as fill_block_direct, built one field at a time: the entries
// whose top fields are zero are extended by alphabet[c] * xs[r]. Costs about
// one multiply-add per entry and performs the additions in the same order, so
// results are bitwise identical.
template <typename T>
void fill_block_incremental(std::span<const T> alphabet, std::span<const T> xs, unsigned width, unsigned d,
                            std::span<T> out) {
  const std::size_t n = alphabet.size();
  for (std::size_t c = 0; c < n; ++c) out[c] = T{} + alphabet[c] * xs[0];
  std::size_t span = n;
  for (unsigned r = 1; r < d; ++r) {
    for (std::size_t hi = n; hi-- > 0;) {
      const T term = alphabet[hi] * xs[r];
      T* dst = out.data() + hi * span;
      for (std::size_t lo = 0; lo < span; ++lo) dst[lo] = out[lo] + term;
    }
    span *= n;
  }
  (void)width;
}

template <typename T>
void fill_block(std::span<const T> alphabet, std::span<const T> xs, unsigned width, unsigned d, std::span<T> out,
                bool counted) {
  if (counted) {
    fill_block_direct<T>(alphabet, xs, width, d, out);
  } else {
    fill_block_incremental<T>(alphabet, xs, width, d, out);
  }
}

inline void check_budget(std::size_t entries_per_block, std::size_t blocks, std::size_t elem_bytes,
                         std::size_t budget) {
  const std::size_t max_entries = budget / elem_bytes;
  if (blocks != 0 && entries_per_block > max_entries / blocks) {
    std::ostringstream os;
    os << blocks << " blocks of " << entries_per_block << " entries exceed budget of " << budget << " bytes";
    throw Error(ErrorKind::kBudgetExceeded, os.str());
  }
}

inline void count_block(OpCount* counter, std::size_t block_size, unsigned d) {
  if (!counter) return;
  counter->fma += static_cast<std::uint64_t>(block_size) * d;
  counter->mem_activations += d;
}

}  // namespace detail

/// Builds block j of the depth-d table over x into `out` (2^(width*d) slots).
/// With a counter attached every entry is evaluated with exactly d
/// multiply-adds and counted; without one a cheaper incremental construction
/// produces the same values.
template <typename T>
void build_lut_block_into(std::span<const T> x, const Codebook& cb, unsigned d, std::size_t j, std::span<T> out,
                          OpCount* counter = nullptr) {
  const std::size_t bs = lut_block_size(cb.width(), d);
  if (j >= x.size() / d) {
    std::ostringstream os;
    os << "block " << j << " out of range: k=" << x.size() << ", d=" << d << " gives " << x.size() / d << " blocks";
    throw Error(ErrorKind::kOutOfRange, os.str());
  }
  if (out.size() != bs) throw Error(ErrorKind::kShapeMismatch, "output span is not one block");
  const auto alphabet = detail::decoded_alphabet<T>(cb);
  detail::fill_block<T>(alphabet, x.subspan(j * d, d), cb.width(), d, out, counter != nullptr);
  detail::count_block(counter, bs, d);
}

template <typename T>
std::vector<T> build_lut_block(std::span<const T> x, const Codebook& cb, unsigned d, std::size_t j,
                               std::size_t budget_bytes = kDefaultTableBudget, OpCount* counter = nullptr) {
  const std::size_t bs = lut_block_size(cb.width(), d);
  detail::check_budget(bs, 1, sizeof(T), budget_bytes);
  std::vector<T> out(bs);
  build_lut_block_into<T>(x, cb, d, j, out, counter);
  return out;
}

/// Builds all floor(k/d) blocks. Blocks are independent, so with more than
/// one worker they are split into contiguous ranges; the result does not
/// depend on the worker count.
template <typename T>
LookupTable<T> build_lut(std::span<const T> x, const Codebook& cb, unsigned d, const LutOptions& opts = {},
                         OpCount* counter = nullptr) {
  const std::size_t bs = lut_block_size(cb.width(), d);
  const std::size_t nb = x.size() / d;
  detail::check_budget(bs, nb, sizeof(T), opts.budget_bytes);

  LookupTable<T> table(d, cb.width(), nb);
  const auto alphabet = detail::decoded_alphabet<T>(cb);
  auto fill_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      detail::fill_block<T>(alphabet, x.subspan(j * d, d), cb.width(), d, table.block(j), counter != nullptr);
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(opts.workers, nb));
  if (workers == 1) {
    fill_range(0, nb);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill_range, nb * w / workers, nb * (w + 1) / workers);
  }
  for (std::size_t j = 0; j < nb; ++j) detail::count_block(counter, bs, d);
  return table;
}

}  // namespace msgemm
