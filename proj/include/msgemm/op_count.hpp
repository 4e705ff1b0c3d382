// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>

namespace msgemm {

/// Operation and memory-access tallies of an instrumented run.
///
/// `fma` covers table construction (d per entry) and direct multiply-adds on
/// tail columns, `add` covers table-entry accumulation, `mul` covers shared
/// scale multiplies. `mem_activations` counts reads of x only; table writes
/// are not memory accesses in this accounting.
struct OpCount {
  std::uint64_t fma = 0;
  std::uint64_t add = 0;
  std::uint64_t mul = 0;
  std::uint64_t mem_weights = 0;
  std::uint64_t mem_activations = 0;

  OpCount& operator+=(const OpCount& o) noexcept {
    fma += o.fma;
    add += o.add;
    mul += o.mul;
    mem_weights += o.mem_weights;
    mem_activations += o.mem_activations;
    return *this;
  }
  friend OpCount operator+(OpCount a, const OpCount& b) noexcept { return a += b; }
  bool operator==(const OpCount&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const OpCount& c) {
  return os << "fma=" << c.fma << " add=" << c.add << " mul=" << c.mul << " mem_weights=" << c.mem_weights
            << " mem_activations=" << c.mem_activations;
}

}  // namespace msgemm
