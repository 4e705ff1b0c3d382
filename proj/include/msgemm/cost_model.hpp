// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "msgemm/error.hpp"

namespace msgemm {

/// Exact operation count. 2^(4d) * k * b stays well inside 128 bits for the
/// supported d <= 16.
using Count = unsigned __int128;

inline constexpr unsigned kMaxModelDepth = 16;  // at width 4

inline std::string to_string(Count v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

struct GemmDims {
  std::uint64_t m = 0;
  std::uint64_t k = 0;
  std::uint64_t b = 1;
  bool operator==(const GemmDims&) const = default;
};

struct CostReport {
  GemmDims dims;
  unsigned d = 0;
  Count c_lut = 0;    // table construction FMAs
  Count m_lut = 0;    // activation reads
  Count c_y = 0;      // table-entry additions
  Count m_y = 0;      // weight reads
  Count c_total = 0;
  Count m_total = 0;
  Count c_naive = 0;
  Count m_naive = 0;
  double speedup = 0.0;
};

namespace detail {

inline void validate_cost_args(const GemmDims& dims, unsigned d, unsigned width) {
  if (dims.m == 0 || dims.k == 0 || dims.b == 0) throw Error(ErrorKind::kInvalidArgument, "dimensions must be positive");
  if (d == 0) throw Error(ErrorKind::kInvalidArgument, "depth d must be at least 1");
  if (width < 2 || width > 8) throw Error(ErrorKind::kInvalidArgument, "code width must be in [2, 8]");
  if (width * d > 4 * kMaxModelDepth) {
    std::ostringstream os;
    os << "width " << width << " at depth " << d << " exceeds the modeled table size";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  if (dims.k % d != 0) {
    std::ostringstream os;
    os << "d=" << d << " does not divide k=" << dims.k;
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
}

}  // namespace detail

/// Closed-form cost of both phases for an m x k x b GeMM with `width`-bit
/// weights (int4 by default). Purely analytical: no table is built, so any d
/// up to kMaxModelDepth works.
inline CostReport cost(const GemmDims& dims, unsigned d, unsigned width = 4) {
  detail::validate_cost_args(dims, d, width);
  const Count m = dims.m, k = dims.k, b = dims.b;
  CostReport r;
  r.dims = dims;
  r.d = d;
  r.c_lut = (Count{1} << (width * d)) * k * b;
  r.m_lut = k * b;
  r.c_y = (k / d - 1) * m * b;
  r.m_y = m * k;
  r.c_total = r.c_lut + r.c_y;
  r.m_total = r.m_lut + r.m_y;
  r.c_naive = m * k * b;
  r.m_naive = k * b + m * k;
  // Batch cancels; dividing it out first keeps the ratio independent of b.
  r.speedup = static_cast<double>(m * k) / static_cast<double>((Count{1} << (width * d)) * k + (k / d - 1) * m);
  return r;
}

/// m*k / (2^(4d)*k + (k/d - 1)*m). Batch size cancels out.
inline double speedup(std::uint64_t m, std::uint64_t k, unsigned d) { return cost({m, k, 1}, d).speedup; }

struct NamedDims {
  std::string name;
  GemmDims dims;
};

/// GPT-3 MLP shapes: 12288 x 49152 (up-projection) and 49152 x 12288.
inline std::optional<NamedDims> preset(const std::string& name, std::uint64_t b = 1) {
  if (name == "mlp1") return NamedDims{name, {12288, 49152, b}};
  if (name == "mlp2") return NamedDims{name, {49152, 12288, b}};
  return std::nullopt;
}

struct SweepRow {
  std::string name;
  CostReport report;
};

struct SweepSkip {
  std::string name;
  GemmDims dims;
  unsigned d = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSkip> skipped;  // d values that do not divide k
};

inline SweepResult sweep(const std::vector<NamedDims>& shapes, unsigned d_lo, unsigned d_hi) {
  if (shapes.empty() || d_lo == 0 || d_lo > d_hi) throw Error(ErrorKind::kInvalidArgument, "empty sweep range");
  SweepResult out;
  for (const auto& s : shapes) {
    for (unsigned d = d_lo; d <= d_hi; ++d) {
      if (s.dims.k % d != 0) {
        out.skipped.push_back({s.name, s.dims, d});
        continue;
      }
      out.rows.push_back({s.name, cost(s.dims, d)});
    }
  }
  return out;
}

inline constexpr const char* kSweepCsvHeader = "preset,m,k,b,d,c_lut,c_y,c_total,c_naive,speedup";

inline void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << kSweepCsvHeader << '\n';
  for (const auto& row : result.rows) {
    const auto& r = row.report;
    os << row.name << ',' << r.dims.m << ',' << r.dims.k << ',' << r.dims.b << ',' << r.d << ',' << to_string(r.c_lut)
       << ',' << to_string(r.c_y) << ',' << to_string(r.c_total) << ',' << to_string(r.c_naive) << ','
       << std::setprecision(std::numeric_limits<double>::max_digits10) << r.speedup << '\n';
  }
}

}  // namespace msgemm
