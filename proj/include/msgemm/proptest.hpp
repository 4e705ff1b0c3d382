// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msgemm/codebook.hpp"
#include "msgemm/cost_model.hpp"
#include "msgemm/gemm.hpp"
#include "msgemm/packing.hpp"
#include "msgemm/verify.hpp"

namespace msgemm::proptest {

enum class Mode { kExactInt, kF32 };
enum class ScaleChoice { kAny, kNone, kPerRow, kPerGroup };
enum class Divisibility { kAny, kDivisible, kTail };

/// Random case generator. Every case derives its own seed from `seed` and its
/// index, so a failure message carrying the case seed is enough to replay it.
struct CaseGen {
  std::uint64_t seed = 1;
  unsigned d_min = 1, d_max = 4;
  std::size_t m_min = 1, m_max = 64;
  std::size_t k_max = 48;
  std::size_t b_min = 1, b_max = 8;
  Mode mode = Mode::kExactInt;
  ScaleChoice scales = ScaleChoice::kAny;
  Divisibility divisibility = Divisibility::kAny;
};

struct Case {
  std::uint64_t seed = 0;
  unsigned d = 1;
  std::size_t m = 0, k = 0, b = 0;
  std::vector<Code> codes;  // row-major m x k
  ScaleSpec scales;
  std::vector<double> x;  // column-major k x b
  bool streaming = false;
  unsigned workers = 1;
};

inline std::uint64_t case_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Reads MSGEMM_CASES / MSGEMM_SEED overrides, falling back to the defaults.
inline std::size_t env_cases(std::size_t fallback) {
  if (const char* v = std::getenv("MSGEMM_CASES")) return std::strtoull(v, nullptr, 10);
  return fallback;
}
inline std::uint64_t env_seed(std::uint64_t fallback) {
  if (const char* v = std::getenv("MSGEMM_SEED")) return std::strtoull(v, nullptr, 10);
  return fallback;
}

inline Case generate_case(const CaseGen& gen, std::uint64_t seed, unsigned width = 4) {
  std::mt19937_64 rng(seed);
  auto uni = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  Case c;
  c.seed = seed;
  c.d = static_cast<unsigned>(uni(gen.d_min, gen.d_max));
  c.m = uni(gen.m_min, gen.m_max);
  c.b = uni(gen.b_min, gen.b_max);

  ScaleChoice sc = gen.scales;
  if (sc == ScaleChoice::kAny) sc = static_cast<ScaleChoice>(uni(1, 3));
  Divisibility div = gen.divisibility;
  if (sc == ScaleChoice::kPerGroup) div = Divisibility::kDivisible;
  if (div == Divisibility::kAny) div = uni(0, 1) ? Divisibility::kDivisible : Divisibility::kTail;
  if (c.d == 1) div = Divisibility::kDivisible;  // d=1 never leaves a tail

  std::size_t group = 0;
  if (sc == ScaleChoice::kPerGroup) {
    group = c.d * uni(1, 2);  // r in {d, 2d}
    c.k = group * uni(1, std::max<std::size_t>(1, gen.k_max / group));
  } else if (div == Divisibility::kDivisible) {
    c.k = c.d * uni(1, std::max<std::size_t>(1, gen.k_max / c.d));
  } else {
    const std::size_t blocks = uni(0, std::max<std::size_t>(1, (gen.k_max - 1) / c.d) - 1);
    c.k = blocks * c.d + uni(1, c.d - 1);
  }

  c.codes.resize(c.m * c.k);
  for (auto& code : c.codes) code = static_cast<Code>(uni(0, (std::size_t{1} << width) - 1));

  auto scale_value = [&]() -> float {
    if (gen.mode == Mode::kExactInt) {
      const int v = static_cast<int>(uni(1, 3));
      return static_cast<float>(uni(0, 1) ? v : -v);
    }
    return std::uniform_real_distribution<float>(0.25f, 4.0f)(rng);
  };
  if (sc == ScaleChoice::kPerRow) {
    PerRowScale s;
    for (std::size_t i = 0; i < c.m; ++i) s.q.push_back(scale_value());
    c.scales = std::move(s);
  } else if (sc == ScaleChoice::kPerGroup) {
    PerGroupScale s{group, {}};
    for (std::size_t i = 0; i < c.m * (c.k / group); ++i) s.q.push_back(scale_value());
    c.scales = std::move(s);
  } else {
    c.scales = NoScale{};
  }

  c.x.resize(c.k * c.b);
  for (auto& v : c.x) {
    if (gen.mode == Mode::kExactInt) {
      v = static_cast<double>(static_cast<long long>(uni(0, 2000)) - 1000);
    } else {
      v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    }
  }
  c.streaming = uni(0, 3) == 0;
  c.workers = uni(0, 3) == 0 ? 3 : 1;
  return c;
}

inline std::string describe(const Case& c) {
  std::ostringstream os;
  os << "seed=" << c.seed << " m=" << c.m << " k=" << c.k << " b=" << c.b << " d=" << c.d
     << " scales=" << c.scales.index() << (c.streaming ? " streaming" : "") << " workers=" << c.workers;
  return os.str();
}

struct Report {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_rel = 0.0;
  std::vector<std::string> messages;

  bool ok() const noexcept { return failures == 0; }
};

namespace detail {

template <typename T>
ActivationMatrix<T> activations_of(const Case& c) {
  std::vector<T> data(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i) data[i] = static_cast<T>(c.x[i]);
  return ActivationMatrix<T>(c.k, c.b, std::move(data));
}

inline void fail(Report& r, const Case& c, const std::string& what) {
  ++r.failures;
  if (r.messages.size() < 20) r.messages.push_back(describe(c) + ": " + what);
}

}  // namespace detail

/// Checks msgemm against naive_gemm on `cases` generated cases: exact
/// equality for Mode::kExactInt, relative error <= 1e-5 for Mode::kF32.
inline Report run_oracle_suite(const CaseGen& gen, std::size_t cases) {
  const Codebook cb = int4_codebook();
  Report report;
  for (std::size_t n = 0; n < cases; ++n) {
    const Case c = generate_case(gen, case_seed(gen.seed, n));
    ++report.cases;
    try {
      const auto pwm = pack_codes(c.codes, c.m, c.k, 4, c.scales);
      GemmOptions opts;
      opts.force_streaming = c.streaming;
      opts.workers = c.workers;
      if (gen.mode == Mode::kExactInt) {
        const auto X = detail::activations_of<std::int64_t>(c);
        const auto y = msgemm<std::int64_t>(pwm, X, c.d, cb, opts);
        const auto ref = naive_gemm<std::int64_t>(pwm, X, cb);
        if (!(y == ref)) detail::fail(report, c, "exact mismatch");
      } else {
        const auto X = detail::activations_of<float>(c);
        const auto y = msgemm<float>(pwm, X, c.d, cb, opts);
        const auto W = dequantize<float>(pwm, cb);
        const auto ref = naive_gemm<float>(W, X);
        const auto stats = compare_outputs(y, ref, W, X);
        report.max_rel = std::max(report.max_rel, stats.max_rel);
        if (stats.max_rel > kF32RelTolerance) {
          std::ostringstream os;
          os << "relative error " << stats.max_rel << " at (" << stats.worst_row << ", " << stats.worst_col << ")";
          detail::fail(report, c, os.str());
        }
      }
    } catch (const std::exception& e) {
      detail::fail(report, c, std::string("threw: ") + e.what());
    }
  }
  return report;
}

/// Checks the instrumented counts of msgemm_counted against the closed-form
/// cost model on generated shapes with d | k and no scales.
inline Report run_formula_suite(CaseGen gen, std::size_t cases) {
  gen.scales = ScaleChoice::kNone;
  gen.divisibility = Divisibility::kDivisible;
  const Codebook cb = int4_codebook();
  Report report;
  for (std::size_t n = 0; n < cases; ++n) {
    const Case c = generate_case(gen, case_seed(gen.seed, n));
    ++report.cases;
    try {
      const auto pwm = pack_codes(c.codes, c.m, c.k, 4);
      GemmOptions opts;
      opts.force_streaming = c.streaming;
      const auto out = msgemm_counted<std::int64_t>(pwm, detail::activations_of<std::int64_t>(c), c.d, cb, opts);
      const auto expect = cost({c.m, c.k, c.b}, c.d);
      const auto b = static_cast<std::uint64_t>(c.b);
      std::ostringstream os;
      if (Count{out.ops.fma} != expect.c_lut) os << " fma " << out.ops.fma << " != " << to_string(expect.c_lut);
      if (Count{out.ops.add} != expect.c_y) os << " add " << out.ops.add << " != " << to_string(expect.c_y);
      if (Count{out.ops.mem_weights} != expect.m_y * b) os << " mem_weights " << out.ops.mem_weights;
      if (Count{out.ops.mem_activations} != expect.m_lut) os << " mem_activations " << out.ops.mem_activations;
      if (out.ops.mul != 0) os << " mul " << out.ops.mul;
      if (!os.str().empty()) detail::fail(report, c, os.str());
    } catch (const std::exception& e) {
      detail::fail(report, c, std::string("threw: ") + e.what());
    }
  }
  return report;
}

}  // namespace msgemm::proptest
