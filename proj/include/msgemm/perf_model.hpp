// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "msgemm/cost_model.hpp"
#include "msgemm/error.hpp"

namespace msgemm {

/// Throughputs (operations per second) of the two engines a device offers:
/// one for fused multiply-adds (table construction, naive GeMM) and one for
/// adding table entries (table consumption).
struct DeviceProfile {
  std::string name;
  double fma_rate = 0.0;
  double lut_add_rate = 0.0;
};

/// A100: 312 TFLOPS fp16 on Tensor Cores, 19.5 TFLOPS on CUDA cores. Table
/// consumption cannot use Tensor Cores, so it runs at the CUDA-core rate.
inline DeviceProfile a100_profile() { return {"a100", 312e12, 19.5e12}; }

inline void validate_profile(const DeviceProfile& p) {
  if (!(p.fma_rate > 0.0) || !(p.lut_add_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "profile rates must be positive");
  }
}

/// Parses `key = value` lines. Keys: name, fma_rate, lut_add_rate. Blank
/// lines and lines starting with '#' are ignored.
inline DeviceProfile parse_profile(std::string_view text) {
  DeviceProfile p{"custom", 0.0, 0.0};
  bool have_fma = false, have_lut = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kFormat, "profile line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "name") {
      p.name = value;
      continue;
    }
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorKind::kFormat, "profile line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
    if (key == "fma_rate") {
      p.fma_rate = v;
      have_fma = true;
    } else if (key == "lut_add_rate") {
      p.lut_add_rate = v;
      have_lut = true;
    } else {
      throw Error(ErrorKind::kFormat, "profile line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!have_fma || !have_lut) throw Error(ErrorKind::kFormat, "profile needs fma_rate and lut_add_rate");
  validate_profile(p);
  return p;
}

inline DeviceProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open profile '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

struct PerfEstimate {
  CostReport cost;
  double t_phase1 = 0.0;
  double t_phase2 = 0.0;
  double t_msgemm = 0.0;     // phases back to back
  double t_pipelined = 0.0;  // perfect overlap, max of the two
  double t_naive = 0.0;
  double ratio = 0.0;        // t_naive / t_msgemm
  double ratio_pipelined = 0.0;
};

/// Compute-rate-only runtime model; memory traffic is not converted to time.
inline PerfEstimate estimate(const GemmDims& dims, unsigned d, const DeviceProfile& prof) {
  validate_profile(prof);
  PerfEstimate e;
  e.cost = cost(dims, d);
  e.t_phase1 = static_cast<double>(e.cost.c_lut) / prof.fma_rate;
  e.t_phase2 = static_cast<double>(e.cost.c_y) / prof.lut_add_rate;
  e.t_msgemm = e.t_phase1 + e.t_phase2;
  e.t_pipelined = std::max(e.t_phase1, e.t_phase2);
  e.t_naive = static_cast<double>(e.cost.c_naive) / prof.fma_rate;
  e.ratio = e.t_naive / e.t_msgemm;
  e.ratio_pipelined = e.t_naive / e.t_pipelined;
  return e;
}

}  // namespace msgemm
