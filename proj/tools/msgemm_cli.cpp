// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: pack weights, generate activations, run and verify
// look-up-table GeMMs, print cost sweeps and device estimates, and time the
// CPU kernels.
//
// Exit codes: 0 success, 1 validation / format / io error, 2 verification
// failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msgemm/codebook.hpp"
#include "msgemm/cost_model.hpp"
#include "msgemm/gemm.hpp"
#include "msgemm/io.hpp"
#include "msgemm/packing.hpp"
#include "msgemm/perf_model.hpp"
#include "msgemm/verify.hpp"

namespace {

using namespace msgemm;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 2;

enum class Mode { kExact, kF32 };

struct RunConfig {
  // pack / activations
  std::vector<std::size_t> random_dims;
  std::uint64_t seed = 1;
  std::string csv_path;
  std::string codebook = "int4";
  std::string scale_mode = "none";
  std::size_t group_size = 0;
  std::string scales_csv;
  bool quantize = false;
  std::string output;
  // unpack
  std::string input;
  bool dequantize = false;
  // matmul / verify
  std::string weights;
  std::string activations;
  unsigned d = 2;
  Mode mode = Mode::kF32;
  bool count = false;
  unsigned workers = 1;
  std::size_t budget = kDefaultTableBudget;
  // cost / perf / bench
  std::vector<std::string> presets;
  std::uint64_t m = 0, k = 0, b = 1;
  std::string d_range = "1..4";
  std::string csv_out;
  std::string profile = "a100";
  std::size_t iters = 5;
};

Codebook codebook_by_name(const std::string& name) {
  if (name == "int4") return int4_codebook();
  if (name == "uint4") return uint4_codebook();
  throw Error(ErrorKind::kInvalidArgument, "unknown codebook '" + name + "' (int4, uint4)");
}

std::pair<unsigned, unsigned> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = static_cast<unsigned>(std::stoul(text));
      return {v, v};
    }
    return {static_cast<unsigned>(std::stoul(text.substr(0, dots))),
            static_cast<unsigned>(std::stoul(text.substr(dots + 2)))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidArgument, "bad range '" + text + "', expected A..B");
  }
}

std::vector<NamedDims> shapes_from(const RunConfig& cfg) {
  std::vector<NamedDims> shapes;
  for (const auto& p : cfg.presets) {
    auto named = preset(p, cfg.b);
    if (!named) throw Error(ErrorKind::kInvalidArgument, "unknown preset '" + p + "' (mlp1, mlp2)");
    shapes.push_back(*named);
  }
  if (cfg.m != 0 || cfg.k != 0) shapes.push_back({"custom", {cfg.m, cfg.k, cfg.b}});
  if (shapes.empty()) throw Error(ErrorKind::kInvalidArgument, "give --preset or --m/--k");
  return shapes;
}

ScaleSpec random_scales(const std::string& mode, std::size_t m, std::size_t k, std::size_t group,
                        std::mt19937_64& rng) {
  // Small signed integers keep exact-int mode exact.
  auto draw = [&] {
    const int v = 1 + static_cast<int>(rng() % 3);
    return static_cast<float>(rng() % 2 ? v : -v);
  };
  if (mode == "row") {
    PerRowScale s;
    for (std::size_t i = 0; i < m; ++i) s.q.push_back(draw());
    return s;
  }
  if (mode == "group") {
    if (group == 0 || k % group != 0) throw Error(ErrorKind::kInvalidArgument, "--group-size must divide k");
    PerGroupScale s{group, {}};
    for (std::size_t i = 0; i < m * (k / group); ++i) s.q.push_back(draw());
    return s;
  }
  if (mode != "none") throw Error(ErrorKind::kInvalidArgument, "unknown scale mode '" + mode + "'");
  return NoScale{};
}

ScaleSpec scales_from_csv(const std::string& mode, std::size_t group, const std::string& path) {
  const auto grid = io::load_csv_matrix(path);
  std::vector<float> q;
  for (double v : grid.data()) q.push_back(static_cast<float>(v));
  if (mode == "row") return PerRowScale{std::move(q)};
  if (mode == "group") return PerGroupScale{group, std::move(q)};
  throw Error(ErrorKind::kInvalidArgument, "--scales needs --scale-mode row or group");
}

const char* scale_name(const ScaleSpec& s) {
  switch (scale_mode(s)) {
    case ScaleMode::kNone: return "none";
    case ScaleMode::kPerRow: return "per-row";
    case ScaleMode::kPerGroup: return "per-group";
  }
  return "?";
}

int cmd_pack(const RunConfig& cfg) {
  const auto cb = codebook_by_name(cfg.codebook);
  PackedWeightMatrix pwm;
  if (!cfg.random_dims.empty()) {
    const std::size_t m = cfg.random_dims[0], k = cfg.random_dims[1];
    std::mt19937_64 rng(cfg.seed);
    std::vector<Code> codes(m * k);
    for (auto& c : codes) c = static_cast<Code>(rng() % cb.size());
    ScaleSpec scales = cfg.scales_csv.empty() ? random_scales(cfg.scale_mode, m, k, cfg.group_size, rng)
                                              : scales_from_csv(cfg.scale_mode, cfg.group_size, cfg.scales_csv);
    pwm = pack_codes(codes, m, k, cb.width(), std::move(scales));
  } else if (!cfg.csv_path.empty()) {
    const auto W = io::load_csv_matrix(cfg.csv_path);
    ScaleSpec scales = NoScale{};
    if (!cfg.scales_csv.empty()) {
      scales = scales_from_csv(cfg.scale_mode, cfg.group_size, cfg.scales_csv);
    } else if (cfg.scale_mode != "none") {
      throw Error(ErrorKind::kInvalidArgument, "--scale-mode with --csv needs --scales");
    }
    pwm = cfg.quantize ? quantize_nearest(W, cb, std::move(scales)) : pack(W, cb, std::move(scales));
  } else {
    throw Error(ErrorKind::kInvalidArgument, "give --random M K or --csv FILE");
  }
  io::save_weights(cfg.output, pwm);
  std::cout << "wrote " << cfg.output << ": m=" << pwm.rows() << " k=" << pwm.cols() << " width=" << pwm.width()
            << " scales=" << scale_name(pwm.scales()) << '\n';
  return kExitOk;
}

void write_grid(std::ostream& os, std::size_t rows, std::size_t cols, auto&& at) {
  os << std::setprecision(9);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) os << (j ? "," : "") << at(i, j);
    os << '\n';
  }
}

int cmd_unpack(const RunConfig& cfg) {
  const auto bytes = io::read_file(cfg.input);
  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) throw Error(ErrorKind::kIo, "cannot create '" + cfg.output + "'");
  }
  std::ostream& os = cfg.output.empty() ? std::cout : file;
  switch (io::detect_kind(bytes)) {
    case io::FileKind::kWeights: {
      const auto pwm = io::deserialize_weights(bytes);
      const auto cb = codebook_by_name(cfg.codebook);
      if (cfg.dequantize) {
        const auto W = dequantize<double>(pwm, cb);
        write_grid(os, W.rows(), W.cols(), [&](std::size_t i, std::size_t j) { return W(i, j); });
      } else {
        const auto W = unpack_all(pwm, cb);
        write_grid(os, W.rows(), W.cols(), [&](std::size_t i, std::size_t j) { return W(i, j); });
      }
      break;
    }
    case io::FileKind::kActivations:
    case io::FileKind::kOutputs: {
      const auto A = io::detect_kind(bytes) == io::FileKind::kActivations ? io::deserialize_activations(bytes)
                                                                          : io::deserialize_outputs(bytes);
      write_grid(os, A.rows(), A.cols(), [&](std::size_t i, std::size_t j) { return A(i, j); });
      break;
    }
    case io::FileKind::kUnknown:
      throw Error(ErrorKind::kFormat, "'" + cfg.input + "' is not an MSGW/MSGA/MSGY file");
  }
  return kExitOk;
}

int cmd_activations(const RunConfig& cfg) {
  ColMajorMatrix<float> X;
  if (!cfg.random_dims.empty()) {
    const std::size_t k = cfg.random_dims[0], b = cfg.random_dims[1];
    std::mt19937_64 rng(cfg.seed);
    X = ColMajorMatrix<float>(k, b);
    for (auto& v : X.data()) {
      v = cfg.mode == Mode::kExact ? static_cast<float>(static_cast<int>(rng() % 2001) - 1000)
                                   : std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng);
    }
  } else if (!cfg.csv_path.empty()) {
    const auto grid = io::load_csv_matrix(cfg.csv_path);  // k rows, b columns
    X = ColMajorMatrix<float>(grid.rows(), grid.cols());
    for (std::size_t i = 0; i < grid.rows(); ++i) {
      for (std::size_t j = 0; j < grid.cols(); ++j) X(i, j) = static_cast<float>(grid(i, j));
    }
  } else {
    throw Error(ErrorKind::kInvalidArgument, "give --random K B or --csv FILE");
  }
  io::save_activations(cfg.output, X);
  std::cout << "wrote " << cfg.output << ": k=" << X.rows() << " b=" << X.cols() << '\n';
  return kExitOk;
}

ActivationMatrix<std::int64_t> to_exact(const ColMajorMatrix<float>& X) {
  std::vector<std::int64_t> data;
  data.reserve(X.data().size());
  for (float v : X.data()) {
    if (v != std::trunc(v) || std::abs(v) > 16777216.0f) {
      throw Error(ErrorKind::kInvalidArgument, "exact mode needs integer activations");
    }
    data.push_back(static_cast<std::int64_t>(v));
  }
  return ActivationMatrix<std::int64_t>(X.rows(), X.cols(), std::move(data));
}

void require_integer_scales(const PackedWeightMatrix& pwm) {
  auto check = [](const std::vector<float>& q) {
    for (float v : q) {
      if (v != std::trunc(v)) throw Error(ErrorKind::kInvalidArgument, "exact mode needs integer-valued scales");
    }
  };
  if (const auto* r = std::get_if<PerRowScale>(&pwm.scales())) check(r->q);
  if (const auto* g = std::get_if<PerGroupScale>(&pwm.scales())) check(g->q);
}

template <typename T>
ColMajorMatrix<float> to_f32(const OutputMatrix<T>& Y) {
  ColMajorMatrix<float> out(Y.rows(), Y.cols());
  for (std::size_t i = 0; i < Y.data().size(); ++i) out.data()[i] = static_cast<float>(Y.data()[i]);
  return out;
}

GemmOptions gemm_options(const RunConfig& cfg) {
  GemmOptions opts;
  opts.budget_bytes = cfg.budget;
  opts.workers = std::max(1u, cfg.workers);
  return opts;
}

void print_counts(const OpCount& ops, const PackedWeightMatrix& pwm, std::size_t b, unsigned d) {
  std::cout << "counted:   fma=" << ops.fma << " add=" << ops.add << " mul=" << ops.mul
            << " mem_weights=" << ops.mem_weights << " mem_activations=" << ops.mem_activations << '\n';
  if (pwm.cols() % d != 0 || pwm.rows() == 0) {
    std::cout << "predicted: n/a (d does not divide k)\n";
    return;
  }
  const auto c = cost({pwm.rows(), pwm.cols(), b}, d, pwm.width());
  std::cout << "predicted: fma=" << to_string(c.c_lut) << " add=" << to_string(c.c_y)
            << " mem_weights=" << to_string(c.m_y * b) << " mem_activations=" << to_string(c.m_lut) << '\n';
  if (scale_mode(pwm.scales()) != ScaleMode::kNone) {
    std::cout << "note: scale multiplies are counted in mul and are not part of the prediction\n";
  }
}

int cmd_matmul(const RunConfig& cfg) {
  const auto pwm = io::load_weights(cfg.weights);
  const auto Xf = io::load_activations(cfg.activations);
  const auto cb = codebook_by_name(cfg.codebook);
  const auto opts = gemm_options(cfg);
  ColMajorMatrix<float> Y;
  OpCount ops;
  if (cfg.mode == Mode::kExact) {
    require_integer_scales(pwm);
    const auto out = msgemm_counted<std::int64_t>(pwm, to_exact(Xf), cfg.d, cb, opts);
    Y = to_f32(out.y);
    ops = out.ops;
  } else if (cfg.count) {
    const auto out = msgemm_counted<float>(pwm, Xf, cfg.d, cb, opts);
    Y = out.y;
    ops = out.ops;
  } else {
    Y = msgemm::msgemm<float>(pwm, Xf, cfg.d, cb, opts);
  }
  if (!cfg.output.empty()) {
    io::save_outputs(cfg.output, Y);
    std::cout << "wrote " << cfg.output << ": m=" << Y.rows() << " b=" << Y.cols() << '\n';
  } else {
    write_grid(std::cout, Y.rows(), Y.cols(), [&](std::size_t i, std::size_t j) { return Y(i, j); });
  }
  if (cfg.count) print_counts(ops, pwm, Xf.cols(), cfg.d);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const auto pwm = io::load_weights(cfg.weights);
  const auto Xf = io::load_activations(cfg.activations);
  const auto cb = codebook_by_name(cfg.codebook);
  const auto opts = gemm_options(cfg);
  ErrorStats stats;
  bool pass = false;
  if (cfg.mode == Mode::kExact) {
    require_integer_scales(pwm);
    const auto X = to_exact(Xf);
    const auto y = msgemm::msgemm<std::int64_t>(pwm, X, cfg.d, cb, opts);
    const auto W = dequantize<std::int64_t>(pwm, cb);
    stats = compare_outputs(y, naive_gemm<std::int64_t>(W, X), W, X);
    pass = stats.max_abs == 0.0;
  } else {
    const auto y = msgemm::msgemm<float>(pwm, Xf, cfg.d, cb, opts);
    const auto W = dequantize<float>(pwm, cb);
    stats = compare_outputs(y, naive_gemm<float>(W, Xf), W, Xf);
    pass = stats.max_rel <= kF32RelTolerance;
  }
  std::cout << "m=" << pwm.rows() << " k=" << pwm.cols() << " b=" << Xf.cols() << " d=" << cfg.d
            << " mode=" << (cfg.mode == Mode::kExact ? "exact" : "f32") << '\n'
            << std::setprecision(6) << "max_abs_error=" << stats.max_abs << " max_rel_error=" << stats.max_rel
            << '\n'
            << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitVerifyFailed;
}

int cmd_cost(const RunConfig& cfg) {
  const auto [lo, hi] = parse_range(cfg.d_range);
  const auto result = sweep(shapes_from(cfg), lo, hi);
  std::cout << std::left << std::setw(8) << "preset" << std::right << std::setw(8) << "m" << std::setw(8) << "k"
            << std::setw(5) << "b" << std::setw(4) << "d" << std::setw(24) << "c_total" << std::setw(20) << "c_naive"
            << std::setw(12) << "speedup" << '\n';
  for (const auto& row : result.rows) {
    const auto& r = row.report;
    std::cout << std::left << std::setw(8) << row.name << std::right << std::setw(8) << r.dims.m << std::setw(8)
              << r.dims.k << std::setw(5) << r.dims.b << std::setw(4) << r.d << std::setw(24) << to_string(r.c_total)
              << std::setw(20) << to_string(r.c_naive) << std::setw(12) << std::fixed << std::setprecision(4)
              << r.speedup << std::defaultfloat << '\n';
  }
  for (const auto& s : result.skipped) {
    std::cout << "skipped " << s.name << " d=" << s.d << ": does not divide k=" << s.dims.k << '\n';
  }
  if (!cfg.csv_out.empty()) {
    std::ofstream out(cfg.csv_out);
    if (!out) throw Error(ErrorKind::kIo, "cannot create '" + cfg.csv_out + "'");
    write_sweep_csv(out, result);
  }
  return kExitOk;
}

int cmd_perf(const RunConfig& cfg) {
  const DeviceProfile prof = cfg.profile == "a100" ? a100_profile() : load_profile(cfg.profile);
  const auto shapes = shapes_from(cfg);
  std::cout << "profile " << prof.name << ": fma_rate=" << prof.fma_rate << " lut_add_rate=" << prof.lut_add_rate
            << '\n';
  for (const auto& s : shapes) {
    const auto e = estimate(s.dims, cfg.d, prof);
    std::cout << s.name << " m=" << s.dims.m << " k=" << s.dims.k << " b=" << s.dims.b << " d=" << cfg.d << '\n'
              << std::setprecision(6) << "  t_phase1=" << e.t_phase1 << " s\n"
              << "  t_phase2=" << e.t_phase2 << " s\n"
              << "  t_msgemm=" << e.t_msgemm << " s (serialized), " << e.t_pipelined << " s (pipelined)\n"
              << "  t_naive=" << e.t_naive << " s\n"
              << "  ratio=" << e.ratio << " (serialized) " << e.ratio_pipelined << " (pipelined)\n"
              << "  cost-model speedup=" << e.cost.speedup << '\n';
  }
  return kExitOk;
}

template <typename F>
double median_seconds(std::size_t iters, F&& fn) {
  std::vector<double> t;
  for (std::size_t i = 0; i < iters; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
  return t[t.size() / 2];
}

template <typename T>
void bench_mode(const RunConfig& cfg, const PackedWeightMatrix& pwm, const Codebook& cb, std::mt19937_64& rng) {
  ActivationMatrix<T> X(cfg.k, cfg.b);
  for (auto& v : X.data()) {
    if constexpr (std::is_integral_v<T>) {
      v = static_cast<T>(static_cast<int>(rng() % 2001) - 1000);
    } else {
      v = std::uniform_real_distribution<T>(-1, 1)(rng);
    }
  }
  const auto W = dequantize<T>(pwm, cb);
  const auto opts = gemm_options(cfg);
  volatile T sink{};
  const double t_naive = median_seconds(cfg.iters, [&] { sink = naive_gemm<T>(W, X)(0, 0); });
  const double t_lut = median_seconds(cfg.iters, [&] { sink = msgemm::msgemm<T>(pwm, X, cfg.d, cb, opts)(0, 0); });
  (void)sink;
  std::cout << std::setprecision(6) << "  naive:  " << t_naive * 1e3 << " ms (median of " << cfg.iters << ")\n"
            << "  msgemm: " << t_lut * 1e3 << " ms\n"
            << "  wall-clock ratio naive/msgemm: " << t_naive / t_lut << '\n';
}

int cmd_bench(const RunConfig& cfg) {
  if (cfg.iters == 0) throw Error(ErrorKind::kInvalidArgument, "--iters must be positive");
  if (cfg.m == 0 || cfg.k == 0 || cfg.b == 0) throw Error(ErrorKind::kInvalidArgument, "dimensions must be positive");
  const auto cb = int4_codebook();
  std::mt19937_64 rng(cfg.seed);
  std::vector<Code> codes(cfg.m * cfg.k);
  for (auto& c : codes) c = static_cast<Code>(rng() % 16);
  const auto pwm = pack_codes(codes, cfg.m, cfg.k, 4);
  std::cout << "bench m=" << cfg.m << " k=" << cfg.k << " b=" << cfg.b << " d=" << cfg.d
            << " mode=" << (cfg.mode == Mode::kExact ? "exact" : "f32") << " workers=" << cfg.workers << '\n';
  if (cfg.mode == Mode::kExact) {
    bench_mode<std::int64_t>(cfg, pwm, cb, rng);
  } else {
    bench_mode<float>(cfg, pwm, cb, rng);
  }
  if (cfg.k % cfg.d == 0) {
    std::cout << "  counted-op ratio (naive/msgemm): " << cost({cfg.m, cfg.k, cfg.b}, cfg.d).speedup << '\n';
  }
  std::cout << "  (informational: CPU timings do not model LUT-add hardware)\n";
  return kExitOk;
}

void add_mode_option(CLI::App* app, RunConfig& cfg) {
  app->add_option("--mode", cfg.mode, "Arithmetic: exact (64-bit integer) or f32")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Mode>{{"exact", Mode::kExact}, {"f32", Mode::kF32}},
                                          CLI::ignore_case));
}

void add_gemm_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("weights", cfg.weights, "Weight file (MSGW)")->required()->check(CLI::ExistingFile);
  app->add_option("activations", cfg.activations, "Activation file (MSGA)")->required()->check(CLI::ExistingFile);
  app->add_option("--d", cfg.d, "Table depth")->check(CLI::Range(1u, kMaxTableDepth));
  add_mode_option(app, cfg);
  app->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::Range(1u, 256u));
  app->add_option("--budget", cfg.budget, "Table memory budget in bytes");
  app->add_option("--codebook", cfg.codebook, "int4 or uint4");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msgemm: look-up-table GeMM for low-precision weights"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* pack_cmd = app.add_subcommand("pack", "Pack weights into an MSGW file");
  auto* random_opt = pack_cmd->add_option("--random", cfg.random_dims, "Random M K weights")->expected(2);
  auto* csv_opt = pack_cmd->add_option("--csv", cfg.csv_path, "Weights as CSV (one row per line)");
  random_opt->excludes(csv_opt);
  pack_cmd->add_option("--seed", cfg.seed, "Random seed");
  pack_cmd->add_option("--codebook", cfg.codebook, "int4 or uint4");
  pack_cmd->add_option("--scale-mode", cfg.scale_mode, "none, row or group")
      ->check(CLI::IsMember({"none", "row", "group"}));
  pack_cmd->add_option("--group-size", cfg.group_size, "Columns per scale group");
  pack_cmd->add_option("--scales", cfg.scales_csv, "Scales as CSV (m values, or m x k/r for groups)");
  pack_cmd->add_flag("--quantize", cfg.quantize, "Round CSV weights to the nearest codebook value");
  pack_cmd->add_option("-o,--output", cfg.output, "Output MSGW file")->required();

  auto* unpack_cmd = app.add_subcommand("unpack", "Print an MSGW/MSGA/MSGY file as CSV");
  unpack_cmd->add_option("input", cfg.input, "Input file")->required()->check(CLI::ExistingFile);
  unpack_cmd->add_option("-o,--output", cfg.output, "CSV output (default stdout)");
  unpack_cmd->add_flag("--dequantize", cfg.dequantize, "Apply weight scales");
  unpack_cmd->add_option("--codebook", cfg.codebook, "int4 or uint4");

  auto* act_cmd = app.add_subcommand("activations", "Write an MSGA activation file");
  auto* arandom = act_cmd->add_option("--random", cfg.random_dims, "Random K B activations")->expected(2);
  auto* acsv = act_cmd->add_option("--csv", cfg.csv_path, "Activations as CSV, K rows of B values");
  arandom->excludes(acsv);
  act_cmd->add_option("--seed", cfg.seed, "Random seed");
  add_mode_option(act_cmd, cfg);
  act_cmd->add_option("-o,--output", cfg.output, "Output MSGA file")->required();

  auto* matmul_cmd = app.add_subcommand("matmul", "Run the look-up-table GeMM");
  add_gemm_options(matmul_cmd, cfg);
  matmul_cmd->add_option("-o,--output", cfg.output, "Output MSGY file (default: CSV on stdout)");
  matmul_cmd->add_flag("--count", cfg.count, "Print operation counts next to the closed-form predictions");

  auto* verify_cmd = app.add_subcommand("verify", "Compare against the naive GeMM");
  add_gemm_options(verify_cmd, cfg);

  auto* cost_cmd = app.add_subcommand("cost", "Closed-form cost and speedup sweep");
  cost_cmd->add_option("--preset", cfg.presets, "mlp1 and/or mlp2")->take_all();
  cost_cmd->add_option("--m", cfg.m, "Rows of the weight matrix");
  cost_cmd->add_option("--k", cfg.k, "Inner dimension");
  cost_cmd->add_option("--b", cfg.b, "Batch size");
  cost_cmd->add_option("--d-range", cfg.d_range, "Depth range A..B");
  cost_cmd->add_option("--csv", cfg.csv_out, "Write the sweep as CSV");

  auto* perf_cmd = app.add_subcommand("perf", "Device runtime estimate");
  perf_cmd->add_option("--profile", cfg.profile, "a100 or a key=value profile file");
  perf_cmd->add_option("--preset", cfg.presets, "mlp1 and/or mlp2")->take_all();
  perf_cmd->add_option("--m", cfg.m, "Rows of the weight matrix");
  perf_cmd->add_option("--k", cfg.k, "Inner dimension");
  perf_cmd->add_option("--b", cfg.b, "Batch size");
  perf_cmd->add_option("--d", cfg.d, "Table depth");

  auto* bench_cmd = app.add_subcommand("bench", "Wall-clock timing of naive vs look-up-table GeMM");
  bench_cmd->add_option("--m", cfg.m, "Rows")->required();
  bench_cmd->add_option("--k", cfg.k, "Inner dimension")->required();
  bench_cmd->add_option("--b", cfg.b, "Batch size");
  bench_cmd->add_option("--d", cfg.d, "Table depth")->check(CLI::Range(1u, kMaxTableDepth));
  bench_cmd->add_option("--iters", cfg.iters, "Timed iterations");
  bench_cmd->add_option("--seed", cfg.seed, "Random seed");
  bench_cmd->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::Range(1u, 256u));
  add_mode_option(bench_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*pack_cmd) return cmd_pack(cfg);
    if (*unpack_cmd) return cmd_unpack(cfg);
    if (*act_cmd) return cmd_activations(cfg);
    if (*matmul_cmd) return cmd_matmul(cfg);
    if (*verify_cmd) return cmd_verify(cfg);
    if (*cost_cmd) return cmd_cost(cfg);
    if (*perf_cmd) return cmd_perf(cfg);
    if (*bench_cmd) return cmd_bench(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
