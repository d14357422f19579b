// Copyright 2026 The DFE Offload Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the library through the C interface only.
//
// Exit codes: 0 success, 1 parse or usage error, 2 unroutable or over
// capacity, 3 simulated result differs from software, 4 kernel not eligible,
// 5 other library error.

#include "dfe/dfe.h"

#include <CLI11.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

constexpr int kExitParse = 1;
constexpr int kExitUnroutable = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitNotEligible = 4;
constexpr int kExitLibrary = 5;

/// A library failure already reported on stderr; carries the exit code.
struct Failure {
  int exit_code;
};

template <typename T, void (*Free)(T *)> struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using KernelPtr = std::unique_ptr<dfe_kernel, Deleter<dfe_kernel, dfe_kernel_free>>;
using DfgPtr = std::unique_ptr<dfe_dfg, Deleter<dfe_dfg, dfe_dfg_free>>;
using ConfigPtr = std::unique_ptr<dfe_config, Deleter<dfe_config, dfe_config_free>>;
using PlacementPtr = std::unique_ptr<dfe_placement, Deleter<dfe_placement, dfe_placement_free>>;
using ArraysPtr = std::unique_ptr<dfe_arrays, Deleter<dfe_arrays, dfe_arrays_free>>;
using RuntimePtr = std::unique_ptr<dfe_runtime, Deleter<dfe_runtime, dfe_runtime_free>>;

std::string take(char *s) {
  std::string out = s ? s : "";
  dfe_string_free(s);
  return out;
}

std::vector<std::uint8_t> take(uint8_t *buf, size_t length) {
  std::vector<std::uint8_t> out(buf, buf + length);
  dfe_buffer_free(buf);
  return out;
}

[[noreturn]] void fail(dfe_status st, const std::string &context) {
  std::cerr << "error: " << context << ": " << dfe_status_name(st);
  if (const char *m = dfe_last_error_message(); m && *m)
    std::cerr << ": " << m;
  std::cerr << "\n";
  switch (st) {
  case DFE_ERR_SYNTAX:
  case DFE_ERR_UNKNOWN_IDENTIFIER:
  case DFE_ERR_IO:
  case DFE_ERR_FORMAT:
    throw Failure{kExitParse};
  case DFE_ERR_UNROUTABLE:
  case DFE_ERR_PRECONDITION_VIOLATED:
    throw Failure{kExitUnroutable};
  case DFE_ERR_NOT_ELIGIBLE:
    throw Failure{kExitNotEligible};
  default:
    throw Failure{kExitLibrary};
  }
}

void check(dfe_status st, const std::string &context) {
  if (st != DFE_OK)
    fail(st, context);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    throw Failure{kExitParse};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const void *data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{kExitLibrary};
  }
}

KernelPtr load_kernel(const std::string &path) {
  const std::string src = read_file(path);
  dfe_kernel *k = nullptr;
  const dfe_status st = dfe_kernel_parse(src.data(), src.size(), &k);
  if (st != DFE_OK) {
    // Source errors carry their "line:col: " prefix in the message.
    std::cerr << path << (dfe_last_error_line() > 0 ? ":" : ": error: ")
              << dfe_last_error_message() << "\n";
    throw Failure{kExitParse};
  }
  return KernelPtr(k);
}

std::string stem(const std::string &path) { return std::filesystem::path(path).stem().string(); }

struct Shape {
  int rows = 24;
  int cols = 18;
};

Shape parse_shape(const std::string &text) {
  Shape s;
  char x = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &s.rows, &x, &s.cols, &extra) != 3 ||
      (x != 'x' && x != 'X') || s.rows < 1 || s.cols < 1)
    throw CLI::ValidationError("--overlay", "expected RxC with R, C >= 1, got '" + text + "'");
  return s;
}

/// Parameter values: explicit -D bindings, every other kernel parameter set
/// to `size`.
struct Params {
  std::vector<std::string> names;
  std::vector<int64_t> values;
  std::vector<const char *> name_ptrs;
  dfe_params c{};

  Params(const dfe_kernel *k, const std::vector<std::string> &defs, int64_t size) {
    std::map<std::string, int64_t> explicit_values;
    for (const auto &d : defs) {
      const auto eq = d.find('=');
      if (eq == std::string::npos || eq == 0)
        throw CLI::ValidationError("-D", "expected NAME=VALUE, got '" + d + "'");
      explicit_values[d.substr(0, eq)] = std::stoll(d.substr(eq + 1));
    }
    for (size_t i = 0; i < dfe_kernel_param_count(k); ++i) {
      const std::string n = dfe_kernel_param_name(k, i);
      auto it = explicit_values.find(n);
      names.push_back(n);
      values.push_back(it == explicit_values.end() ? size : it->second);
    }
    for (const auto &n : names)
      name_ptrs.push_back(n.c_str());
    c = dfe_params{name_ptrs.data(), values.data(), names.size()};
  }
  Params(const Params &) = delete;
  Params &operator=(const Params &) = delete;
};

struct Common {
  std::string overlay = "24x18";
  uint64_t seed = 1;
  int64_t unroll = 1;
  size_t min_nodes = 8;
  std::string format = "text";
  std::string cost_model;
  std::vector<std::string> defines;
  int64_t size = 8;
};

void add_overlay(CLI::App *cmd, Common &c) {
  cmd->add_option("--overlay", c.overlay, "Overlay size RxC")->capture_default_str();
}
void add_seed(CLI::App *cmd, Common &c) {
  cmd->add_option("--seed", c.seed, "Placer seed")->capture_default_str();
}
void add_unroll(CLI::App *cmd, Common &c) {
  cmd->add_option("--unroll", c.unroll, "Innermost unroll factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}
void add_params(CLI::App *cmd, Common &c) {
  cmd->add_option("-D,--define", c.defines, "Parameter binding NAME=VALUE");
  cmd->add_option("--size", c.size, "Value of every parameter not bound with -D")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

// ---- analyze

int cmd_analyze(const std::vector<std::string> &files, const Common &c, bool timing) {
  const Shape shape = parse_shape(c.overlay);
  dfe_thresholds t{c.min_nodes, static_cast<size_t>(shape.rows) * static_cast<size_t>(shape.cols)};
  for (const auto &f : files) {
    KernelPtr k = load_kernel(f);
    dfe_eligibility e{};
    const auto t0 = std::chrono::steady_clock::now();
    check(dfe_check_eligibility(k.get(), &t, &e, nullptr), f);
    const double us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    std::string line = take([&] {
      char *n = nullptr;
      check(dfe_kernel_name(k.get(), &n), f);
      return n;
    }());
    line.resize(std::max<std::size_t>(line.size() + 2, 12), ' ');
    line += dfe_reason_label(e.reason);
    if (e.has_stats) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  in=%zu out=%zu calc=%zu", e.stats.inputs, e.stats.outputs,
                    e.stats.calc_nodes);
      line += buf;
    }
    if (timing) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "  time=%.1fus", us);
      line += buf;
    }
    std::cout << line << "\n";
  }
  return 0;
}

// ---- place

struct Mapped {
  KernelPtr kernel;
  DfgPtr graph;
  PlacementPtr placement;
  dfe_attempts attempts{};
  dfe_status status = DFE_OK;
};

/// Parse, structural check, extraction, parameter folding and placement.
Mapped map_kernel(const std::string &file, const Common &c, const Shape &shape, uint64_t seed,
                  const Params *params, KernelPtr kernel = nullptr) {
  Mapped m;
  m.kernel = kernel ? std::move(kernel) : load_kernel(file);
  dfe_thresholds t{0, 0};
  dfe_eligibility e{};
  char *detail = nullptr;
  check(dfe_check_eligibility(m.kernel.get(), &t, &e, &detail), file);
  const std::string why = take(detail);
  if (!e.accepted) {
    std::cerr << file << ": not eligible: " << dfe_reason_label(e.reason);
    if (!why.empty())
      std::cerr << " (" << why << ")";
    std::cerr << "\n";
    throw Failure{kExitNotEligible};
  }
  dfe_dfg *g = nullptr;
  check(dfe_extract_dfg(m.kernel.get(), c.unroll, 0, &g), file);
  m.graph.reset(g);
  if (params)
    check(dfe_dfg_fold_params(m.graph.get(), &params->c), file);
  dfe_placer_params pp;
  dfe_placer_params_default(&pp);
  dfe_placement *p = nullptr;
  m.status = dfe_place(m.graph.get(), shape.rows, shape.cols, &pp, seed, &p, &m.attempts);
  if (m.status != DFE_OK && m.status != DFE_ERR_UNROUTABLE &&
      m.status != DFE_ERR_PRECONDITION_VIOLATED)
    fail(m.status, file);
  m.placement.reset(p);
  return m;
}

std::string attempts_line(const dfe_attempts &a) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "attempts iterations=%" PRIu64 " position_retries=%" PRIu64
                " node_restarts=%" PRIu64 " global_backtracks=%" PRIu64,
                a.iterations, a.position_retries, a.node_restarts, a.global_backtracks);
  return buf;
}

int cmd_place(const std::string &file, const Common &c, std::string out_path,
              std::string dot_path, const std::string &sidecar_path) {
  const Shape shape = parse_shape(c.overlay);
  KernelPtr k = load_kernel(file);
  std::optional<Params> params;
  if (!c.defines.empty())
    params.emplace(k.get(), c.defines, c.size);
  Mapped m = map_kernel(file, c, shape, c.seed, params ? &*params : nullptr, std::move(k));
  if (m.status != DFE_OK) {
    std::cerr << file << ": " << (m.status == DFE_ERR_UNROUTABLE ? "unroutable" : "over capacity")
              << " on " << shape.rows << "x" << shape.cols << ": " << dfe_last_error_message()
              << "\n"
              << attempts_line(m.attempts) << "\n";
    return kExitUnroutable;
  }
  dfe_config *cfg_raw = nullptr;
  check(dfe_placement_config(m.placement.get(), &cfg_raw), file);
  ConfigPtr cfg(cfg_raw);

  if (out_path.empty())
    out_path = stem(file) + ".dfecfg";
  if (dot_path.empty())
    dot_path = stem(file) + ".dot";
  uint8_t *buf = nullptr;
  size_t len = 0;
  check(dfe_config_serialize(cfg.get(), &buf, &len), "serialize");
  const auto bytes = take(buf, len);
  write_file(out_path, bytes.data(), bytes.size());
  char *dot = nullptr;
  check(dfe_config_to_dot(cfg.get(), &dot), "render");
  const std::string dot_text = take(dot);
  write_file(dot_path, dot_text.data(), dot_text.size());
  if (!sidecar_path.empty()) {
    char *side = nullptr;
    check(dfe_placement_sidecar(m.placement.get(), &side), "sidecar");
    const std::string s = take(side);
    write_file(sidecar_path, s.data(), s.size());
  }

  if (c.format == "dot") {
    std::cout << dot_text;
    std::cerr << attempts_line(m.attempts) << "\n";
  } else {
    char *text = nullptr;
    check(dfe_config_to_text(cfg.get(), &text), "render");
    std::cout << take(text) << attempts_line(m.attempts) << "\n";
  }
  return 0;
}

// ---- run

void print_frames(const std::vector<std::uint8_t> &bytes, const char *label) {
  for (std::size_t at = 0; at + 16 <= bytes.size(); at += 16) {
    uint32_t tag = 0;
    uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      tag |= static_cast<uint32_t>(bytes[at + static_cast<std::size_t>(i)]) << (8 * i);
      value |= static_cast<uint32_t>(bytes[at + 4 + static_cast<std::size_t>(i)]) << (8 * i);
    }
    std::printf("%s tag=0x%08" PRIx32 " value=%" PRId32 "\n", label, tag,
                static_cast<int32_t>(value));
  }
}

dfe_runtime_config runtime_config(const Common &c, const Shape &shape) {
  dfe_runtime_config rc;
  dfe_runtime_config_default(&rc);
  rc.rows = shape.rows;
  rc.cols = shape.cols;
  rc.unroll = c.unroll;
  rc.seed = c.seed;
  rc.min_calc_nodes = 0;
  rc.max_calc_nodes = static_cast<size_t>(shape.rows) * static_cast<size_t>(shape.cols);
  if (!c.cost_model.empty()) {
    const std::string text = read_file(c.cost_model);
    check(dfe_runtime_config_load(&rc, text.data(), text.size()), c.cost_model);
  }
  check(dfe_runtime_config_env(&rc), "environment");
  return rc;
}

int cmd_run(const std::string &file, const Common &c, uint64_t data_seed, int32_t lo, int32_t hi,
            int calls, bool show_trace, const std::string &frames_path) {
  const Shape shape = parse_shape(c.overlay);
  KernelPtr k = load_kernel(file);
  const Params params(k.get(), c.defines, c.size);
  dfe_runtime_config rc = runtime_config(c, shape);
  rc.mode = DFE_MODE_EAGER;
  dfe_runtime *rt_raw = nullptr;
  check(dfe_runtime_create(&rc, &rt_raw), "runtime");
  RuntimePtr rt(rt_raw);

  dfe_arrays *a_raw = nullptr;
  check(dfe_arrays_allocate(k.get(), &params.c, &a_raw), "allocate");
  ArraysPtr arrays(a_raw);
  check(dfe_arrays_fill_random(arrays.get(), data_seed, lo, hi), "fill");

  bool all_pass = true;
  for (int call = 0; call < calls; ++call) {
    dfe_arrays *ref_raw = nullptr;
    check(dfe_arrays_clone(arrays.get(), &ref_raw), "clone");
    ArraysPtr reference(ref_raw);

    if (call == 0 && (c.format == "frames" || !frames_path.empty())) {
      Mapped m = map_kernel(file, c, shape, c.seed, &params);
      if (m.status == DFE_OK) {
        uint8_t *buf = nullptr;
        size_t len = 0;
        check(dfe_input_frames(m.placement.get(), arrays.get(), &params.c, &buf, &len), "frames");
        const auto bytes = take(buf, len);
        if (!frames_path.empty())
          write_file(frames_path, bytes.data(), bytes.size());
        if (c.format == "frames")
          print_frames(bytes, "in");
      }
    }

    check(dfe_software_run(k.get(), reference.get(), &params.c), "software");
    dfe_exec_result res{};
    char *trace = nullptr;
    check(dfe_runtime_execute(rt.get(), k.get(), arrays.get(), &params.c, &res, &trace), file);
    const std::string trace_text = take(trace);
    const bool pass = dfe_arrays_equal(arrays.get(), reference.get()) != 0;
    all_pass = all_pass && pass;

    std::printf("call %d path=%s", call, dfe_exec_path_name(res.path));
    if (res.path == DFE_PATH_REJECTED)
      std::printf(" reason=%s", dfe_reason_name(res.reason));
    if (res.has_run)
      std::printf(" frames_in=%" PRIu64 " frames_out=%" PRIu64 " bytes=%" PRIu64
                  " cycles=%" PRIu64,
                  res.run.frames_in, res.run.frames_out, res.run.bytes_on_wire, res.run.cycles);
    std::printf(" cache_hit=%d modeled_offload_s=%.6e\n", res.cache_hit,
                res.modeled_offload_time);
    if (show_trace)
      std::fputs(trace_text.c_str(), stdout);
    std::printf("%s\n", pass ? "PASS" : "FAIL");
  }
  return all_pass ? 0 : kExitMismatch;
}

// ---- bench

int cmd_bench(const std::string &file, const Common &c, int min_size, int max_size, int seeds) {
  if (min_size < 1 || max_size < min_size)
    throw CLI::ValidationError("--min-size/--max-size", "empty size range");
  KernelPtr k = load_kernel(file);
  const Params params(k.get(), c.defines, c.size);
  Shape dummy;
  dummy.rows = dummy.cols = max_size;
  const dfe_runtime_config rc = runtime_config(c, dummy);
  std::printf("kernel,rows,cols,seeds,successes,success_rate,mean_iterations,"
              "mean_backtracks,calc_nodes,inputs,outputs,stream_length,"
              "est_transfer_cached_s,est_transfer_uncached_s\n");
  const std::string name = stem(file);
  for (int s = min_size; s <= max_size; ++s) {
    const Shape shape{s, s};
    int ok = 0;
    double iterations = 0;
    double backtracks = 0;
    dfe_stats stats{};
    uint64_t steady = 0;
    for (int seed = 1; seed <= seeds; ++seed) {
      KernelPtr kk = load_kernel(file);
      Mapped m = map_kernel(file, c, shape, static_cast<uint64_t>(seed), &params, std::move(kk));
      ok += m.status == DFE_OK;
      iterations += static_cast<double>(m.attempts.iterations);
      backtracks += static_cast<double>(m.attempts.global_backtracks);
      if (seed == 1) {
        check(dfe_dfg_stats(m.graph.get(), &stats), "stats");
        int64_t rem = 0;
        check(dfe_dfg_iterations(m.graph.get(), &params.c, &steady, &rem), "iterations");
      }
    }
    std::printf("%s,%d,%d,%d,%d,%.4f,%.1f,%.2f,%zu,%zu,%zu,%" PRIu64 ",%.6e,%.6e\n", name.c_str(),
                s, s, seeds, ok, seeds ? static_cast<double>(ok) / seeds : 0.0,
                seeds ? iterations / seeds : 0.0, seeds ? backtracks / seeds : 0.0,
                stats.calc_nodes, stats.inputs, stats.outputs, steady,
                dfe_estimate_offload_time(&stats, steady, &rc, 1),
                dfe_estimate_offload_time(&stats, steady, &rc, 0));
  }
  return 0;
}

// ---- render / replay

ConfigPtr load_config(const std::string &path) {
  const std::string bytes = read_file(path);
  dfe_config *cfg = nullptr;
  check(dfe_config_deserialize(reinterpret_cast<const uint8_t *>(bytes.data()), bytes.size(), &cfg),
        path);
  return ConfigPtr(cfg);
}

int cmd_render(const std::string &path, const Common &c) {
  ConfigPtr cfg = load_config(path);
  size_t violations = 0;
  char *report = nullptr;
  check(dfe_config_validate(cfg.get(), &violations, &report), path);
  const std::string rep = take(report);
  char *out = nullptr;
  if (c.format == "dot")
    check(dfe_config_to_dot(cfg.get(), &out), path);
  else
    check(dfe_config_to_text(cfg.get(), &out), path);
  std::cout << take(out);
  if (violations) {
    std::cerr << rep;
    return kExitLibrary;
  }
  return 0;
}

int cmd_replay(const std::string &config_path, const std::string &frames_path,
               const std::string &out_path) {
  ConfigPtr cfg = load_config(config_path);
  const std::string bytes = read_file(frames_path);
  uint8_t *out = nullptr;
  size_t len = 0;
  dfe_run_report rep{};
  check(dfe_run_frames(cfg.get(), reinterpret_cast<const uint8_t *>(bytes.data()), bytes.size(),
                       &out, &len, &rep),
        frames_path);
  const auto frames = take(out, len);
  if (!out_path.empty())
    write_file(out_path, frames.data(), frames.size());
  else
    print_frames(frames, "out");
  std::printf("frames_in=%" PRIu64 " frames_out=%" PRIu64 " bytes=%" PRIu64 " cycles=%" PRIu64
              "\n",
              rep.frames_in, rep.frames_out, rep.bytes_on_wire, rep.cycles);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Dataflow-engine overlay offload toolkit"};
  app.require_subcommand(1);
  Common c;

  auto *analyze = app.add_subcommand("analyze", "Classify kernels for offloading");
  std::vector<std::string> analyze_files;
  bool no_timing = false;
  analyze->add_option("files", analyze_files, "Kernel files")->required()->check(CLI::ExistingFile);
  analyze->add_option("--min-nodes", c.min_nodes, "Minimum calculation nodes")->capture_default_str();
  analyze->add_flag("--no-timing", no_timing, "Omit the analysis time");
  add_overlay(analyze, c);

  auto *place = app.add_subcommand("place", "Place and route a kernel");
  std::string place_file, out_path, dot_path, sidecar_path;
  place->add_option("file", place_file, "Kernel file")->required()->check(CLI::ExistingFile);
  place->add_option("-o,--output", out_path, "Binary configuration (default <kernel>.dfecfg)");
  place->add_option("--dot", dot_path, "DOT rendering (default <kernel>.dot)");
  place->add_option("--sidecar", sidecar_path, "Placement details");
  place->add_option("--format", c.format, "Stdout rendering")
      ->check(CLI::IsMember({"text", "dot"}))
      ->capture_default_str();
  add_overlay(place, c);
  add_seed(place, c);
  add_unroll(place, c);
  add_params(place, c);

  auto *runc = app.add_subcommand("run", "Offload a kernel and check it against software");
  std::string run_file, frames_path;
  uint64_t data_seed = 7;
  int32_t lo = -100, hi = 100;
  int calls = 1;
  bool show_trace = false;
  runc->add_option("file", run_file, "Kernel file")->required()->check(CLI::ExistingFile);
  runc->add_option("--data-seed", data_seed, "Seed for the random input data")->capture_default_str();
  runc->add_option("--min-value", lo, "Smallest random value")->capture_default_str();
  runc->add_option("--max-value", hi, "Largest random value")->capture_default_str();
  runc->add_option("--calls", calls, "Invocations")->check(CLI::PositiveNumber)->capture_default_str();
  runc->add_flag("--trace", show_trace, "Print the phase trace");
  runc->add_option("--frames-out", frames_path, "Write the input wire capture");
  runc->add_option("--format", c.format, "text, or frames to list the input capture")
      ->check(CLI::IsMember({"text", "frames"}))
      ->capture_default_str();
  runc->add_option("--cost-model", c.cost_model, "key=value cost model file")
      ->check(CLI::ExistingFile);
  add_overlay(runc, c);
  add_seed(runc, c);
  add_unroll(runc, c);
  add_params(runc, c);

  auto *bench = app.add_subcommand("bench", "Placement success over square overlays (CSV)");
  std::string bench_file;
  int min_size = 2, max_size = 9, seeds = 20;
  bench->add_option("file", bench_file, "Kernel file")->required()->check(CLI::ExistingFile);
  bench->add_option("--min-size", min_size, "Smallest overlay side")->capture_default_str();
  bench->add_option("--max-size", max_size, "Largest overlay side")->capture_default_str();
  bench->add_option("--seeds", seeds, "Seeds 1..N per size")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bench->add_option("--cost-model", c.cost_model, "key=value cost model file")
      ->check(CLI::ExistingFile);
  add_unroll(bench, c);
  add_params(bench, c);

  auto *render = app.add_subcommand("render", "Print a binary configuration");
  std::string render_file;
  render->add_option("config", render_file, "Configuration file")->required()->check(CLI::ExistingFile);
  render->add_option("--format", c.format, "text or dot")
      ->check(CLI::IsMember({"text", "dot"}))
      ->capture_default_str();

  auto *replay = app.add_subcommand("replay", "Run a wire capture through a configuration");
  std::string replay_cfg, replay_frames, replay_out;
  replay->add_option("config", replay_cfg, "Configuration file")->required()->check(CLI::ExistingFile);
  replay->add_option("frames", replay_frames, "Input capture")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--output", replay_out, "Write the output capture instead of listing it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    if (*analyze)
      return cmd_analyze(analyze_files, c, !no_timing);
    if (*place)
      return cmd_place(place_file, c, out_path, dot_path, sidecar_path);
    if (*runc)
      return cmd_run(run_file, c, data_seed, lo, hi, calls, show_trace, frames_path);
    if (*bench)
      return cmd_bench(bench_file, c, min_size, max_size, seeds);
    if (*render)
      return cmd_render(render_file, c);
    if (*replay)
      return cmd_replay(replay_cfg, replay_frames, replay_out);
  } catch (const Failure &f) {
    return f.exit_code;
  } catch (const CLI::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLibrary;
  }
  return 0;
}
