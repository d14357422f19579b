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

// Offload decision layer: configuration cache, transfer-cost model, the
// offload/software decision with measured rollback, and the end-to-end
// kernel executor.

#pragma once

#include "dfe/arrays.hpp"
#include "dfe/dfg.hpp"
#include "dfe/frontend.hpp"
#include "dfe/kernel.hpp"
#include "dfe/overlay.hpp"
#include "dfe/placer.hpp"
#include "dfe/simulator.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dfe {

struct CostModel {
  double wire_rate = 230e6;          // bytes/s on the link
  double frame_overhead_factor = 4;  // 128-bit frame per 32-bit word
  double config_time = 2.1e-3;       // s to load a configuration
  double const_transfer_time = 55e-6; // s to preload constants
  /// Fixed software time per call; 0 means "measure it".
  double software_time_per_call = 0;

  /// Bytes on the wire per transferred word.
  double bytes_per_word() const { return 4.0 * frame_overhead_factor; }
  /// Throws Error(InvalidArgument) unless every field is in range.
  void check() const;
};

struct DecisionPolicy {
  double margin = 0.9;
  double ema_alpha = 0.2;
  int warmup_calls = 5;
};

/// key=value lines (`#` comments). Keys: wire_rate, frame_overhead_factor,
/// config_time, const_transfer_time, software_time_per_call, margin,
/// ema_alpha, warmup_calls. Throws Error(Format / InvalidArgument).
void load_cost_config(std::string_view text, CostModel &model, DecisionPolicy &policy);
/// Applies DFE_<KEY> environment variables (e.g. DFE_WIRE_RATE).
void apply_env_overrides(CostModel &model, DecisionPolicy &policy);

/// (cached ? 0 : config) + constants + 16 * n * (in + out) / wire_rate.
double estimate_offload_time(const DfgStats &stats, std::uint64_t n_iterations,
                             const CostModel &model, bool cached);

enum class Mode { Software, Offloaded, RolledBack };
const char *mode_name(Mode m);

struct Ema {
  double value = 0;
  std::uint64_t samples = 0;

  void add(double x, double alpha) {
    value = samples == 0 ? x : alpha * x + (1 - alpha) * value;
    ++samples;
  }
};

struct OffloadState {
  Mode mode = Mode::Software;
  Ema software;
  Ema offloaded;
  std::uint64_t calls = 0;
};

enum class Decision { Software, Offload };

/// Offload iff estimate < margin * measured_software and not rolled back.
Decision decide(const OffloadState &state, double estimate,
                double measured_software, const DecisionPolicy &policy);

/// Folds one measured call into the state; moves to RolledBack once the
/// offloaded average exceeds the software one after the warm-up.
OffloadState record(OffloadState state, Mode mode, double elapsed,
                    const DecisionPolicy &policy);

struct CacheEntry {
  std::uint64_t key = 0;
  OverlayConfig config;
  std::shared_ptr<const Placement> placement;
  std::uint64_t hit_count = 0;
  double mean_offload_time = 0;
};

/// LRU map from graph digest to configuration. Lookups take a shared lock;
/// insertion and eviction take it exclusively.
class ConfigCache {
public:
  explicit ConfigCache(std::size_t capacity = 16);

  std::optional<CacheEntry> get(std::uint64_t key) const;
  void put(CacheEntry entry);
  void note_offload_time(std::uint64_t key, double seconds);
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

private:
  struct Slot {
    CacheEntry entry;
    mutable std::atomic<std::uint64_t> last_used{0};
    mutable std::atomic<std::uint64_t> hits{0};
    std::uint64_t timed_calls = 0;
  };

  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  mutable std::atomic<std::uint64_t> clock_{0};
  std::unordered_map<std::uint64_t, std::unique_ptr<Slot>> slots_;
};

enum class OffloadMode {
  Adaptive,     // profile in software first, then follow decide()
  Eager,        // offload whenever eligible and not rolled back
  SoftwareOnly,
};

struct RuntimeConfig {
  OverlayShape shape{9, 9};
  Thresholds thresholds = Thresholds::for_overlay(9, 9);
  std::int64_t unroll = 1;
  PlacerParams placer;
  std::uint64_t seed = 1;
  CostModel cost;
  DecisionPolicy policy;
  std::size_t cache_capacity = 16;
  OffloadMode mode = OffloadMode::Adaptive;
};

struct TraceEvent {
  double t_us = 0;
  std::string phase;
  std::string detail;
};

/// `<t_us> <phase> <detail>` lines.
std::string format_trace(const std::vector<TraceEvent> &trace);

enum class ExecPath { Offloaded, Software, Rejected, Unroutable, RolledBack };
const char *exec_path_name(ExecPath p);

struct ExecutionResult {
  ExecPath path = ExecPath::Software;
  EligibilityReport eligibility;
  bool cache_hit = false;
  std::optional<RunReport> run;
  double modeled_offload_time = 0;
  double software_time = 0;
  std::optional<std::uint64_t> dfg_hash;
  std::vector<TraceEvent> trace;
};

/// Runs kernels, offloading them to the simulated overlay when worthwhile.
/// Arrays always end up as the software path would leave them.
class Runtime {
public:
  explicit Runtime(RuntimeConfig cfg);

  ExecutionResult execute(const Kernel &k, ArrayStore &arrays, const Env &params);

  const RuntimeConfig &config() const { return cfg_; }
  const ConfigCache &cache() const { return cache_; }
  OffloadState state(std::uint64_t dfg_hash) const;
  void reset(std::uint64_t dfg_hash);
  void reset_all();

private:
  void note(ExecutionResult &res, double &clock_us, std::string phase,
            std::string detail, double duration_s);

  RuntimeConfig cfg_;
  ConfigCache cache_;
  mutable std::mutex state_mutex_;
  std::unordered_map<std::uint64_t, OffloadState> states_;
};

} // namespace dfe
