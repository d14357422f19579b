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

#include "dfe/runtime.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace dfe {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0; }

void check_policy(const DecisionPolicy &p) {
  if (!positive(p.margin))
    throw Error(ErrorCode::InvalidArgument, "margin must be positive");
  if (!(p.ema_alpha > 0 && p.ema_alpha <= 1))
    throw Error(ErrorCode::InvalidArgument, "ema_alpha must be in (0, 1]");
  if (p.warmup_calls < 0)
    throw Error(ErrorCode::InvalidArgument, "warmup_calls must be non-negative");
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string &key, const std::string &text) {
  char *end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw Error(ErrorCode::Format, "bad value for " + key + ": '" + text + "'");
  return v;
}

/// Stores `value` into the field named `key`; false if there is none.
bool assign(const std::string &key, double value, CostModel &m, DecisionPolicy &p) {
  if (key == "wire_rate") m.wire_rate = value;
  else if (key == "frame_overhead_factor") m.frame_overhead_factor = value;
  else if (key == "config_time") m.config_time = value;
  else if (key == "const_transfer_time") m.const_transfer_time = value;
  else if (key == "software_time_per_call") m.software_time_per_call = value;
  else if (key == "margin") p.margin = value;
  else if (key == "ema_alpha") p.ema_alpha = value;
  else if (key == "warmup_calls") {
    if (value != std::floor(value))
      throw Error(ErrorCode::Format, "warmup_calls must be an integer");
    p.warmup_calls = static_cast<int>(value);
  } else
    return false;
  return true;
}

constexpr const char *kKeys[] = {"wire_rate",      "frame_overhead_factor",
                                 "config_time",    "const_transfer_time",
                                 "software_time_per_call", "margin",
                                 "ema_alpha",      "warmup_calls"};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void CostModel::check() const {
  if (!positive(wire_rate))
    throw Error(ErrorCode::InvalidArgument, "wire_rate must be positive");
  if (frame_overhead_factor != 4)
    throw Error(ErrorCode::InvalidArgument, "frame_overhead_factor is fixed at 4");
  if (!positive(config_time))
    throw Error(ErrorCode::InvalidArgument, "config_time must be positive");
  if (!positive(const_transfer_time))
    throw Error(ErrorCode::InvalidArgument, "const_transfer_time must be positive");
  if (!(std::isfinite(software_time_per_call) && software_time_per_call >= 0))
    throw Error(ErrorCode::InvalidArgument, "software_time_per_call must be >= 0");
}

void load_cost_config(std::string_view text, CostModel &model, DecisionPolicy &policy) {
  CostModel m = model;
  DecisionPolicy p = policy;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!assign(key, parse_number(key, value), m, p))
      throw Error(ErrorCode::Format,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  m.check();
  check_policy(p);
  model = m;
  policy = p;
}

void apply_env_overrides(CostModel &model, DecisionPolicy &policy) {
  CostModel m = model;
  DecisionPolicy p = policy;
  for (const char *key : kKeys) {
    std::string var = "DFE_";
    for (const char *c = key; *c; ++c)
      var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    if (const char *v = std::getenv(var.c_str()))
      assign(key, parse_number(var, trim(v)), m, p);
  }
  m.check();
  check_policy(p);
  model = m;
  policy = p;
}

double estimate_offload_time(const DfgStats &stats, std::uint64_t n_iterations,
                             const CostModel &model, bool cached) {
  const double words = static_cast<double>(n_iterations) *
                       static_cast<double>(stats.inputs + stats.outputs);
  return (cached ? 0.0 : model.config_time) + model.const_transfer_time +
         model.bytes_per_word() * words / model.wire_rate;
}

const char *mode_name(Mode m) {
  switch (m) {
  case Mode::Software: return "Software";
  case Mode::Offloaded: return "Offloaded";
  case Mode::RolledBack: return "RolledBack";
  }
  return "Unknown";
}

Decision decide(const OffloadState &state, double estimate, double measured_software,
                const DecisionPolicy &policy) {
  if (state.mode == Mode::RolledBack)
    return Decision::Software;
  return estimate < policy.margin * measured_software ? Decision::Offload : Decision::Software;
}

OffloadState record(OffloadState state, Mode mode, double elapsed,
                    const DecisionPolicy &policy) {
  ++state.calls;
  if (mode == Mode::Offloaded) {
    state.offloaded.add(elapsed, policy.ema_alpha);
    if (state.mode != Mode::RolledBack)
      state.mode = Mode::Offloaded;
  } else {
    state.software.add(elapsed, policy.ema_alpha);
  }
  if (state.mode == Mode::Offloaded &&
      state.offloaded.samples >= static_cast<std::uint64_t>(policy.warmup_calls) &&
      state.software.samples > 0 && state.offloaded.value > state.software.value)
    state.mode = Mode::RolledBack;
  return state;
}

// ---------------------------------------------------------------------------

ConfigCache::ConfigCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw Error(ErrorCode::InvalidArgument, "cache capacity must be at least 1");
}

std::optional<CacheEntry> ConfigCache::get(std::uint64_t key) const {
  std::shared_lock lock(mutex_);
  auto it = slots_.find(key);
  if (it == slots_.end())
    return std::nullopt;
  const Slot &s = *it->second;
  s.last_used.store(++clock_, std::memory_order_relaxed);
  CacheEntry e = s.entry;
  e.hit_count = s.hits.fetch_add(1, std::memory_order_relaxed) + 1;
  return e;
}

void ConfigCache::put(CacheEntry entry) {
  std::unique_lock lock(mutex_);
  auto slot = std::make_unique<Slot>();
  slot->last_used.store(++clock_, std::memory_order_relaxed);
  slot->hits.store(entry.hit_count, std::memory_order_relaxed);
  const std::uint64_t key = entry.key;
  slot->entry = std::move(entry);
  slots_.insert_or_assign(key, std::move(slot));
  while (slots_.size() > capacity_) {
    auto victim = std::min_element(slots_.begin(), slots_.end(), [](const auto &a, const auto &b) {
      return a.second->last_used.load(std::memory_order_relaxed) <
             b.second->last_used.load(std::memory_order_relaxed);
    });
    slots_.erase(victim);
  }
}

void ConfigCache::note_offload_time(std::uint64_t key, double seconds) {
  std::unique_lock lock(mutex_);
  auto it = slots_.find(key);
  if (it == slots_.end())
    return;
  Slot &s = *it->second;
  ++s.timed_calls;
  s.entry.mean_offload_time +=
      (seconds - s.entry.mean_offload_time) / static_cast<double>(s.timed_calls);
}

std::size_t ConfigCache::size() const {
  std::shared_lock lock(mutex_);
  return slots_.size();
}

// ---------------------------------------------------------------------------

std::string format_trace(const std::vector<TraceEvent> &trace) {
  std::string out;
  char buf[64];
  for (const auto &e : trace) {
    std::snprintf(buf, sizeof buf, "%.3f", e.t_us);
    out += buf;
    out += ' ';
    out += e.phase;
    if (!e.detail.empty()) {
      out += ' ';
      out += e.detail;
    }
    out += '\n';
  }
  return out;
}

const char *exec_path_name(ExecPath p) {
  switch (p) {
  case ExecPath::Offloaded: return "Offloaded";
  case ExecPath::Software: return "Software";
  case ExecPath::Rejected: return "Rejected";
  case ExecPath::Unroutable: return "Unroutable";
  case ExecPath::RolledBack: return "RolledBack";
  }
  return "Unknown";
}

Runtime::Runtime(RuntimeConfig cfg) : cfg_(std::move(cfg)), cache_(cfg_.cache_capacity) {
  cfg_.cost.check();
  check_policy(cfg_.policy);
  if (cfg_.unroll < 1)
    throw Error(ErrorCode::InvalidArgument, "unroll factor must be at least 1");
  if (cfg_.shape.rows < 1 || cfg_.shape.cols < 1)
    throw Error(ErrorCode::InvalidArgument, "overlay must have at least one cell");
}

OffloadState Runtime::state(std::uint64_t dfg_hash) const {
  std::lock_guard lock(state_mutex_);
  auto it = states_.find(dfg_hash);
  return it == states_.end() ? OffloadState{} : it->second;
}

void Runtime::reset(std::uint64_t dfg_hash) {
  std::lock_guard lock(state_mutex_);
  states_.erase(dfg_hash);
}

void Runtime::reset_all() {
  std::lock_guard lock(state_mutex_);
  states_.clear();
}

void Runtime::note(ExecutionResult &res, double &clock_us, std::string phase, std::string detail,
                   double duration_s) {
  res.trace.push_back(TraceEvent{clock_us, std::move(phase), std::move(detail)});
  clock_us += duration_s * 1e6;
}

ExecutionResult Runtime::execute(const Kernel &k, ArrayStore &arrays, const Env &params) {
  ExecutionResult res;
  double clock = 0;

  auto software = [&](ExecPath path, std::optional<std::uint64_t> hash) {
    const auto t0 = std::chrono::steady_clock::now();
    run_software(k, arrays, params);
    const double measured = seconds_since(t0);
    const double elapsed =
        cfg_.cost.software_time_per_call > 0 ? cfg_.cost.software_time_per_call : measured;
    res.software_time = elapsed;
    res.path = path;
    note(res, clock, "software", exec_path_name(path), elapsed);
    if (hash) {
      std::lock_guard lock(state_mutex_);
      auto &st = states_[*hash];
      st = record(st, Mode::Software, elapsed, cfg_.policy);
    }
    return res;
  };

  auto t0 = std::chrono::steady_clock::now();
  res.eligibility = check_eligibility(k, cfg_.thresholds);
  note(res, clock, "analysis",
       res.eligibility.verdict == Verdict::Accepted
           ? std::string("Accepted")
           : std::string("Rejected(") + reason_name(res.eligibility.reason) + ")",
       seconds_since(t0));
  if (res.eligibility.verdict == Verdict::Rejected || cfg_.mode == OffloadMode::SoftwareOnly)
    return software(res.eligibility.verdict == Verdict::Rejected ? ExecPath::Rejected
                                                                 : ExecPath::Software,
                    std::nullopt);

  DataFlowGraph g;
  try {
    ExtractOptions opts;
    opts.unroll = cfg_.unroll;
    opts.max_calc_nodes = cfg_.thresholds.max_calc_nodes;
    g = extract_dfg(k, opts);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::UnrollTooLarge)
      throw;
    note(res, clock, "decision", "unroll too large", 0);
    return software(ExecPath::Software, std::nullopt);
  }
  std::map<NodeId, std::int32_t> scalars;
  for (NodeId id : g.nodes_of(NodeKind::Input)) {
    const IoBinding *b = g.binding(id);
    if (b && b->access.empty()) {
      auto it = params.find(b->array);
      if (it == params.end())
        throw Error(ErrorCode::UnknownIdentifier, "no value for parameter '" + b->array + "'");
      scalars.emplace(id, static_cast<std::int32_t>(it->second));
    }
  }
  if (!scalars.empty())
    g = fold_inputs_to_constants(g, scalars);
  const std::uint64_t hash = dfg_hash(g);
  res.dfg_hash = hash;

  if (state(hash).mode == Mode::RolledBack) {
    note(res, clock, "decision", "rolled back", 0);
    return software(ExecPath::RolledBack, hash);
  }

  std::shared_ptr<const Placement> placement;
  if (auto hit = cache_.get(hash)) {
    res.cache_hit = true;
    placement = hit->placement;
    note(res, clock, "cache-hit", "hits=" + std::to_string(hit->hit_count), 0);
  } else {
    t0 = std::chrono::steady_clock::now();
    PlaceResult pr = place_and_route(g, cfg_.shape, cfg_.placer, cfg_.seed);
    const double pr_time = seconds_since(t0);
    note(res, clock, "place-route",
         std::string(place_status_name(pr.status)) +
             " iterations=" + std::to_string(pr.attempts.iterations),
         pr_time);
    if (!pr.ok())
      return software(ExecPath::Unroutable, hash);
    placement = std::make_shared<const Placement>(std::move(*pr.placement));
    cache_.put(CacheEntry{hash, placement->config, placement, 0, 0});
  }

  const DataFlowGraph &mapped = placement->graph;
  const auto trips = steady_trip_counts(mapped, params);
  std::uint64_t n = trips.empty() ? 0 : 1;
  for (auto t : trips)
    n *= static_cast<std::uint64_t>(t);
  const DfgStats stats = dfg_stats(mapped);
  res.modeled_offload_time = estimate_offload_time(stats, n, cfg_.cost, res.cache_hit);

  OffloadState st = state(hash);
  if (cfg_.cost.software_time_per_call > 0 && st.software.samples == 0) {
    std::lock_guard lock(state_mutex_);
    auto &s = states_[hash];
    s.software.add(cfg_.cost.software_time_per_call, cfg_.policy.ema_alpha);
    st = s;
  }
  if (cfg_.mode == OffloadMode::Adaptive) {
    if (st.software.samples == 0) {
      note(res, clock, "decision", "profile software", 0);
      return software(ExecPath::Software, hash);
    }
    if (decide(st, res.modeled_offload_time, st.software.value, cfg_.policy) ==
        Decision::Software) {
      note(res, clock, "decision", "software", 0);
      return software(ExecPath::Software, hash);
    }
  }
  note(res, clock, "decision", "offload", 0);

  if (!res.cache_hit)
    note(res, clock, "configure", "cells=" + std::to_string(stats.calc_nodes), cfg_.cost.config_time);
  note(res, clock, "constants", "consts=" + std::to_string(stats.consts),
       cfg_.cost.const_transfer_time);
  const StreamSet streams = build_streams(mapped, arrays, params);
  const RunReport rep = run(placement->config, streams.inputs, streams.length);
  note(res, clock, "transfer-in", "frames=" + std::to_string(rep.frames_in),
       static_cast<double>(TaggedFrame::kBytes * rep.frames_in) / cfg_.cost.wire_rate);
  note(res, clock, "compute", "cycles=" + std::to_string(rep.cycles), 0);
  note(res, clock, "transfer-out", "frames=" + std::to_string(rep.frames_out),
       static_cast<double>(TaggedFrame::kBytes * rep.frames_out) / cfg_.cost.wire_rate);
  write_back(mapped, rep, arrays, params);
  if (const std::int64_t rem = remainder_iterations(mapped, params); rem > 0) {
    const std::int64_t bound = mapped.domain.back().bound.evaluate(params);
    const auto te = std::chrono::steady_clock::now();
    run_software(k, arrays, params, InnermostRange{bound - rem, bound});
    note(res, clock, "epilogue", "iterations=" + std::to_string(rem), seconds_since(te));
  }
  res.run = rep;
  res.path = ExecPath::Offloaded;

  const double elapsed = res.modeled_offload_time;
  cache_.note_offload_time(hash, elapsed);
  Mode after;
  {
    std::lock_guard lock(state_mutex_);
    auto &s = states_[hash];
    s = record(s, Mode::Offloaded, elapsed, cfg_.policy);
    after = s.mode;
  }
  if (after == Mode::RolledBack)
    note(res, clock, "rollback", "offloaded time exceeds software time", 0);
  return res;
}

} // namespace dfe
